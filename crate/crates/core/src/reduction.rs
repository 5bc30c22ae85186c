//! The constraint iteration shared by the Lagrangian and Hamiltonian
//! pictures.
//!
//! Each step takes the pending constraints `c_j`, forms
//! `γ_{μj} = K_μ c_j` over the free vertical directions `K_μ`, and solves
//! the consistency conditions `drift(c_j) + Σ_μ vdot^μ γ_{μj} = 0` on the
//! pivot block. The pivot constraints (and their ancestors) are second
//! class and get eliminated; the remaining ones are first-class candidates
//! whose corrected time derivatives become the next generation.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_form, generic_rank, invert_submatrix, RankCertificate, SymMatrix};
use crate::phasespace::{
    acc, poisson_bracket, v, Constraint, ConstraintClass, Direction, PhaseSpaceModel, Resolution,
    VectorField,
};
use crate::sym::{
    differentiate, gcd, solve_linear, substitute, Atom, Coord, CoordKind, Evaluator, Expr,
    Monomial, Poly, Rational, VarTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    Lagrangian,
    Hamiltonian,
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Picture::Lagrangian => "lagrangian",
            Picture::Hamiltonian => "hamiltonian",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    FullyDetermined,
    GaugeFreedom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedVar {
    pub var: String,
    pub value: Expr,
    pub side_condition: Expr,
    pub label: String,
}

/// Coordinates eliminated so far. Values never mention an eliminated
/// coordinate, so restriction is a single simultaneous substitution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Surface {
    pub solved: Vec<SolvedVar>,
}

impl Surface {
    pub fn bindings(&self) -> BTreeMap<String, Expr> {
        self.solved
            .iter()
            .map(|s| (s.var.clone(), s.value.clone()))
            .collect()
    }

    pub fn eliminated(&self) -> BTreeSet<String> {
        self.solved.iter().map(|s| s.var.clone()).collect()
    }

    pub fn is_eliminated(&self, name: &str) -> bool {
        self.solved.iter().any(|s| s.var == name)
    }

    pub fn value_of(&self, name: &str) -> Option<&Expr> {
        self.solved.iter().find(|s| s.var == name).map(|s| &s.value)
    }

    pub fn restrict(&self, e: &Expr) -> Result<Expr> {
        if self.solved.is_empty() {
            return Ok(e.clone());
        }
        Ok(substitute(e, &self.bindings())?)
    }

    pub fn restrict_matrix(&self, m: &SymMatrix) -> Result<SymMatrix> {
        let mut out = m.clone();
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.set(i, j, self.restrict(m.get(i, j))?);
            }
        }
        Ok(out)
    }

    pub fn push(&mut self, var: &str, value: &Expr, side_condition: Expr, label: &str) -> Result<()> {
        let value = self.restrict(value)?;
        if value.mentions(var) {
            return Err(Error::Internal(format!("{var} solved in terms of itself")));
        }
        let b = BTreeMap::from([(var.to_string(), value.clone())]);
        for s in &mut self.solved {
            s.value = substitute(&s.value, &b)?;
        }
        self.solved.push(SolvedVar {
            var: var.to_string(),
            value,
            side_condition,
            label: label.to_string(),
        });
        Ok(())
    }
}

/// The determined part of the evolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Drift {
    /// Explicit components.
    Field(BTreeMap<String, Expr>),
    /// `{g, ·}` plus explicit components along the velocities.
    Generator {
        vars: VarTable,
        g: Expr,
        extra: BTreeMap<String, Expr>,
    },
}

fn apply_components(comps: &BTreeMap<String, Expr>, f: &Expr) -> Expr {
    comps
        .iter()
        .map(|(x, c)| {
            let d = differentiate(f, x);
            if d.is_zero() {
                d
            } else {
                c * d
            }
        })
        .sum()
}

fn restrict_components(comps: &mut BTreeMap<String, Expr>, surface: &Surface) -> Result<()> {
    let elim = surface.eliminated();
    let old = std::mem::take(comps);
    for (x, c) in old {
        if elim.contains(&x) {
            continue;
        }
        let c = surface.restrict(&c)?;
        if !c.is_zero() {
            comps.insert(x, c);
        }
    }
    Ok(())
}

fn add_component(comps: &mut BTreeMap<String, Expr>, x: &str, c: Expr) {
    let total = comps.get(x).cloned().unwrap_or_default() + c;
    if total.is_zero() {
        comps.remove(x);
    } else {
        comps.insert(x.to_string(), total);
    }
}

impl Drift {
    pub fn apply(&self, f: &Expr) -> Expr {
        match self {
            Drift::Field(c) => apply_components(c, f),
            Drift::Generator { vars, g, extra } => {
                poisson_bracket(vars, g, f) + apply_components(extra, f)
            }
        }
    }

    fn add_vertical(&mut self, coeff: &Expr, dir: &Direction) {
        let comps = match self {
            Drift::Field(c) => c,
            Drift::Generator { extra, .. } => extra,
        };
        for (x, k) in &dir.components {
            add_component(comps, x, coeff * k);
        }
    }

    fn restrict(&mut self, surface: &Surface) -> Result<()> {
        match self {
            Drift::Field(c) => restrict_components(c, surface),
            Drift::Generator { vars, g, extra } => {
                // Only velocities may be substituted into the generator:
                // positions and momenta must stay independent inside the
                // bracket.
                let b: BTreeMap<String, Expr> = surface
                    .solved
                    .iter()
                    .filter(|s| matches!(vars.coord(&s.var), Some(c) if c.kind == CoordKind::V))
                    .map(|s| (s.var.clone(), s.value.clone()))
                    .collect();
                if !b.is_empty() {
                    *g = substitute(g, &b)?;
                }
                restrict_components(extra, surface)
            }
        }
    }

    /// Explicit components on the non-eliminated coordinates.
    pub fn components(&self, surface: &Surface) -> Result<BTreeMap<String, Expr>> {
        match self {
            Drift::Field(c) => {
                let mut c = c.clone();
                restrict_components(&mut c, surface)?;
                Ok(c)
            }
            Drift::Generator { vars, g, extra } => {
                let mut c = BTreeMap::new();
                for i in 1..=vars.dim {
                    let (qi, pi) = (format!("q{i}"), format!("p{i}"));
                    c.insert(qi, differentiate(g, &pi));
                    c.insert(pi, -differentiate(g, &format!("q{i}")));
                }
                for (x, k) in extra {
                    add_component(&mut c, x, k.clone());
                }
                restrict_components(&mut c, surface)?;
                Ok(c)
            }
        }
    }

    pub fn generator(&self) -> Option<&Expr> {
        match self {
            Drift::Generator { g, .. } => Some(g),
            Drift::Field(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub parent: usize,
    pub expr: Expr,
    pub outcome: CandidateOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateOutcome {
    Zero,
    Reducible,
    ProbablyReducible,
    New(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub processed: Vec<usize>,
    pub gamma: SymMatrix,
    pub certificate: RankCertificate,
    /// Multiplier name and its value on the surface at this stage.
    pub determined: Vec<(String, Expr)>,
    pub second_class: Vec<usize>,
    pub first_class: Vec<usize>,
    pub resolved: Vec<usize>,
    pub candidates: Vec<Candidate>,
    /// Nonvanishing assumptions first made in this generation: pivots,
    /// solved-variable coefficients and factors stripped from new
    /// constraints.
    pub side_conditions: Vec<Expr>,
    /// Surface after this generation's eliminations.
    pub surface: Surface,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub picture: Picture,
    pub vars: VarTable,
    pub constraints: Vec<Constraint>,
    pub generations: Vec<GenerationRecord>,
    pub surface: Surface,
    pub drift: Drift,
    pub directions: Vec<Direction>,
    pub termination: Termination,
    pub side_conditions: Vec<Expr>,
    pub warnings: Vec<String>,
    pub determined: BTreeMap<String, Expr>,
}

impl Reduction {
    pub fn field(&self) -> Result<VectorField> {
        Ok(VectorField {
            drift: self.drift.components(&self.surface)?,
            directions: self.directions.clone(),
        })
    }

    pub fn first_class(&self) -> Vec<&Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.class == ConstraintClass::First)
            .collect()
    }

    pub fn second_class(&self) -> Vec<&Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.class == ConstraintClass::Second)
            .collect()
    }

    pub fn constraint(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label == label)
    }

    /// The surface with every unresolved constraint solved as well, when
    /// that is possible.
    pub fn full_surface(&self) -> Result<Surface> {
        let unresolved: Vec<&Constraint> = self
            .constraints
            .iter()
            .filter(|c| c.resolution.is_none())
            .collect();
        Ok(extend_surface(self.picture, &self.vars, &self.surface, &unresolved)?.0)
    }

    /// Time derivative of `f` along the final drift, on the final surface.
    pub fn evolve(&self, f: &Expr) -> Result<Expr> {
        let f = self.surface.restrict(f)?;
        self.surface.restrict(&self.drift.apply(&f))
    }

    pub fn determined_velocities(&self) -> BTreeMap<String, Expr> {
        self.surface
            .solved
            .iter()
            .filter(|s| matches!(self.vars.coord(&s.var), Some(c) if c.kind == CoordKind::V))
            .map(|s| (s.var.clone(), s.value.clone()))
            .collect()
    }

    pub fn undetermined(&self) -> Vec<String> {
        self.directions.iter().map(|d| d.multiplier.clone()).collect()
    }

    pub fn reducibility_check(&self, cand: &Expr) -> Result<CandidateOutcome> {
        reducibility_check(self.picture, &self.vars, &self.surface, &self.constraints, cand)
    }
}

fn kind_rank(picture: Picture, c: Coord, elim: &BTreeSet<String>) -> u8 {
    match picture {
        Picture::Lagrangian => match c.kind {
            CoordKind::P => 0,
            _ if c.partner().map(|p| elim.contains(&p.name())).unwrap_or(false) => 1,
            CoordKind::V => 2,
            CoordKind::Q => 3,
        },
        Picture::Hamiltonian => match c.kind {
            CoordKind::V => 0,
            CoordKind::P => 1,
            CoordKind::Q => 2,
        },
    }
}

/// Solve `c = 0` for the preferred coordinate it is affine in.
pub fn choose_solution(
    picture: Picture,
    vars: &VarTable,
    surface: &Surface,
    c: &Expr,
) -> Option<(String, Resolution)> {
    let elim = surface.eliminated();
    let mut best: Option<((u8, u8, Reverse<usize>, CoordKind), String, Resolution)> = None;
    for name in c.free_symbols() {
        let Some(coord) = vars.coord(&name) else {
            continue;
        };
        if elim.contains(&name) {
            continue;
        }
        let Ok(sol) = solve_linear(c, &name) else {
            continue;
        };
        let key = (
            kind_rank(picture, coord, &elim),
            if sol.side_condition.is_nonzero_literal() { 0 } else { 1 },
            Reverse(coord.index),
            coord.kind,
        );
        if best.as_ref().map(|b| key < b.0).unwrap_or(true) {
            let res = Resolution {
                variable: name.clone(),
                solution: sol.value,
                side_condition: sol.side_condition,
            };
            best = Some((key, name, res));
        }
    }
    best.map(|(_, n, r)| (n, r))
}

/// Extend `surface` by solving each constraint in turn; returns the
/// extended surface and the constraints that could not be solved.
fn extend_surface<'a>(
    picture: Picture,
    vars: &VarTable,
    surface: &Surface,
    cs: &[&'a Constraint],
) -> Result<(Surface, Vec<&'a Constraint>)> {
    let mut full = surface.clone();
    let mut unsolved = Vec::new();
    for c in cs {
        let r = full.restrict(&c.expr)?;
        if r.is_zero() {
            continue;
        }
        match choose_solution(picture, vars, &full, &r) {
            Some((x, res)) => full.push(&x, &res.solution, res.side_condition, &c.label)?,
            None => unsolved.push(*c),
        }
    }
    Ok((full, unsolved))
}

fn term_key(vars: &VarTable, m: &Monomial) -> Vec<(u8, usize, i32)> {
    let mut key: Vec<(u8, usize, i32)> = m
        .powers()
        .iter()
        .map(|(a, k)| match a {
            Atom::Sym(s) => match vars.coord(s) {
                Some(c) => {
                    let r = match c.kind {
                        CoordKind::P => 3,
                        CoordKind::V => 2,
                        CoordKind::Q => 1,
                    };
                    (r, c.index, *k)
                }
                None => (0, 0, *k),
            },
            Atom::Func { .. } => (0, 0, *k),
        })
        .collect();
    key.sort_by(|a, b| b.cmp(a));
    key
}

fn is_param_atom(vars: &VarTable, a: &Atom) -> bool {
    matches!(a, Atom::Sym(s) if vars.is_param(s))
}

fn monomial_of(powers: &[(Atom, i32)]) -> Monomial {
    powers
        .iter()
        .fold(Monomial::one(), |m, (a, k)| m.mul(&Monomial::atom(a.clone(), *k)))
}

/// Display form of a derived constraint: its numerator with exp factors,
/// parameter factors, repeated factors and rational content removed, and
/// the sign fixed. Returns the stripped factors, which must not vanish.
pub fn normalize_constraint(e: &Expr, vars: &VarTable) -> (Expr, Vec<Expr>) {
    let mut stripped = Vec::new();
    if !e.den_poly().is_one() {
        stripped.push(e.denominator());
    }
    let mut n = e.num_poly().clone();
    if n.is_zero() {
        return (Expr::zero(), stripped);
    }
    let lead = n
        .terms()
        .next_back()
        .map(|(m, _)| m.exp_part().clone())
        .unwrap_or_default();
    {
        if !lead.is_zero() {
            stripped.push(Expr::from_monomial(Monomial::exp_of(lead.clone())));
            n = n.mul_monomial(&Monomial::exp_of(lead.neg()));
        }
    }
    let content = n.monomial_content();
    let mut fix = Vec::new();
    for (a, k) in content.powers() {
        if *k < 0 {
            fix.push((a.clone(), -k));
        } else if is_param_atom(vars, a) {
            fix.push((a.clone(), -k));
            stripped.push(Expr::from_monomial(Monomial::atom(a.clone(), *k)));
        }
    }
    if !fix.is_empty() {
        n = n.mul_monomial(&monomial_of(&fix));
    }
    if n.is_plain() {
        let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in n.terms() {
            let (params, phase): (Vec<_>, Vec<_>) = m
                .powers()
                .iter()
                .cloned()
                .partition(|(a, _)| is_param_atom(vars, a));
            let entry = groups.entry(monomial_of(&phase)).or_default();
            *entry = entry.add(&Poly::term(monomial_of(&params), c.clone()));
        }
        if groups.len() > 0 {
            let g = groups.values().fold(Poly::zero(), |acc, p| gcd(&acc, p));
            if g.as_constant().is_none() {
                n = n.div_exact(&g).expect("content divides");
                stripped.push(Expr::from_poly(g));
            }
        }
        let all_sym = n.atoms().iter().all(|a| matches!(a, Atom::Sym(_)));
        if all_sym {
            let ne = Expr::from_poly(n.clone());
            let mut g = n.clone();
            for a in n.atoms() {
                if let Atom::Sym(s) = a {
                    g = gcd(&g, differentiate(&ne, &s).num_poly());
                }
            }
            if g.as_constant().is_none() {
                n = n.div_exact(&g).expect("gcd divides");
            }
        }
    }
    n = n.scale(&n.rational_content().recip());
    let lead_negative = n
        .terms()
        .max_by(|(a, _), (b, _)| term_key(vars, a).cmp(&term_key(vars, b)).then(a.cmp(b)))
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false);
    if lead_negative {
        n = n.neg();
    }
    (Expr::from_poly(n), stripped)
}

/// Whether `cand` vanishes on the surface cut out by `surface` together
/// with every unresolved constraint.
pub fn reducibility_check(
    picture: Picture,
    vars: &VarTable,
    surface: &Surface,
    constraints: &[Constraint],
    cand: &Expr,
) -> Result<CandidateOutcome> {
    let r = surface.restrict(cand)?;
    if r.is_zero() {
        return Ok(CandidateOutcome::Zero);
    }
    let unresolved: Vec<&Constraint> = constraints
        .iter()
        .filter(|c| c.resolution.is_none())
        .collect();
    let (full, unsolved) = extend_surface(picture, vars, surface, &unresolved)?;
    let r = full.restrict(&r)?;
    if r.is_zero() {
        return Ok(CandidateOutcome::Reducible);
    }
    if r.num_poly().is_plain() {
        for u in unsolved {
            let un = full.restrict(&u.expr)?;
            if un.num_poly().is_plain() && r.num_poly().div_exact(un.num_poly()).is_some() {
                return Ok(CandidateOutcome::Reducible);
            }
        }
    }
    if vanishes_numerically(&r, 0x5eed ^ constraints.len() as u64) {
        return Ok(CandidateOutcome::ProbablyReducible);
    }
    Ok(CandidateOutcome::New(usize::MAX))
}

const NUMERIC_POINTS: usize = 50;

/// Heuristic zero test at random rational points.
pub fn vanishes_numerically(e: &Expr, seed: u64) -> bool {
    let names: Vec<String> = e.free_symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Rational::new(1.into(), num_bigint::BigInt::from(10).pow(40));
    let mut evaluated = 0;
    for _ in 0..NUMERIC_POINTS {
        let values = names
            .iter()
            .map(|n| {
                let num: i64 = rng.gen_range(-40..=40);
                let den: i64 = rng.gen_range(1..=9);
                (n.clone(), Rational::new(num.into(), den.into()))
            })
            .collect();
        match Evaluator::new(values).eval(e) {
            Ok(x) => {
                if x.abs() > tol {
                    return false;
                }
                evaluated += 1;
            }
            Err(_) => continue,
        }
    }
    evaluated > 0
}

struct Engine<'m> {
    model: &'m PhaseSpaceModel,
    picture: Picture,
    surface: Surface,
    drift: Drift,
    directions: Vec<Direction>,
    constraints: Vec<Constraint>,
    pending: Vec<usize>,
    generations: Vec<GenerationRecord>,
    side_conditions: Vec<Expr>,
    warnings: Vec<String>,
    determined: BTreeMap<String, Expr>,
}

impl<'m> Engine<'m> {
    fn vars(&self) -> &VarTable {
        self.model.vars()
    }

    fn add_side_condition(&mut self, e: &Expr) {
        let c = condition_form(e);
        if c.is_zero() || c.is_nonzero_literal() || self.side_conditions.contains(&c) {
            return;
        }
        self.side_conditions.push(c);
    }

    fn ancestors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.constraints[i].parent;
        while let Some(j) = cur {
            out.push(j);
            cur = self.constraints[j].parent;
        }
        out
    }

    fn resolve(&mut self, i: usize) -> Result<()> {
        let c = self.surface.restrict(&self.constraints[i].expr)?;
        if c.is_zero() {
            return Ok(());
        }
        let Some((x, res)) = choose_solution(self.picture, self.vars(), &self.surface, &c) else {
            return Err(Error::UnresolvableSecondClass {
                label: self.constraints[i].label.clone(),
                expr: c.to_string(),
            });
        };
        self.add_side_condition(&res.side_condition);
        let label = self.constraints[i].label.clone();
        self.surface
            .push(&x, &res.solution, res.side_condition.clone(), &label)?;
        self.constraints[i].resolution = Some(res);
        Ok(())
    }

    fn classify_candidate(&mut self, cand: &Expr) -> Result<CandidateOutcome> {
        reducibility_check(
            self.picture,
            self.vars(),
            &self.surface,
            &self.constraints,
            cand,
        )
    }

    fn step(&mut self) -> Result<()> {
        let generation = self.generations.len();
        let assumed_before = self.side_conditions.len();
        let idx = std::mem::take(&mut self.pending);
        let mut cs = Vec::with_capacity(idx.len());
        for &i in &idx {
            cs.push(self.surface.restrict(&self.constraints[i].expr)?);
        }
        let mut d = Vec::with_capacity(cs.len());
        for c in &cs {
            d.push(self.surface.restrict(&self.drift.apply(c))?);
        }
        let mut gamma = SymMatrix::zeros(self.directions.len(), cs.len());
        for (m, dir) in self.directions.iter().enumerate() {
            for (j, c) in cs.iter().enumerate() {
                gamma.set(m, j, self.surface.restrict(&dir.apply(c))?);
            }
        }
        let cert = generic_rank(&gamma);
        for s in cert.side_conditions.clone() {
            self.add_side_condition(&s);
        }
        let r = cert.rank;
        let binv = if r > 0 {
            invert_submatrix(&gamma, &cert.pivot_rows, &cert.pivot_cols)?
        } else {
            SymMatrix::zeros(0, 0)
        };

        // Multipliers fixed by the pivot block.
        let mut determined = Vec::new();
        let mut lambdas = Vec::new();
        for s in 0..r {
            let lam: Expr = (0..r)
                .map(|t| &d[cert.pivot_cols[t]] * binv.get(t, s))
                .sum();
            let lam = self.surface.restrict(&-lam)?;
            let name = self.directions[cert.pivot_rows[s]].multiplier.clone();
            determined.push((name.clone(), lam.clone()));
            self.determined.insert(name, lam.clone());
            lambdas.push(lam);
        }
        let mut new_dirs = Vec::new();
        for (mu, dir) in self.directions.iter().enumerate() {
            if cert.pivot_rows.contains(&mu) {
                continue;
            }
            let mut comps = dir.components.clone();
            for s in 0..r {
                let c: Expr = (0..r)
                    .map(|t| gamma.get(mu, cert.pivot_cols[t]) * binv.get(t, s))
                    .sum();
                if c.is_zero() {
                    continue;
                }
                for (x, k) in &self.directions[cert.pivot_rows[s]].components {
                    add_component(&mut comps, x, -(&c * k));
                }
            }
            new_dirs.push(Direction {
                multiplier: dir.multiplier.clone(),
                components: comps,
            });
        }
        for s in 0..r {
            let dir = self.directions[cert.pivot_rows[s]].clone();
            self.drift.add_vertical(&lambdas[s], &dir);
        }
        let no_directions = self.directions.is_empty();
        self.directions = new_dirs;

        // Corrected derivatives of the non-pivot constraints.
        let mut raw = Vec::new();
        for (j, c) in cs.iter().enumerate() {
            if cert.pivot_cols.contains(&j) {
                continue;
            }
            raw.push((idx[j], self.drift.apply(c)));
        }

        let mut second: BTreeSet<usize> = BTreeSet::new();
        let mut first = Vec::new();
        for (j, &i) in idx.iter().enumerate() {
            if cert.pivot_cols.contains(&j) || no_directions {
                second.insert(i);
                second.extend(self.ancestors(i));
            } else {
                first.push(i);
            }
        }
        second.retain(|&i| self.constraints[i].resolution.is_none());
        for &i in &first {
            self.constraints[i].class = ConstraintClass::First;
        }
        for &i in &second {
            self.constraints[i].class = ConstraintClass::Second;
        }
        let mut order: Vec<usize> = second.iter().copied().collect();
        order.sort_by_key(|&i| (self.constraints[i].generation, i));
        for &i in &order {
            self.resolve(i)?;
        }
        self.drift.restrict(&self.surface)?;
        for dir in &mut self.directions {
            restrict_components(&mut dir.components, &self.surface)?;
        }

        let mut candidates = Vec::new();
        for (parent, cand) in raw {
            let cand = self.surface.restrict(&cand)?;
            let (norm, stripped) = normalize_constraint(&cand, self.vars());
            if norm.is_zero() {
                candidates.push(Candidate {
                    parent,
                    expr: cand,
                    outcome: CandidateOutcome::Zero,
                });
                continue;
            }
            let family = self.constraints[parent].family;
            let gen = self.constraints[parent].generation + 1;
            let label = format!("phi_{family}^({gen})");
            if norm.as_rational().is_some() {
                return Err(Error::InconsistentConstraint {
                    label,
                    expr: norm.to_string(),
                });
            }
            let mut outcome = self.classify_candidate(&norm)?;
            if outcome == CandidateOutcome::ProbablyReducible {
                self.warnings.push(format!(
                    "{} picture: candidate {label} = {norm} vanishes at sampled surface points but not symbolically; treated as probably reducible",
                    self.picture
                ));
            }
            if let CandidateOutcome::New(_) = outcome {
                for s in &stripped {
                    self.add_side_condition(s);
                }
                self.constraints.push(Constraint {
                    expr: norm.clone(),
                    generation: gen,
                    label,
                    family,
                    class: ConstraintClass::Undecided,
                    resolution: None,
                    parent: Some(parent),
                });
                let k = self.constraints.len() - 1;
                self.pending.push(k);
                outcome = CandidateOutcome::New(k);
            }
            candidates.push(Candidate {
                parent,
                expr: norm,
                outcome,
            });
        }

        self.generations.push(GenerationRecord {
            generation,
            processed: idx,
            gamma,
            certificate: cert,
            determined,
            second_class: order,
            first_class: first,
            resolved: self
                .constraints
                .iter()
                .enumerate()
                .filter(|(_, c)| c.resolution.is_some())
                .map(|(i, _)| i)
                .collect(),
            candidates,
            side_conditions: self.side_conditions[assumed_before..].to_vec(),
            surface: self.surface.clone(),
        });
        Ok(())
    }
}

/// Run the iteration from the primary constraints until termination.
pub fn run(
    model: &PhaseSpaceModel,
    picture: Picture,
    drift: Drift,
    max_generations: usize,
) -> Result<Reduction> {
    if max_generations == 0 {
        return Err(Error::InvalidSpec("generation budget must be at least 1".into()));
    }
    let n = model.dim();
    let mut engine = Engine {
        model,
        picture,
        surface: Surface::default(),
        drift,
        directions: (1..=n)
            .map(|i| Direction {
                multiplier: acc(i),
                components: BTreeMap::from([(v(i), Expr::one())]),
            })
            .collect(),
        constraints: model.primary.clone(),
        pending: (0..n).collect(),
        generations: Vec::new(),
        side_conditions: Vec::new(),
        warnings: Vec::new(),
        determined: BTreeMap::new(),
    };
    for s in &model.hessian_cert.side_conditions {
        engine.add_side_condition(s);
    }
    while !engine.pending.is_empty() {
        if engine.generations.len() >= max_generations {
            return Err(Error::GenerationBudgetExceeded {
                picture: picture.to_string(),
                budget: max_generations,
            });
        }
        engine.step()?;
    }
    let termination = if engine.directions.is_empty() {
        Termination::FullyDetermined
    } else {
        Termination::GaugeFreedom
    };
    Ok(Reduction {
        picture,
        vars: model.vars().clone(),
        constraints: engine.constraints,
        generations: engine.generations,
        surface: engine.surface,
        drift: engine.drift,
        directions: engine.directions,
        termination,
        side_conditions: engine.side_conditions,
        warnings: engine.warnings,
        determined: engine.determined,
    })
}
