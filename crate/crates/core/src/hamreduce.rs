//! Constraint analysis in the momentum picture: second-class primaries are
//! solved for velocities, evolution is generated by the total Hamiltonian
//! through the Poisson bracket, and second-class pairs are folded into
//! staged Dirac brackets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{generic_rank, invert, SymMatrix};
use crate::phasespace::{p, poisson_bracket, v, PhaseSpaceModel};
use crate::reduction::{self, Drift, Picture, Reduction, Surface};
use crate::sym::{differentiate, CoordKind, Expr, VarTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RouthData {
    /// `(ℓ − p_a vᵃ)` on the first surface.
    pub routh: Expr,
    pub h: Expr,
    /// Keyed by the free velocity `v^μ`.
    pub psi: BTreeMap<String, Expr>,
    /// `p_μ − ψ_μ`, keyed by the free velocity.
    pub phi: BTreeMap<String, Expr>,
    pub h_total: Expr,
}

/// Routh function, Hamiltonian and total Hamiltonian on the surface where
/// the second-class primaries have been solved for velocities.
pub fn routh_reduction(model: &PhaseSpaceModel, m1: &Surface) -> Result<RouthData> {
    let vars = model.vars();
    let n = model.dim();
    let mut solved_v = Vec::new();
    for s in &m1.solved {
        match vars.coord(&s.var) {
            Some(c) if c.kind == CoordKind::V => solved_v.push(c.index),
            _ => {
                return Err(Error::NonlinearRouth(format!(
                    "primary {} was not solvable for a velocity",
                    s.label
                )))
            }
        }
    }
    let pa_va: Expr = solved_v
        .iter()
        .map(|&a| Expr::sym(&p(a)) * Expr::sym(&v(a)))
        .sum();
    let routh = m1.restrict(&(&model.lagrangian - pa_va))?;
    let free: Vec<usize> = (1..=n).filter(|i| !solved_v.contains(i)).collect();
    for &mu in &free {
        let d = differentiate(&routh, &v(mu));
        for &nu in &free {
            let dd = differentiate(&d, &v(nu));
            if !dd.is_zero() {
                return Err(Error::NonlinearRouth(format!(
                    "d2R/d{}d{} = {dd}",
                    v(mu),
                    v(nu)
                )));
            }
        }
    }
    let mut psi = BTreeMap::new();
    let mut phi = BTreeMap::new();
    let mut lin = Expr::zero();
    let mut h_total_extra = Expr::zero();
    for &mu in &free {
        let s = differentiate(&routh, &v(mu));
        lin = lin + Expr::sym(&v(mu)) * &s;
        let f = Expr::sym(&p(mu)) - &s;
        h_total_extra = h_total_extra + Expr::sym(&v(mu)) * &f;
        psi.insert(v(mu), s);
        phi.insert(v(mu), f);
    }
    let h = lin - &routh;
    if free.iter().any(|&mu| h.mentions(&v(mu))) {
        return Err(Error::NonlinearRouth(format!("h = {h} depends on a free velocity")));
    }
    let h_total = &h + h_total_extra;
    let e1 = m1.restrict(&model.energy)?;
    if !(&e1 - &h_total).is_zero() {
        return Err(Error::Internal(format!(
            "energy on the first surface {e1} differs from h_T = {h_total}"
        )));
    }
    Ok(RouthData {
        routh,
        h,
        psi,
        phi,
        h_total,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiracStage {
    pub generation: usize,
    pub labels: Vec<String>,
    pub chi: Vec<Expr>,
    /// `C_AB = {χ_A, χ_B}` in the previous stage's bracket.
    pub matrix: SymMatrix,
    pub inverse: SymMatrix,
}

/// Poisson bracket corrected by zero or more stages of second-class
/// constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketTable {
    pub vars: VarTable,
    pub stages: Vec<DiracStage>,
}

impl BracketTable {
    pub fn poisson(vars: &VarTable) -> Self {
        BracketTable {
            vars: vars.clone(),
            stages: Vec::new(),
        }
    }

    pub fn stage(&self) -> usize {
        self.stages.len()
    }

    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        self.bracket_at(self.stages.len(), f, g)
    }

    fn bracket_at(&self, k: usize, f: &Expr, g: &Expr) -> Expr {
        if k == 0 {
            return poisson_bracket(&self.vars, f, g);
        }
        let st = &self.stages[k - 1];
        let base = self.bracket_at(k - 1, f, g);
        let fa: Vec<Expr> = st.chi.iter().map(|c| self.bracket_at(k - 1, f, c)).collect();
        let bg: Vec<Expr> = st.chi.iter().map(|c| self.bracket_at(k - 1, c, g)).collect();
        let mut corr = Expr::zero();
        for (a, fa) in fa.iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (b, bg) in bg.iter().enumerate() {
                let w = st.inverse.get(a, b);
                if !w.is_zero() && !bg.is_zero() {
                    corr = corr + fa * w * bg;
                }
            }
        }
        base - corr
    }

    fn matrix(&self, chi: &[Expr]) -> SymMatrix {
        SymMatrix::from_fn(chi.len(), chi.len(), |a, b| self.bracket(&chi[a], &chi[b]))
    }
}

/// Add a stage built from `chi`; its bracket matrix must be nonsingular
/// on `surface`.
pub fn dirac_bracket(
    table: &BracketTable,
    chi: &[(String, Expr)],
    surface: &Surface,
    generation: usize,
) -> Result<BracketTable> {
    if chi.is_empty() {
        return Ok(table.clone());
    }
    let exprs: Vec<Expr> = chi.iter().map(|(_, e)| e.clone()).collect();
    let c = table.matrix(&exprs);
    let restricted = surface.restrict_matrix(&c)?;
    let cert = generic_rank(&restricted);
    let singular = Error::SingularConstraintMatrix {
        rank: cert.rank,
        size: chi.len(),
    };
    if cert.rank < chi.len() {
        return Err(singular);
    }
    let inverse = invert(&c).map_err(|_| singular)?;
    let mut out = table.clone();
    out.stages.push(DiracStage {
        generation,
        labels: chi.iter().map(|(l, _)| l.clone()).collect(),
        chi: exprs,
        matrix: c,
        inverse,
    });
    Ok(out)
}

/// Largest set of constraints, chosen greedily in pairs, whose mutual
/// bracket matrix is nonsingular on `surface`.
pub fn second_class_pairs(
    table: &BracketTable,
    cands: &[(String, Expr)],
    surface: &Surface,
) -> Result<Vec<(String, Expr)>> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..cands.len() {
        if chosen.contains(&i) {
            continue;
        }
        for j in (i + 1)..cands.len() {
            if chosen.contains(&j) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(i);
            trial.push(j);
            let exprs: Vec<Expr> = trial.iter().map(|&k| cands[k].1.clone()).collect();
            let m = surface.restrict_matrix(&table.matrix(&exprs))?;
            if generic_rank(&m).rank == trial.len() {
                chosen = trial;
                break;
            }
        }
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|k| cands[k].clone()).collect())
}

#[derive(Clone, Debug)]
pub struct HamiltonianReduction {
    pub reduction: Reduction,
    pub routh: RouthData,
    pub table: BracketTable,
    /// Whether `ḟ = {G, f}*` holds on the final surface for every
    /// remaining position and momentum, `G` being the final generator.
    pub dirac_evolution_consistent: bool,
}

pub fn run_hamiltonian(model: &PhaseSpaceModel, max_generations: usize) -> Result<HamiltonianReduction> {
    let vars = model.vars().clone();
    let drift = Drift::Generator {
        vars: vars.clone(),
        g: model.energy.clone(),
        extra: BTreeMap::new(),
    };
    let reduction = reduction::run(model, Picture::Hamiltonian, drift, max_generations)?;
    let routh = routh_reduction(model, &reduction.generations[0].surface)?;

    let mut table = BracketTable::poisson(&vars);
    let mut before = Surface::default();
    for rec in &reduction.generations {
        let mut cands = Vec::new();
        for &i in &rec.second_class {
            let c = &reduction.constraints[i];
            let e = before.restrict(&c.expr)?;
            let has_velocity = e
                .free_symbols()
                .iter()
                .any(|s| matches!(vars.coord(s), Some(c) if c.kind == CoordKind::V));
            if !has_velocity && !e.is_zero() {
                cands.push((c.label.clone(), e));
            }
        }
        let chi = second_class_pairs(&table, &cands, &rec.surface)?;
        table = dirac_bracket(&table, &chi, &rec.surface, rec.generation)?;
        before = rec.surface.clone();
    }

    let dirac_evolution_consistent = dirac_evolution_holds(&reduction, &table)?;
    Ok(HamiltonianReduction {
        reduction,
        routh,
        table,
        dirac_evolution_consistent,
    })
}

fn dirac_evolution_holds(red: &Reduction, table: &BracketTable) -> Result<bool> {
    let Some(g) = red.drift.generator() else {
        return Ok(false);
    };
    for c in red.vars.all_coords() {
        if c.kind == CoordKind::V || red.surface.is_eliminated(&c.name()) {
            continue;
        }
        let f = Expr::sym(&c.name());
        let lhs = red.evolve(&f)?;
        let rhs = red.surface.restrict(&table.bracket(g, &f))?;
        if !(lhs - rhs).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
