//! The system on the extended space of positions, velocities and momenta.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{generic_rank, invert, RankCertificate, SymMatrix};
use crate::sym::{differentiate, substitute, CoordKind, Expr, Rational, VarTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagrangianSpec {
    pub name: String,
    pub vars: VarTable,
    pub lagrangian: Expr,
    /// Declared parameters with their values, if fixed.
    pub parameters: Vec<(String, Option<Rational>)>,
}

impl LagrangianSpec {
    pub fn dim(&self) -> usize {
        self.vars.dim
    }

    /// The Lagrangian with every fixed parameter substituted.
    pub fn effective_lagrangian(&self) -> Result<Expr> {
        let bindings: BTreeMap<String, Expr> = self
            .parameters
            .iter()
            .filter_map(|(n, v)| v.as_ref().map(|q| (n.clone(), Expr::rational(q.clone()))))
            .collect();
        Ok(substitute(&self.lagrangian, &bindings)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintClass {
    Second,
    First,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub variable: String,
    pub solution: Expr,
    pub side_condition: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub expr: Expr,
    pub generation: usize,
    pub label: String,
    /// Index of the primary constraint this one descends from (1-based).
    pub family: usize,
    pub class: ConstraintClass,
    pub resolution: Option<Resolution>,
    /// Index of the constraint whose consistency produced this one.
    pub parent: Option<usize>,
}

impl Constraint {
    pub fn primary(i: usize, expr: Expr) -> Constraint {
        Constraint {
            expr,
            generation: 0,
            label: format!("phi_{i}"),
            family: i,
            class: ConstraintClass::Undecided,
            resolution: None,
            parent: None,
        }
    }
}

/// A vertical direction whose coefficient is a free multiplier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Direction {
    pub multiplier: String,
    pub components: BTreeMap<String, Expr>,
}

impl Direction {
    pub fn apply(&self, f: &Expr) -> Expr {
        self.components
            .iter()
            .map(|(x, c)| c * differentiate(f, x))
            .sum()
    }
}

/// `drift + Σ multiplier · direction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub drift: BTreeMap<String, Expr>,
    pub directions: Vec<Direction>,
}

impl VectorField {
    pub fn apply_drift(&self, f: &Expr) -> Expr {
        self.drift.iter().map(|(x, c)| c * differentiate(f, x)).sum()
    }

    pub fn undetermined(&self) -> Vec<String> {
        self.directions.iter().map(|d| d.multiplier.clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct PhaseSpaceModel {
    pub spec: LagrangianSpec,
    /// Lagrangian with fixed parameters substituted.
    pub lagrangian: Expr,
    pub energy: Expr,
    pub hessian: SymMatrix,
    pub hessian_cert: RankCertificate,
    pub primary: Vec<Constraint>,
}

impl PhaseSpaceModel {
    pub fn vars(&self) -> &VarTable {
        &self.spec.vars
    }

    pub fn dim(&self) -> usize {
        self.spec.vars.dim
    }
}

pub fn q(i: usize) -> String {
    format!("q{i}")
}

pub fn v(i: usize) -> String {
    format!("v{i}")
}

pub fn p(i: usize) -> String {
    format!("p{i}")
}

pub fn acc(i: usize) -> String {
    format!("vdot{i}")
}

pub fn build_model(spec: LagrangianSpec) -> Result<PhaseSpaceModel> {
    let n = spec.dim();
    let l = spec.effective_lagrangian()?;
    for i in 1..=n {
        if l.mentions(&p(i)) {
            return Err(Error::InvalidSpec(format!(
                "the Lagrangian mentions momentum {}",
                p(i)
            )));
        }
    }
    let pv: Expr = (1..=n).map(|i| Expr::sym(&p(i)) * Expr::sym(&v(i))).sum();
    let energy = pv - &l;
    let dl: Vec<Expr> = (1..=n).map(|i| differentiate(&l, &v(i))).collect();
    let hessian = SymMatrix::from_fn(n, n, |i, j| differentiate(&dl[i], &v(j + 1)));
    let hessian_cert = generic_rank(&hessian);
    let primary: Vec<Constraint> = (1..=n)
        .map(|i| Constraint::primary(i, Expr::sym(&p(i)) - &dl[i - 1]))
        .collect();
    let model = PhaseSpaceModel {
        spec,
        lagrangian: l,
        energy,
        hessian,
        hessian_cert,
        primary,
    };
    let via_form = vertical_differential(&model, &model.energy);
    for (c, (_, w)) in model.primary.iter().zip(via_form.iter()) {
        if !(&c.expr - w).is_zero() {
            return Err(Error::Internal(format!(
                "primary constraint {} disagrees with dE on the kernel",
                c.label
            )));
        }
    }
    Ok(model)
}

pub fn primary_constraints(model: &PhaseSpaceModel) -> Vec<Constraint> {
    model.primary.clone()
}

/// Components `∂f/∂vⁱ`, keyed by velocity name.
pub fn vertical_differential(model: &PhaseSpaceModel, f: &Expr) -> BTreeMap<String, Expr> {
    (1..=model.dim())
        .map(|i| (v(i), differentiate(f, &v(i))))
        .collect()
}

/// `Y + Σ vdotⁱ ∂/∂vⁱ` with `Y = vⁱ∂/∂qⁱ + ∂ℓ/∂qⁱ ∂/∂pᵢ`.
pub fn evolution_field(model: &PhaseSpaceModel) -> VectorField {
    let mut drift = BTreeMap::new();
    for i in 1..=model.dim() {
        drift.insert(q(i), Expr::sym(&v(i)));
        let f = differentiate(&model.lagrangian, &q(i));
        if !f.is_zero() {
            drift.insert(p(i), f);
        }
    }
    let directions = (1..=model.dim())
        .map(|i| Direction {
            multiplier: acc(i),
            components: BTreeMap::from([(v(i), Expr::one())]),
        })
        .collect();
    VectorField { drift, directions }
}

/// `{f,g} = Σ ∂f/∂pᵢ ∂g/∂qⁱ − ∂f/∂qⁱ ∂g/∂pᵢ`, so that `ḟ = {E, f}`.
pub fn poisson_bracket(vars: &VarTable, f: &Expr, g: &Expr) -> Expr {
    let mut total = Expr::zero();
    for c in vars.coords_of(CoordKind::Q) {
        let (qi, pi) = (q(c.index), p(c.index));
        let a = differentiate(f, &pi);
        if !a.is_zero() {
            total = total + a * differentiate(g, &qi);
        }
        let b = differentiate(f, &qi);
        if !b.is_zero() {
            total = total - b * differentiate(g, &pi);
        }
    }
    total
}

/// `(Γ, M)` with `M_ij = ∂²ℓ/∂qⁱ∂vʲ − ∂²ℓ/∂vⁱ∂qʲ`.
pub fn lagrangian_two_form(model: &PhaseSpaceModel) -> (SymMatrix, SymMatrix) {
    let n = model.dim();
    let l = &model.lagrangian;
    let m = SymMatrix::from_fn(n, n, |i, j| {
        differentiate(&differentiate(l, &q(i + 1)), &v(j + 1))
            - differentiate(&differentiate(l, &v(i + 1)), &q(j + 1))
    });
    (model.hessian.clone(), m)
}

/// Bracket on the velocity phase space of a regular Lagrangian.
pub fn lagrangian_bracket(model: &PhaseSpaceModel, f: &Expr, g: &Expr) -> Result<Expr> {
    let n = model.dim();
    if model.hessian_cert.rank < n {
        return Err(Error::DegenerateLagrangian {
            rank: model.hessian_cert.rank,
            dim: n,
        });
    }
    let (gamma, m) = lagrangian_two_form(model);
    let ginv = invert(&gamma)?;
    let minv = ginv.mul(&m)?.mul(&ginv)?;
    let fv: Vec<Expr> = (1..=n).map(|i| differentiate(f, &v(i))).collect();
    let fq: Vec<Expr> = (1..=n).map(|i| differentiate(f, &q(i))).collect();
    let gv: Vec<Expr> = (1..=n).map(|i| differentiate(g, &v(i))).collect();
    let gq: Vec<Expr> = (1..=n).map(|i| differentiate(g, &q(i))).collect();
    let mut total = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            let w = ginv.get(i, j);
            if !w.is_zero() {
                total = total + w * (&fv[i] * &gq[j] - &fq[i] * &gv[j]);
            }
            let mm = minv.get(i, j);
            if !mm.is_zero() {
                total = total - mm * &fv[i] * &gv[j];
            }
        }
    }
    Ok(total)
}

/// Energy as a function on velocity space, `vⁱ ∂ℓ/∂vⁱ − ℓ`.
pub fn velocity_energy(model: &PhaseSpaceModel) -> Expr {
    let l = &model.lagrangian;
    let s: Expr = (1..=model.dim())
        .map(|i| Expr::sym(&v(i)) * differentiate(l, &v(i)))
        .sum();
    s - l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym::parse;

    fn spec(n: usize, l: &str, funcs: &[&str]) -> LagrangianSpec {
        let vars = VarTable::new(n, vec![], funcs.iter().map(|s| s.to_string()).collect()).unwrap();
        LagrangianSpec {
            name: "t".into(),
            lagrangian: parse(l, &vars).unwrap(),
            vars,
            parameters: vec![],
        }
    }

    #[test]
    fn canonical_pair() {
        let vars = VarTable::new(2, vec![], vec![]).unwrap();
        let b = poisson_bracket(&vars, &Expr::sym("p1"), &Expr::sym("q1"));
        assert_eq!(b, Expr::one());
        assert!(poisson_bracket(&vars, &Expr::sym("p2"), &Expr::sym("q1")).is_zero());
    }

    #[test]
    fn zero_lagrangian() {
        let m = build_model(spec(1, "0", &[])).unwrap();
        assert_eq!(m.energy, Expr::sym("p1") * Expr::sym("v1"));
        assert!(m.hessian.is_zero());
        assert_eq!(m.primary[0].expr, Expr::sym("p1"));
        let y = evolution_field(&m);
        assert_eq!(y.drift.len(), 1);
        assert_eq!(y.undetermined(), vec!["vdot1".to_string()]);
    }

    #[test]
    fn regular_bracket_gives_motion() {
        let m = build_model(spec(1, "v1^2/2 - U(q1)", &["U"])).unwrap();
        let (v1, q1) = (Expr::sym("v1"), Expr::sym("q1"));
        assert_eq!(lagrangian_bracket(&m, &v1, &q1).unwrap(), Expr::one());
        let e = velocity_energy(&m);
        assert_eq!(lagrangian_bracket(&m, &e, &q1).unwrap(), v1);
        let vdot = lagrangian_bracket(&m, &e, &v1).unwrap();
        assert_eq!(vdot, -Expr::func("U", 1, q1));
    }

    #[test]
    fn degenerate_bracket_rejected() {
        let m = build_model(spec(1, "q1*v1", &[])).unwrap();
        assert!(matches!(
            lagrangian_bracket(&m, &Expr::sym("q1"), &Expr::sym("v1")),
            Err(Error::DegenerateLagrangian { .. })
        ));
    }
}
