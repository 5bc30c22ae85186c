//! Running both pictures, comparing them, and checking the results at
//! sampled points.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamreduce::{run_hamiltonian, BracketTable, HamiltonianReduction};
use crate::lagreduce::{run_lagrangian, LagrangianReduction};
use crate::phasespace::{build_model, lagrangian_bracket, LagrangianSpec, PhaseSpaceModel};
use crate::reduction::{CandidateOutcome, Reduction};
use crate::report::{
    hamiltonian_report, lagrangian_report, ConstraintMatch, EquivalenceRecord, Pictures, Report,
    VarCorrespondence, VerificationSummary,
};
use crate::sym::{CoordKind, Evaluator, Expr, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PictureSelection {
    Lagrangian,
    Hamiltonian,
    Both,
}

#[derive(Clone, Debug)]
pub struct AnalysisRequest {
    pub spec: LagrangianSpec,
    pub picture: PictureSelection,
    pub max_generations: usize,
    pub verify_samples: usize,
    pub seed: u64,
}

impl AnalysisRequest {
    pub fn new(spec: LagrangianSpec) -> Self {
        AnalysisRequest {
            spec,
            picture: PictureSelection::Both,
            max_generations: 10,
            verify_samples: 16,
            seed: 0,
        }
    }
}

fn matches_in(red: &Reduction, e: &Expr) -> Result<bool> {
    Ok(!matches!(red.reducibility_check(e)?, CandidateOutcome::New(_)))
}

/// Pair the constraints of both pictures by label and check that each one
/// vanishes on the other picture's constraint surface.
pub fn cross_check(lag: &LagrangianReduction, ham: &HamiltonianReduction) -> Result<EquivalenceRecord> {
    let (l, h) = (&lag.reduction, &ham.reduction);
    let mut map = Vec::new();
    for c in h.constraints.iter().filter(|c| c.generation == 0) {
        let Some(r) = &c.resolution else { continue };
        if matches!(h.vars.coord(&r.variable), Some(x) if x.kind == CoordKind::V) {
            map.push(VarCorrespondence {
                lagrangian: r.variable.clone(),
                hamiltonian: r.solution.to_string(),
            });
        }
    }

    let mut labels: Vec<String> = l.constraints.iter().map(|c| c.label.clone()).collect();
    for c in &h.constraints {
        if !labels.contains(&c.label) {
            labels.push(c.label.clone());
        }
    }
    let mut constraints = Vec::new();
    let mut first_failure: Option<(String, String)> = None;
    for label in labels {
        let (lc, hc) = (l.constraint(&label), h.constraint(&label));
        let (matched, detail) = match (lc, hc) {
            (Some(a), Some(b)) => {
                let ok_l = matches_in(h, &a.expr)?;
                let ok_h = matches_in(l, &b.expr)?;
                let detail = if !ok_l {
                    format!("{} does not vanish on the Hamiltonian surface", a.expr)
                } else {
                    format!("{} does not vanish on the Lagrangian surface", b.expr)
                };
                (ok_l && ok_h, detail)
            }
            (Some(_), None) => (false, "present only in the Lagrangian picture".to_string()),
            _ => (false, "present only in the Hamiltonian picture".to_string()),
        };
        if !matched && first_failure.is_none() {
            first_failure = Some((label.clone(), detail));
        }
        constraints.push(ConstraintMatch {
            label,
            lagrangian: lc.map(|c| c.expr.to_string()).unwrap_or_default(),
            hamiltonian: hc.map(|c| c.expr.to_string()).unwrap_or_default(),
            matched,
        });
    }
    let termination_agrees = l.termination == h.termination;
    let undetermined_agrees = l.undetermined().len() == h.undetermined().len();
    if let Some((label, detail)) = first_failure {
        return Err(Error::EquivalenceFailure { label, detail });
    }
    if !termination_agrees {
        return Err(Error::EquivalenceFailure {
            label: "termination".into(),
            detail: format!("{:?} vs {:?}", l.termination, h.termination),
        });
    }
    if !undetermined_agrees {
        return Err(Error::EquivalenceFailure {
            label: "undetermined".into(),
            detail: format!("{:?} vs {:?}", l.undetermined(), h.undetermined()),
        });
    }
    Ok(EquivalenceRecord {
        map,
        constraints,
        termination_agrees,
        undetermined_agrees,
        matched: true,
    })
}

const RETRIES: usize = 64;

/// Quantities that must vanish on the final surface, grouped by check.
fn residual_exprs(
    model: &PhaseSpaceModel,
    red: &Reduction,
    table: Option<&BracketTable>,
) -> Result<Vec<(&'static str, Expr)>> {
    let full = red.full_surface()?;
    let mut out = Vec::new();
    let rate = |f: &Expr| -> Result<Vec<Expr>> {
        let f = red.surface.restrict(f)?;
        let mut v = vec![full.restrict(&red.drift.apply(&f))?];
        for d in &red.directions {
            v.push(full.restrict(&d.apply(&f))?);
        }
        Ok(v)
    };
    for e in rate(&model.energy)? {
        out.push(("energy", e));
    }
    for c in &red.constraints {
        for e in rate(&c.expr)? {
            out.push(("constraints", e));
        }
    }

    let kinds: &[CoordKind] = if table.is_some() {
        &[CoordKind::Q, CoordKind::P]
    } else {
        &[CoordKind::Q, CoordKind::V]
    };
    let xs: Vec<Expr> = red
        .vars
        .all_coords()
        .into_iter()
        .filter(|c| kinds.contains(&c.kind))
        .map(|c| Expr::sym(&c.name()))
        .collect();
    let bracket = |f: &Expr, g: &Expr| -> Result<Expr> {
        match table {
            Some(t) => Ok(t.bracket(f, g)),
            None => lagrangian_bracket(model, f, g),
        }
    };
    if table.is_none() && model.hessian_cert.rank < model.dim() {
        return Ok(out);
    }
    let n = xs.len();
    let mut b = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = bracket(&xs[i], &xs[j])?;
        }
    }
    for i in 0..n {
        for j in i..n {
            out.push(("antisymmetry", full.restrict(&(&b[i][j] + &b[j][i]))?));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let s = bracket(&xs[i], &b[j][k])?
                    + bracket(&xs[j], &b[k][i])?
                    + bracket(&xs[k], &b[i][j])?;
                out.push(("jacobi", full.restrict(&s)?));
            }
        }
    }
    Ok(out)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(-40..=40);
    let den: i64 = rng.gen_range(1..=9);
    Rational::new(num.into(), den.into())
}

/// Evaluate conservation, constraint preservation and bracket identities at
/// random points of the final surface. Returns the largest residual per
/// check.
pub fn numeric_verify(
    model: &PhaseSpaceModel,
    red: &Reduction,
    table: Option<&BracketTable>,
    samples: usize,
    seed: u64,
) -> Result<BTreeMap<String, f64>> {
    let mut maxima: BTreeMap<String, f64> = BTreeMap::new();
    if samples == 0 {
        return Ok(maxima);
    }
    let exprs = residual_exprs(model, red, table)?;
    let full = red.full_surface()?;
    let mut conditions = Vec::new();
    for c in red
        .side_conditions
        .iter()
        .chain(full.solved.iter().map(|s| &s.side_condition))
    {
        let r = full.restrict(c)?;
        if r.is_zero() {
            return Err(Error::SideConditionViolated(c.to_string()));
        }
        if !r.is_nonzero_literal() {
            conditions.push(r);
        }
    }
    let vars = model.vars();
    let mut names = BTreeSet::new();
    for e in exprs.iter().map(|(_, e)| e).chain(conditions.iter()) {
        for s in e.free_symbols() {
            if vars.coord(&s).is_some() || vars.is_param(&s) {
                names.insert(s);
            }
        }
    }
    for (k, _) in &exprs {
        maxima.insert(format!("{}.{k}", red.picture), 0.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut tries = 0;
        let values = loop {
            let ev = Evaluator::new(
                names
                    .iter()
                    .map(|n| (n.clone(), random_rational(&mut rng)))
                    .collect(),
            );
            let ok = conditions
                .iter()
                .all(|c| matches!(ev.eval(c), Ok(x) if !x.is_zero()));
            if ok {
                match exprs
                    .iter()
                    .map(|(k, e)| ev.eval(e).map(|x| (*k, x)))
                    .collect::<std::result::Result<Vec<_>, _>>()
                {
                    Ok(v) => break v,
                    Err(_) => {}
                }
            }
            tries += 1;
            if tries >= RETRIES {
                let which = conditions
                    .first()
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| "a denominator".into());
                return Err(Error::SideConditionViolated(which));
            }
        };
        for (k, x) in values {
            let r = x.abs().to_f64().unwrap_or(f64::INFINITY);
            let slot = maxima.entry(format!("{}.{k}", red.picture)).or_insert(0.0);
            if r > *slot {
                *slot = r;
            }
        }
    }
    Ok(maxima)
}

fn push_unique(v: &mut Vec<String>, s: String) {
    if !v.contains(&s) {
        v.push(s);
    }
}

/// Run the requested pictures, cross-check them when both ran, and verify
/// the final surfaces numerically.
pub fn analyze(req: &AnalysisRequest) -> Result<Report> {
    if req.max_generations == 0 {
        return Err(Error::InvalidSpec("generation budget must be at least 1".into()));
    }
    let model = build_model(req.spec.clone())?;
    let want_l = req.picture != PictureSelection::Hamiltonian;
    let want_h = req.picture != PictureSelection::Lagrangian;
    let lag = if want_l {
        Some(run_lagrangian(&model, req.max_generations)?)
    } else {
        None
    };
    let ham = if want_h {
        Some(run_hamiltonian(&model, req.max_generations)?)
    } else {
        None
    };
    let equivalence = match (&lag, &ham) {
        (Some(l), Some(h)) => Some(cross_check(l, h)?),
        _ => None,
    };

    let mut side_conditions = Vec::new();
    let mut warnings = Vec::new();
    let mut residuals = BTreeMap::new();
    let mut pictures = Pictures::default();
    if let Some(l) = &lag {
        let red = &l.reduction;
        for s in &red.side_conditions {
            push_unique(&mut side_conditions, s.to_string());
        }
        for w in &red.warnings {
            warnings.push(format!("lagrangian: {w}"));
        }
        residuals.extend(numeric_verify(&model, red, None, req.verify_samples, req.seed)?);
        pictures.lagrangian = Some(lagrangian_report(l)?);
    }
    if let Some(h) = &ham {
        let red = &h.reduction;
        for s in &red.side_conditions {
            push_unique(&mut side_conditions, s.to_string());
        }
        for w in &red.warnings {
            warnings.push(format!("hamiltonian: {w}"));
        }
        if !h.dirac_evolution_consistent {
            warnings.push("hamiltonian: evolution does not match the final Dirac bracket".into());
        }
        residuals.extend(numeric_verify(
            &model,
            red,
            Some(&h.table),
            req.verify_samples,
            req.seed,
        )?);
        pictures.hamiltonian = Some(hamiltonian_report(h, &model)?);
    }
    let max_residual = residuals.values().cloned().fold(0.0, f64::max);

    Ok(Report {
        system: req.spec.name.clone(),
        dim: req.spec.dim(),
        parameters: req
            .spec
            .parameters
            .iter()
            .map(|(n, v)| (n.clone(), v.as_ref().map(|q| q.to_string())))
            .collect(),
        side_conditions,
        pictures,
        equivalence,
        verification: VerificationSummary {
            samples: req.verify_samples,
            max_residual,
            residuals,
        },
        warnings,
    })
}
