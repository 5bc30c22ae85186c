//! Serializable analysis reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::hamreduce::HamiltonianReduction;
use crate::lagreduce::LagrangianReduction;
use crate::phasespace::{ConstraintClass, PhaseSpaceModel};
use crate::reduction::{CandidateOutcome, Reduction, Termination};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub system: String,
    pub dim: usize,
    /// Parameter values in effect; `null` for symbolic parameters.
    pub parameters: BTreeMap<String, Option<String>>,
    pub side_conditions: Vec<String>,
    pub pictures: Pictures,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceRecord>,
    pub verification: VerificationSummary,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pictures {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<PictureReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<PictureReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PictureReport {
    pub generations: Vec<GenerationReport>,
    pub determined: Determined,
    pub termination: Termination,
    /// Multipliers left free at the end.
    pub undetermined: Vec<String>,
    pub evolution_field: BTreeMap<String, String>,
    pub first_class: Vec<String>,
    pub second_class: Vec<String>,
    pub side_conditions: Vec<String>,
    pub energy_on_surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    pub rank: usize,
    pub constraints: Vec<ConstraintReport>,
    /// Multipliers fixed at this generation, on the surface reached so far.
    pub determined: BTreeMap<String, String>,
    pub candidates: Vec<CandidateReport>,
    pub side_conditions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub label: String,
    pub expr: String,
    pub class: ConstraintClass,
    pub resolution: Option<ResolutionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub variable: String,
    pub solution: String,
    pub side_condition: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub parent: String,
    pub expr: String,
    pub outcome: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Determined {
    pub velocities: BTreeMap<String, String>,
    pub accelerations: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianData {
    pub h: String,
    pub h_total: String,
    /// `p_μ − ψ_μ`, keyed by the free velocity.
    pub phi: BTreeMap<String, String>,
    pub dirac_stages: Vec<DiracStageReport>,
    pub dirac_evolution_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracStageReport {
    pub generation: usize,
    pub constraints: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarCorrespondence {
    pub lagrangian: String,
    pub hamiltonian: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintMatch {
    pub label: String,
    pub lagrangian: String,
    pub hamiltonian: String,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceRecord {
    pub map: Vec<VarCorrespondence>,
    pub constraints: Vec<ConstraintMatch>,
    pub termination_agrees: bool,
    pub undetermined_agrees: bool,
    pub matched: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub samples: usize,
    pub max_residual: f64,
    /// Largest residual per check, keyed `picture.check`.
    pub residuals: BTreeMap<String, f64>,
}

fn strings<'a>(it: impl IntoIterator<Item = &'a crate::sym::Expr>) -> Vec<String> {
    it.into_iter().map(|e| e.to_string()).collect()
}

fn outcome_name(o: &CandidateOutcome, red: &Reduction) -> String {
    match o {
        CandidateOutcome::Zero => "zero".into(),
        CandidateOutcome::Reducible => "reducible".into(),
        CandidateOutcome::ProbablyReducible => "probably reducible".into(),
        CandidateOutcome::New(i) => format!("new {}", red.constraints[*i].label),
    }
}

pub fn picture_report(red: &Reduction, energy_on_surface: String) -> crate::Result<PictureReport> {
    let mut generations = Vec::new();
    for rec in &red.generations {
        let constraints = red
            .constraints
            .iter()
            .filter(|c| c.generation == rec.generation)
            .map(|c| ConstraintReport {
                label: c.label.clone(),
                expr: c.expr.to_string(),
                class: c.class,
                resolution: c.resolution.as_ref().map(|r| ResolutionReport {
                    variable: r.variable.clone(),
                    solution: r.solution.to_string(),
                    side_condition: r.side_condition.to_string(),
                }),
                parent: c.parent.map(|j| red.constraints[j].label.clone()),
            })
            .collect();
        generations.push(GenerationReport {
            generation: rec.generation,
            rank: rec.certificate.rank,
            constraints,
            determined: rec
                .determined
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            candidates: rec
                .candidates
                .iter()
                .map(|c| CandidateReport {
                    parent: red.constraints[c.parent].label.clone(),
                    expr: c.expr.to_string(),
                    outcome: outcome_name(&c.outcome, red),
                })
                .collect(),
            side_conditions: strings(&rec.side_conditions),
        });
    }
    let field = red.field()?;
    Ok(PictureReport {
        generations,
        determined: Determined {
            velocities: red
                .determined_velocities()
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
            accelerations: red
                .determined
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string()))
                .collect(),
        },
        termination: red.termination,
        undetermined: red.undetermined(),
        evolution_field: field
            .drift
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
        first_class: red.first_class().iter().map(|c| c.label.clone()).collect(),
        second_class: red.second_class().iter().map(|c| c.label.clone()).collect(),
        side_conditions: strings(&red.side_conditions),
        energy_on_surface,
        hamiltonian: None,
    })
}

pub fn lagrangian_report(lag: &LagrangianReduction) -> crate::Result<PictureReport> {
    picture_report(&lag.reduction, lag.energy_on_surface.to_string())
}

pub fn hamiltonian_report(ham: &HamiltonianReduction, model: &PhaseSpaceModel) -> crate::Result<PictureReport> {
    let e = ham.reduction.surface.restrict(&model.energy)?;
    let mut r = picture_report(&ham.reduction, e.to_string())?;
    r.hamiltonian = Some(HamiltonianData {
        h: ham.routh.h.to_string(),
        h_total: ham.routh.h_total.to_string(),
        phi: ham
            .routh
            .phi
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
        dirac_stages: ham
            .table
            .stages
            .iter()
            .map(|s| DiracStageReport {
                generation: s.generation,
                constraints: s.labels.clone(),
                matrix: s.matrix.to_strings(),
            })
            .collect(),
        dirac_evolution_consistent: ham.dirac_evolution_consistent,
    });
    Ok(r)
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }

    /// Generation-by-generation narrative.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "system {} (N = {})", self.system, self.dim);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "  parameter {k} = {}", v.as_deref().unwrap_or("symbolic"));
        }
        for (name, pic) in [
            ("Lagrangian", &self.pictures.lagrangian),
            ("Hamiltonian", &self.pictures.hamiltonian),
        ] {
            if let Some(p) = pic {
                render_picture(&mut out, name, p);
            }
        }
        if let Some(eq) = &self.equivalence {
            let _ = writeln!(out, "\nequivalence: {}", if eq.matched { "matched" } else { "MISMATCH" });
            for m in &eq.map {
                let _ = writeln!(out, "  {} <-> {}", m.lagrangian, m.hamiltonian);
            }
            for c in &eq.constraints {
                let _ = writeln!(
                    out,
                    "  {}: {}  ~  {}{}",
                    c.label,
                    c.lagrangian,
                    c.hamiltonian,
                    if c.matched { "" } else { "  (no match)" }
                );
            }
        }
        if !self.side_conditions.is_empty() {
            let _ = writeln!(out, "\nassumed nonzero:");
            for s in &self.side_conditions {
                let _ = writeln!(out, "  {s} != 0");
            }
        }
        let _ = writeln!(
            out,
            "\nverification: {} sample(s), max residual {:e}",
            self.verification.samples, self.verification.max_residual
        );
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn render_picture(out: &mut String, name: &str, p: &PictureReport) {
    let _ = writeln!(out, "\n== {name} picture");
    if let Some(h) = &p.hamiltonian {
        let _ = writeln!(out, "h   = {}", h.h);
        let _ = writeln!(out, "h_T = {}", h.h_total);
    }
    for g in &p.generations {
        let _ = writeln!(out, "generation {} (rank {})", g.generation, g.rank);
        for c in &g.constraints {
            let class = match c.class {
                ConstraintClass::Second => "second class",
                ConstraintClass::First => "first class",
                ConstraintClass::Undecided => "undecided",
            };
            let _ = write!(out, "  {} = {}  [{class}]", c.label, c.expr);
            if let Some(r) = &c.resolution {
                let _ = write!(out, "  => {} = {}", r.variable, r.solution);
            }
            out.push('\n');
        }
        for (k, v) in &g.determined {
            let _ = writeln!(out, "  {k} = {v}");
        }
        for c in &g.candidates {
            let _ = writeln!(out, "  d/dt {} -> {} ({})", c.parent, c.expr, c.outcome);
        }
        for s in &g.side_conditions {
            let _ = writeln!(out, "  assuming {s} != 0");
        }
    }
    if let Some(h) = &p.hamiltonian {
        for s in &h.dirac_stages {
            let _ = writeln!(out, "Dirac bracket stage at generation {}: {}", s.generation, s.constraints.join(", "));
        }
    }
    let _ = writeln!(out, "termination: {:?}", p.termination);
    if !p.undetermined.is_empty() {
        let _ = writeln!(out, "free multipliers: {}", p.undetermined.join(", "));
    }
    let _ = writeln!(out, "evolution:");
    for (x, v) in &p.evolution_field {
        let _ = writeln!(out, "  d{x}/dt = {v}");
    }
    let _ = writeln!(out, "energy on the final surface: {}", p.energy_on_surface);
}
