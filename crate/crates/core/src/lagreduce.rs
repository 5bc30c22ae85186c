//! Constraint analysis in the velocity picture: accelerations are the
//! multipliers and second-class primaries are solved for momenta.

use crate::error::Result;
use crate::phasespace::{evolution_field, PhaseSpaceModel};
use crate::reduction::{self, Drift, Picture, Reduction};
use crate::sym::Expr;

#[derive(Clone, Debug)]
pub struct LagrangianReduction {
    pub reduction: Reduction,
    /// Energy restricted to the final surface.
    pub energy_on_surface: Expr,
}

pub fn run_lagrangian(model: &PhaseSpaceModel, max_generations: usize) -> Result<LagrangianReduction> {
    let drift = Drift::Field(evolution_field(model).drift);
    let reduction = reduction::run(model, Picture::Lagrangian, drift, max_generations)?;
    let energy_on_surface = reduction.surface.restrict(&model.energy)?;
    Ok(LagrangianReduction {
        reduction,
        energy_on_surface,
    })
}
