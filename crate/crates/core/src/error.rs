use thiserror::Error;

use crate::linalg::LinalgError;
use crate::sym::SymError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid system: {0}")]
    InvalidSpec(String),
    #[error("the velocity Hessian is degenerate (rank {rank} < {dim})")]
    DegenerateLagrangian { rank: usize, dim: usize },
    #[error("second-class constraint {label} = {expr} is not affine in any remaining coordinate")]
    UnresolvableSecondClass { label: String, expr: String },
    #[error("constraint {label} reduces to the nonzero constant {expr}; the system is inconsistent")]
    InconsistentConstraint { label: String, expr: String },
    #[error("{picture} reduction did not terminate within {budget} generation(s)")]
    GenerationBudgetExceeded { picture: String, budget: usize },
    #[error("Routh function is not affine in the free velocities: {0}")]
    NonlinearRouth(String),
    #[error("constraint bracket matrix is singular (rank {rank} of {size})")]
    SingularConstraintMatrix { rank: usize, size: usize },
    #[error("pictures disagree at {label}: {detail}")]
    EquivalenceFailure { label: String, detail: String },
    #[error("could not draw a sample avoiding side condition {0}")]
    SideConditionViolated(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
