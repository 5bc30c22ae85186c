//! Constraint analysis for degenerate Lagrangian systems.

pub mod sym;
pub mod linalg;
pub mod error;
pub mod phasespace;

pub use error::{Error, Result};
pub mod hamreduce;
pub mod lagreduce;
pub mod reduction;
pub mod input;
pub mod report;
pub mod analysis;
