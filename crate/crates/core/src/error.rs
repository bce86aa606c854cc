//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("degenerate capacitive network")]
    DegenerateCapacitance,

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("basis error: {0}")]
    Basis(String),

    #[error("Hilbert space dimension {dim} exceeds guard {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("eigensolver failed to converge: {0}")]
    SolverNonConvergence(String),

    #[error("integrator error: {0}")]
    Integrator(String),

    #[error("evolutionary search error: {0}")]
    Evolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
