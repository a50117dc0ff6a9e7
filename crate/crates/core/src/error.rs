use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or scenario violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Operands with non-conforming shapes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed caller input (odd bit count, negative power, ...).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("Jacobi SVD of a {rows}x{cols} matrix did not converge within {sweeps} sweeps")]
    SvdNoConvergence { rows: usize, cols: usize, sweeps: usize },

    #[error("matrix of order {0} is not Hermitian positive definite")]
    NotPositiveDefinite(usize),

    /// The MSE-constrained power minimization has no solution within the budget.
    #[error("MSE cap {cap} is infeasible: best achievable MSE with the full budget is {best_mse}")]
    Infeasible { cap: f64, best_mse: f64 },

    #[error("the legitimate channel leaves no null space for artificial noise")]
    EmptyNullSpace,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
