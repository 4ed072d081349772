use thiserror::Error;

use crate::linalg::SolveError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Solve(#[from] SolveError),

    /// Path integration found a closed loop whose line integral does not vanish.
    #[error("{what} integration failed: closing edge {edge} misses by {residual:.3e} (sources at {sources:?})")]
    CycleMismatch {
        what: &'static str,
        edge: usize,
        residual: f64,
        /// Cells (stream) or dual cells (potential) carrying the offending source.
        sources: Vec<usize>,
    },

    #[error("divergence data is incompatible: area-weighted integral {integral:.3e}")]
    Incompatible { integral: f64 },

    #[error("forcing residual has nonzero curl {value:.3e} on dual cell {vertex}")]
    PressureCurl { vertex: usize, value: f64 },

    #[error("power iteration stagnated after {iterations} steps (history {history:?})")]
    Stagnation { iterations: usize, history: Vec<f64> },
}
