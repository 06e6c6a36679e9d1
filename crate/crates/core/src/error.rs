use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, problem, or scheme parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sampled function returned a non-finite value.
    #[error("sampling produced a non-finite value at node ({i}, {j})")]
    Sampling { i: usize, j: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular band system: zero pivot at row {row}")]
    Singular { row: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Fixed-point iteration for an implicit sub-step did not reach tolerance.
    #[error("Picard iteration did not converge at t = {time} after {iterations} iterations (last update {last_update:e})")]
    PicardDivergence {
        time: f64,
        iterations: usize,
        last_update: f64,
        trace: Vec<f64>,
    },

    /// A non-finite value appeared while stepping.
    #[error("instability detected at step {step} (t = {time})")]
    Instability { step: usize, time: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// True for failures of the numerical method itself (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PicardDivergence { .. } | Error::Instability { .. } | Error::Singular { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
