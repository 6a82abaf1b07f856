use thiserror::Error;

use crate::hilbert::ModeLayout;
use crate::tuneup::ChevronFitResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("layout mismatch: {0:?} vs {1:?}")]
    LayoutMismatch(ModeLayout, ModeLayout),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate quantization axis: {0}")]
    DegenerateAxis(String),

    #[error("invalid quantum numbers: {0}")]
    QuantumNumbers(String),

    #[error("time {t} µs outside [0, {duration}] µs")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("chevron fit did not converge after {iterations} iterations")]
    FitNotConverged {
        iterations: usize,
        best: Box<ChevronFitResult>,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("tune-up loop exceeded {0} iterations")]
    IterationCap(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Layout(_) | Error::InvalidArgument(_) | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
