//! Error type shared by every module.

use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("generator {generator} is not supported on the truncation: {reason}")]
    UnsupportedGenerator { generator: usize, reason: String },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("fit failed: best certified error {best_error:e} exceeds target {target:e} ({detail})")]
    FitFailure {
        best_error: f64,
        target: f64,
        detail: String,
    },
    #[error("block realization failed: {0}")]
    Realization(String),
    #[error("stage {stage}: {source}")]
    Stage { stage: usize, source: Box<Error> },
    #[error("construction failed: inequality `{inequality}` has no admissible witness ({detail})")]
    Construction { inequality: String, detail: String },
    #[error("window error: {0}")]
    Window(String),
    #[error("enumeration exceeds cap: {0}")]
    SizeCap(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("freeness violation: {0}")]
    FreenessViolation(String),
    #[error("density defect: {0}")]
    DensityDefect(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_stage(self, stage: usize) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
