use std::path::PathBuf;

/// Errors produced anywhere in the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("{path}: parse error at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(
        "zero count check failed at T = {t}: found {found} zeros, smooth estimate {expected:.3} \
         (a sign change was probably missed; refine the grid)"
    )]
    CountMismatch { t: f64, found: usize, expected: f64 },

    #[error("possible multiple zero or precision loss near t = {t}: |Z'| = {derivative:e}")]
    MultipleZero { t: f64, derivative: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("quadrature did not converge: best estimate {estimate}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("precision insufficient: {0}")]
    Precision(String),

    #[error(
        "combination {coeffs:?} evaluates to an interval containing zero: \
         sensational counterexample or precision failure"
    )]
    ZeroCombination { coeffs: Vec<i64> },

    #[error("search budget exceeded: {0}")]
    Budget(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        what,
        detail: detail.into(),
    }
}
