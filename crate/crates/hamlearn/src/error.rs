use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Mismatched vector/phase-space dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid argument outside dimension issues.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Lookup of an unknown built-in system.
    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    /// Point lies outside the basis domain under the strict policy.
    #[error("point outside basis domain: {0}")]
    Domain(String),

    /// Index-set size does not fit in memory/usize.
    #[error("index set too large: {0}")]
    Capacity(String),

    /// Non-finite value during time integration.
    #[error("integration failed at t = {time} (step {step}): {reason}")]
    Integration {
        time: f64,
        step: usize,
        reason: String,
    },

    /// Rank-deficient Gram/design matrix.
    #[error("rank-deficient operator: {0}")]
    RankDeficient(String),

    /// Least-squares problem with no usable spectrum.
    #[error("degenerate least-squares problem: {0}")]
    Degenerate(String),

    /// No data pairs left to work with.
    #[error("empty data set: {0}")]
    EmptyData(String),

    /// File system failure.
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed interchange file.
    #[error("parse failure in {path} (line {line}): {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}
