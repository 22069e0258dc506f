use std::path::PathBuf;

use thiserror::Error;

use crate::estimation::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("rank {rank} outside 1..={n}")]
    InvalidRank { rank: usize, n: usize },

    #[error("invalid rank-size series: {0}")]
    InvalidSeries(String),

    #[error("stratum {stratum:?} has {n} units, fewer than the minimum of {min}")]
    StratumTooSmall {
        stratum: String,
        n: usize,
        min: usize,
    },

    /// Every restart failed; carries the best terminal point found.
    #[error("optimizer did not converge (best a={:.6}, b={:.6})", best.params.a(), best.params.b())]
    NonConvergence { best: Box<FitResult> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("uncertainty percentage undefined for n={n} (needs n >= 2)")]
    UndefinedUp { n: usize },

    #[error("records are not comparable: {0}")]
    Comparison(String),

    #[error("indicator {indicator} undefined for unit {unit:?}: {reason}")]
    IndicatorUndefined {
        unit: String,
        indicator: String,
        reason: String,
    },

    #[error("stratum {stratum:?} excluded: {reason}")]
    Excluded { stratum: String, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("header error: {0}")]
    Header(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the filesystem rather than the content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::File { .. } | Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Json(e) => e.is_io(),
            _ => false,
        }
    }
}
