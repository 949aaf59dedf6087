use crate::numfmt::sig12;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A domain invariant was violated; `path` names the offending field.
    #[error("{path}: {reason}")]
    Invariant { path: String, reason: String },

    #[error("insufficient moments: {what} lacks {moment}")]
    InsufficientMoments { what: String, moment: &'static str },

    #[error("no adversarial uncertainty: variance of the uncompromised sum is zero, use standard DP")]
    NoUncertainty,

    #[error("no randomness at all: data variance and noise variance are both zero")]
    NoRandomness,

    #[error("tail dominates: δ too small for this (n, p); minimal admissible δ is {}", sig12(*min_delta))]
    TailDominates { min_delta: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fewer than 2 uncompromised records")]
    TooManyCompromised,

    #[error("instance too large for exact oracle ({points} support points, cap {cap}), use mc_estimate")]
    OracleTooLarge { points: usize, cap: usize },

    #[error("record group {group} has no exact law ({family}); the exact oracle needs finite discrete supports")]
    NotEnumerable { group: usize, family: &'static str },

    #[error("δ not improvable by noise in this tool: target δ {} is below the bound's δ {}", sig12(*target), sig12(*achieved))]
    DeltaNotImprovable { target: f64, achieved: f64 },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config schema violation: {0}")]
    ConfigSchema(String),
}

impl Error {
    pub(crate) fn invariant(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
