use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Direction of a trace that has no interior minimum in the searched window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
    /// Neither strictly increasing nor decreasing, but still without a bracket
    /// (flat or non-finite stretches).
    Flat,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infinite rate: {0}")]
    InfiniteRate(String),

    #[error("no interior minimum in window [{t_lo}, {t_hi}] (trace is {direction:?})")]
    NoMinimum {
        t_lo: f64,
        t_hi: f64,
        direction: Monotone,
    },

    #[error("quench time {tau_q} exceeds the closed-form validity bound {tau_star}")]
    ValidityExceeded { tau_q: f64, tau_star: f64 },

    #[error("integration failed at t = {t} (step {step:e}): {reason}")]
    IntegrationFailure { t: f64, step: f64, reason: String },

    #[error("insufficient data: {found} valid points in window, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("sweep produced no valid points")]
    EmptySweep,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
