use thiserror::Error;

/// Errors raised by the simulator and the parameter calculators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The dipole-dipole rate vanished (magic angle, zero dipole, or no DC field).
    #[error("dipole-dipole rate is zero: {0}")]
    ZeroRate(String),
    #[error("unknown level label `{0}`")]
    UnknownLabel(String),
    #[error("linear combination vanishes")]
    ZeroVector,
    #[error("states or operators live in different bases")]
    BasisMismatch,
    #[error("time {t} s lies outside the schedule [0, {total}] s")]
    InvalidTime { t: f64, total: f64 },
    #[error("non-finite amplitude after propagation")]
    NonFiniteAmplitude,
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    /// A molecule does not satisfy the rotational-superposition restrictions.
    #[error("rotational-scheme restriction ({clause}) violated: {reason}")]
    RestrictionViolation { clause: u8, reason: String },
    #[error("gate broke down: basis state |{state}> returns with amplitude {magnitude:.3}")]
    DegenerateGate { state: &'static str, magnitude: f64 },
    #[error("invalid separation spread: {0}")]
    InvalidSigma(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
