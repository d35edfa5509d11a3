use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mixing angle undefined for omega = delta = 0")]
    UndefinedMixingAngle,

    #[error("singular energy-shift estimate: {0}")]
    SingularShift(String),

    #[error("target state is not normalized (norm² = {0})")]
    UnnormalizedTarget(f64),

    #[error("integration window too small: drive at window edge is {ratio:e} of its peak")]
    WindowTooSmall { ratio: f64 },

    #[error("frequency must be {0}")]
    NegativeFrequency(&'static str),

    #[error("adiabaticity bound undefined for zero detuning")]
    ZeroDetuning,

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),

    #[error("step size underflow at t = {t} ps (dt = {dt:e} ps); the problem looks stiff")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("integration did not converge: {0}")]
    NotConverged(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty sweep grid")]
    EmptyGrid,
}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::CalibrationFailed(_) | Error::StepUnderflow { .. } | Error::NotConverged(_))
    }
}
