use thiserror::Error;

/// Errors raised across the simulation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pressure {pressure} kPa outside [0, {supply}] kPa")]
    PressureOutOfRange { pressure: f64, supply: f64 },

    #[error("invalid calibration curve: {0}")]
    InvalidCalibration(String),

    #[error("calibration curve kind mismatch: expected {expected}, got {actual}")]
    CurveKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("setpoint {setpoint} outside reachable range [{min}, {max}]")]
    UnreachableSetpoint { setpoint: f64, min: f64, max: f64 },

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("degenerate polygon: {0}")]
    Degenerate(String),

    #[error("length {value} mm outside actuator range [{min}, {max}] mm")]
    LengthOutOfRange { value: f64, min: f64, max: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("unknown configuration `{0}`")]
    UnknownConfiguration(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
