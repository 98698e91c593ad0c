use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("jet order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("jets need an even, positive number of formal variables (got {0})")]
    InvalidVariableCount(usize),

    #[error("jet layouts differ: {0}")]
    LayoutMismatch(String),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("constant term of the jet vanishes")]
    VanishingConstantTerm,

    #[error("constant term {re}+{im}i has non-positive real part")]
    NonpositiveConstantTerm { re: f64, im: f64 },

    #[error("derivative of total order {requested} requested from a jet of order {order}")]
    OrderExceeded { requested: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("group has {size} elements, more than the supported {max}")]
    GroupTooLarge { size: usize, max: usize },

    #[error("point with |z| = {radius} lies outside the admissible ball")]
    PointOutsideBall { radius: f64 },

    #[error("kernel value {value} is not positive")]
    NonpositiveKernel { value: f64 },

    #[error("metric determinant {value} is not positive")]
    NonpositiveMetricDet { value: f64 },

    #[error("metric is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: f64 },

    #[error("J operator value {value} is not positive")]
    NonpositiveJ { value: f64 },

    #[error("Fefferman step index {step} outside 2..={max}")]
    InvalidStep { step: usize, max: usize },

    #[error("Fefferman denominator vanishes for step {step}")]
    DivisionByZeroDenominator { step: usize },

    #[error("numeric consistency violated: {0}")]
    NumericConsistency(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("finite-difference step {0} outside [1e-8, 1e-2]")]
    InvalidFdStep(f64),

    #[error("stencil evaluation failed: {0}")]
    EvaluationFailed(Box<Error>),

    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Errors that signal a numerical breakdown at a particular point rather
    /// than a malformed request.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericConsistency(_)
                | Error::NonpositiveConstantTerm { .. }
                | Error::VanishingConstantTerm
                | Error::NonpositiveKernel { .. }
                | Error::NonpositiveMetricDet { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NonpositiveJ { .. }
        )
    }
}
