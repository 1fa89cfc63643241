use thiserror::Error;

/// Failures raised by the geometric kernels.
///
/// Every variant has a stable kebab-case name (see [`ReflectorError::name`])
/// which the command-line front end prints next to exit code 3.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReflectorError {
    #[error("unsupported sphere dimension {0}; only n = 1 and n = 2 are implemented")]
    UnsupportedDimension(u32),
    #[error("direction lies within the singularity guard of the paraboloid axis")]
    AxisSingularity,
    #[error("operation is undefined for an improper paraboloid (infinite focal parameter)")]
    ImproperParaboloid,
    #[error("degenerate focal parameter {0}; it must be positive")]
    DegenerateFocalParameter(f64),
    #[error("objective returned a non-finite value ({0})")]
    NumericalEvaluation(f64),
    #[error("unbounded reflector: {0}")]
    UnboundedReflector(String),
    #[error("degenerate reflector: {0}")]
    DegenerateReflector(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no nonnegative decomposition found (residual {residual:.3e})")]
    DecompositionFailure { residual: f64 },
    #[error("axis does not support the reflector at the given point (relative gap {gap:.3e})")]
    NotSupporting { gap: f64 },
    #[error("focal function is not evaluable at direction {0:?}")]
    NotEvaluable([f64; 3]),
    #[error("mixed-sign coefficients are not covered by the refined inequality")]
    UnsupportedCase,
    #[error("orientation error: <x, u> = {0} must be positive")]
    Orientation(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl ReflectorError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UnsupportedDimension(_) => "unsupported-dimension",
            Self::AxisSingularity => "axis-singularity",
            Self::ImproperParaboloid => "improper-paraboloid",
            Self::DegenerateFocalParameter(_) => "degenerate-focal-parameter",
            Self::NumericalEvaluation(_) => "numerical-evaluation",
            Self::UnboundedReflector(_) => "unbounded-reflector",
            Self::DegenerateReflector(_) => "degenerate-reflector",
            Self::InvalidInput(_) => "invalid-input",
            Self::DecompositionFailure { .. } => "decomposition-failure",
            Self::NotSupporting { .. } => "not-supporting",
            Self::NotEvaluable(_) => "not-evaluable",
            Self::UnsupportedCase => "unsupported-case",
            Self::Orientation(_) => "orientation",
            Self::InsufficientData(_) => "insufficient-data",
        }
    }
}

pub type Result<T> = std::result::Result<T, ReflectorError>;
