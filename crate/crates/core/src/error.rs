use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("imaginary residual {residual:e} exceeds tolerance (scale {scale:e}); model breaks inversion symmetry")]
    ImaginaryResidual { residual: f64, scale: f64 },

    #[error(
        "polarization component {component} is zero; anisotropic coupling cannot be evaluated"
    )]
    PolarizationSingularity { component: usize },

    #[error("matrix asymmetry {residual:e} exceeds tolerance")]
    Asymmetry { residual: f64 },

    #[error("unstable branch: eigenvalue {eigenvalue:e} is negative")]
    Instability { eigenvalue: f64 },

    #[error("at k-point {k_index} (k = {k:?}): {source}")]
    AtWaveVector {
        k_index: usize,
        k: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("time step {dt:e} s too large: dt * max rate = {product:.3} (limit 0.1)")]
    StepSize { dt: f64, product: f64 },

    #[error("exact resonance at omega = {omega:e} rad/s with zero friction")]
    ExactResonance { omega: f64 },

    #[error("amplitude list violates A(k) = conj(A(-k)): residual {residual:e}")]
    RealityViolation { residual: f64 },

    #[error("velocity {velocity:e} m/s is not below the speed of light")]
    Superluminal { velocity: f64 },

    #[error("empty spectral window: lambda_min {lambda_min:e} m >= lambda_max {lambda_max:e} m")]
    EmptyWindow { lambda_min: f64, lambda_max: f64 },

    #[error("model failed validation: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive, got {value}"),
        ))
    }
}
