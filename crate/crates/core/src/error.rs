use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigenvalue iteration did not converge for index {index}")]
    NoConvergence { index: usize },

    #[error("ODE step size underflow at tau = {tau} (step {step:.3e})")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("truncation dimension {required} needed, which exceeds the cap {cap}; lower the mean photon number")]
    DimensionCap { required: usize, cap: usize },

    #[error("pure-state QFI forms disagree: printed form {printed}, standard form {standard}")]
    PureFormMismatch { printed: f64, standard: f64 },

    #[error("negative quadrature probability {value:.3e} at x = {x}")]
    NegativeProbability { x: f64, value: f64 },

    #[error("quadrature integral not converged: {coarse} vs {fine} on grid doubling")]
    QuadratureNotConverged { coarse: f64, fine: f64 },

    #[error("{point}: {source}")]
    AtPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach the parameter point at which a computation failed.
    pub fn at(self, point: impl Into<String>) -> Self {
        Error::AtPoint { point: point.into(), source: Box::new(self) }
    }
}
