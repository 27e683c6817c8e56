use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("evaluation at s = 0 hits the integrator pole")]
    ZeroFrequency,

    #[error("frequency grid must be positive and strictly increasing")]
    BadFrequencyGrid,

    #[error("gauge scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("mesh too coarse: every count must be at least {min}, got {got}")]
    MeshTooCoarse { min: usize, got: usize },

    #[error("shift s = {0} is (numerically) an eigenvalue of the state matrix")]
    SingularShift(num_complex::Complex64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite impedance at {freq_hz} Hz")]
    NonFinite { freq_hz: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
