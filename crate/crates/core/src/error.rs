use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("AR model is not stationary (largest root modulus {max_root_modulus})")]
    NonStationaryModel { max_root_modulus: f64 },

    #[error("linear system is numerically singular")]
    SingularSystem,

    #[error("lag {lag} exceeds the available maximum {max_lag}")]
    LagOutOfRange { lag: usize, max_lag: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("distortion {distortion} is not above the floor {floor}")]
    DistortionBelowFloor { distortion: f64, floor: f64 },

    #[error("codeword index {index} out of range for {levels} levels")]
    UnknownIndex { index: u32, levels: u32 },

    #[error("recursion did not converge within {steps} steps")]
    NonConvergence { steps: usize },

    #[error("steady state requires (1-lambda)^2 beta^2 < 1 with 0 < lambda <= 1 (lambda={lambda}, beta={beta})")]
    ContractionViolated { lambda: f64, beta: f64 },

    #[error("degenerate covariance: kappa(0) = {0}")]
    DegenerateCovariance(f64),

    #[error("spectral quadrature did not reach tolerance")]
    QuadratureFailure,

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
