use thiserror::Error;

/// Errors raised by state construction, marginal handling and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid party signature: {0}")]
    InvalidSignature(String),

    #[error("party subset is empty")]
    EmptySubset,

    #[error("party index {index} out of range for {parties} parties")]
    IndexOutOfRange { index: usize, parties: usize },

    #[error("party subset {0:?} is not strictly increasing")]
    UnsortedSubset(Vec<usize>),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("state is not normalized (norm or trace {0})")]
    NotNormalized(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("environment dimension {env_dim} is smaller than rank {rank}")]
    EnvTooSmall { env_dim: usize, rank: usize },

    #[error("identity coefficient must be 1, got {0}")]
    BadNormalization(f64),

    #[error("operation requires {expected}, got dims {got:?}")]
    WrongSignature { expected: &'static str, got: Vec<usize> },

    #[error("number of parties must be even, got {0}")]
    OddN(usize),

    #[error("number of parties must be odd, got {0}")]
    EvenN(usize),

    #[error("parties must share one local dimension, got {0:?}")]
    NotEquidimensional(Vec<usize>),

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("coefficient slots neither known nor unknown: {0:?}")]
    CoverageGap(Vec<String>),

    #[error("coefficient slots both known and unknown: {0:?}")]
    Overlap(Vec<String>),

    #[error("integer overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum is degenerate (gap {gap:.3e} between nonzero eigenvalues)")]
    DegenerateSpectrum { gap: f64 },

    #[error("spectra do not match (deviation {0:.3e}); no pure state has these marginals")]
    SpectraMismatch(f64),

    #[error("phase blocks are inconsistent (residual {0:.3e}); no pure state has these marginals")]
    PhaseInconsistent(f64),

    #[error("no alternative state found ({0})")]
    NotFound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
