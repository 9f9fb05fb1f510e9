use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no nondegeneracy order m <= {cap} exists for this profile")]
    NoValidOrder { cap: usize },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("covering does not contain the neighborhood even with R0 = {r0:.3e}")]
    CoverageFailure { r0: f64 },

    #[error("grid size {0} is below the minimum of 8")]
    InvalidSize(usize),

    #[error("vector of length {got} does not match grid size {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("matrix decomposition failed: {0}")]
    DecompositionFailure(String),

    #[error("invalid mode: {0}")]
    InvalidMode(String),

    #[error("propagation routes disagree by {discrepancy:.3e} (relative) at t = {time:.6e}")]
    NonConvergence { time: f64, discrepancy: f64 },

    #[error("fit window holds {found} samples, at least {needed} required")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("dispersion envelope violated at t = {time:.6e} (ratio {ratio:.4})")]
    EnvelopeViolation { time: f64, ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NoValidOrder { .. } => "NoValidOrder",
            Error::DegenerateProfile(_) => "DegenerateProfile",
            Error::CoverageFailure { .. } => "CoverageFailure",
            Error::InvalidSize(_) => "InvalidSize",
            Error::SizeMismatch { .. } => "SizeMismatch",
            Error::DecompositionFailure(_) => "DecompositionFailure",
            Error::InvalidMode(_) => "InvalidMode",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::EnvelopeViolation { .. } => "EnvelopeViolation",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
        }
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::DecompositionFailure(e.to_string())
    }
}
