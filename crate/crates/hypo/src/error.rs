use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential is not Morse: critical point at q = {q} has |V''| = {vpp}")]
    NonMorse { q: f64, vpp: f64 },
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("no spectral gap: ratio {ratio} below {required}")]
    NoGap { ratio: f64, required: f64 },
    #[error("factorization singular at pivot {0}")]
    FactorizationSingular(usize),
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("contour quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
    #[error("contour integral for the semigroup did not converge: {0}")]
    ContourNotConverged(String),
    #[error("count mismatch: projector rank {rank}, expected {expected}")]
    CountMismatch { rank: usize, expected: usize },
    #[error("r-form not definite on the characteristic space (min eigenvalue {0})")]
    RFormNotPositive(f64),
    #[error("perpendicular solve ill-conditioned (estimate {0:e})")]
    PerpSolveIllConditioned(f64),
    #[error("z = {0} is too close to the spectrum")]
    NearSpectrum(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("lapack: {0}")]
    Lapack(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Lapack(e.to_string())
    }
}

impl Error {
    /// Variant name, for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMorse { .. } => "NonMorse",
            Error::CutoffTooSmall(_) => "CutoffTooSmall",
            Error::NoGap { .. } => "NoGap",
            Error::FactorizationSingular(_) => "FactorizationSingular",
            Error::NotConverged(_) => "NotConverged",
            Error::QuadratureNotConverged(_) => "QuadratureNotConverged",
            Error::ContourNotConverged(_) => "ContourNotConverged",
            Error::CountMismatch { .. } => "CountMismatch",
            Error::RFormNotPositive(_) => "RFormNotPositive",
            Error::PerpSolveIllConditioned(_) => "PerpSolveIllConditioned",
            Error::NearSpectrum(_) => "NearSpectrum",
            Error::Dimension(_) => "Dimension",
            Error::Lapack(_) => "Lapack",
        }
    }
}
