use thiserror::Error;

use crate::linalg::LinalgError;

/// Every failure the library reports. Payloads are `f64` regardless of the
/// scalar type so the error stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NonFiniteEntry: {0} contains a non-finite value")]
    NonFiniteEntry(&'static str),
    #[error("ThetaNotAntisymmetric: max |Θ + Θᵀ| = {defect:e}")]
    ThetaNotAntisymmetric { defect: f64 },
    #[error("ThetaSingular: |det Θ| = {det:e}")]
    ThetaSingular { det: f64 },
    #[error("R0NotSymmetric: max |R₀ − R₀ᵀ| = {defect:e}")]
    R0NotSymmetric { defect: f64 },
    #[error("RingTooShort: N = {ring} must exceed 2d = {}", 2 * d)]
    RingTooShort { ring: usize, d: usize },
    #[error("NotOnUnitCircle: |z| = {modulus}")]
    NotOnUnitCircle { modulus: f64 },
    #[error("GridTooCoarse: K = {k} is below the minimum {min}")]
    GridTooCoarse { k: usize, min: usize },
    #[error("NotStable: worst abscissa {abscissa:e} at grid index {index}")]
    NotStable { abscissa: f64, index: usize },
    #[error("GridMismatch: spectrum has K = {k} points, expected {expected}")]
    GridMismatch { k: usize, expected: usize },
    #[error("NegativeTime: t = {0}")]
    NegativeTime(f64),
    #[error("NotOnRingGrid: frequency index {index} outside 0..{ring}")]
    NotOnRingGrid { index: usize, ring: usize },
    #[error("DegenerateDenominator: |det D| = {0:e}")]
    DegenerateDenominator(f64),
    #[error("A0NotHurwitz: abscissa {0:e}")]
    A0NotHurwitz(f64),
    #[error("NoCertificateFound: Riccati residual {residual:e} after {iterations} iterations")]
    NoCertificateFound { residual: f64, iterations: usize },
    #[error("NotOneMode: entanglement analysis needs n = 1, got n = {0}")]
    NotOneMode(usize),
    #[error("SamePair: node {0} paired with itself")]
    SamePair(usize),
    #[error("MinorViolation: principal minor {value:e} over indices {indices:?}")]
    MinorViolation { value: f64, indices: Vec<usize> },
    #[error("InvalidCovariance: V + iΘ₂ has eigenvalue {0:e}")]
    InvalidCovariance(f64),
    #[error("Sigma0NotSymmetric: max |σ₀ − σ₀ᵀ| = {0:e}")]
    Sigma0NotSymmetric(f64),
    #[error("WeightNotPositive: Σ_z has eigenvalue {value:e} at grid index {index}")]
    WeightNotPositive { value: f64, index: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("RejectionLimitExceeded: network {index} found no stable draw in {rejects} tries; lower the amplitude")]
    RejectionLimitExceeded { index: usize, rejects: usize },
    #[error("network {index}: {source}")]
    Network { index: usize, source: Box<Error> },
    #[error("Parse: {0}")]
    Parse(String),
    #[error("Linalg: {0}")]
    Linalg(#[from] LinalgError),
}

impl Error {
    /// Variant name, used verbatim in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFiniteEntry(_) => "NonFiniteEntry",
            Error::ThetaNotAntisymmetric { .. } => "ThetaNotAntisymmetric",
            Error::ThetaSingular { .. } => "ThetaSingular",
            Error::R0NotSymmetric { .. } => "R0NotSymmetric",
            Error::RingTooShort { .. } => "RingTooShort",
            Error::NotOnUnitCircle { .. } => "NotOnUnitCircle",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NotStable { .. } => "NotStable",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::NegativeTime(_) => "NegativeTime",
            Error::NotOnRingGrid { .. } => "NotOnRingGrid",
            Error::DegenerateDenominator(_) => "DegenerateDenominator",
            Error::A0NotHurwitz(_) => "A0NotHurwitz",
            Error::NoCertificateFound { .. } => "NoCertificateFound",
            Error::NotOneMode(_) => "NotOneMode",
            Error::SamePair(_) => "SamePair",
            Error::MinorViolation { .. } => "MinorViolation",
            Error::InvalidCovariance(_) => "InvalidCovariance",
            Error::Sigma0NotSymmetric(_) => "Sigma0NotSymmetric",
            Error::WeightNotPositive { .. } => "WeightNotPositive",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::RejectionLimitExceeded { .. } => "RejectionLimitExceeded",
            Error::Network { source, .. } => source.code(),
            Error::Parse(_) => "Parse",
            Error::Linalg(_) => "Linalg",
        }
    }

    /// Parse failures map to the CLI usage exit code; everything else is a domain error.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
