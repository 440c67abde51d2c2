//! Variance profiles, entry laws and matrix sampling.

mod distribution;
mod profile;
mod sample;

pub use distribution::{catalog_distribution, DistributionKind, EntryDistribution};
pub use profile::{
    band_profile, validate_profile, wigner_profile, BandShape, ProfileReport, ProfileSpec, VarianceProfile, Violation,
};
#[cfg(test)]
pub(crate) use sample::sample_unchecked;
pub use sample::{sample_matrix, MatrixSample, SymmetryClass};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("bandwidth {w} not in 1..={n}")]
    InvalidBandwidth { w: usize, n: usize },
    #[error("expected {expected} variances, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("unknown distribution `{0}`")]
    NotFound(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("binary format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
