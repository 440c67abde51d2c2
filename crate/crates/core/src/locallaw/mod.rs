//! Resolvent diagnostics and the local-law scaling experiments.

mod diagnostics;
mod largedev;
mod scan;
mod spectral;
mod zmoments;

use thiserror::Error;

use crate::ensembles::EnsembleError;
use crate::linalg::LinalgError;

pub use diagnostics::{
    diagnostics, diagnostics_from_resolvent, verify_perturbation_identities, x_diag, DiagnosticsOptions, MinorRoute,
    ResolventDiagnostics, MAINSEEQ_TOL,
};
pub use largedev::{large_deviation_mc, wilson_interval, CoefficientCase, CoefficientFixture, LargeDeviationResult};
pub use scan::{local_law_scan, quantile, Quantiles, ScanOptions, ScanPointSummary, ScanRecord, ScanResult, SCAN_STATISTICS};
pub use spectral::{counting_function, counting_gap, edge_check, rigidity_stat, EdgeCheck, RigidityStat};
pub use zmoments::{z_average_moments, ZMomentRow, ZMomentTable, BOOTSTRAP_RESAMPLES};

#[derive(Debug, Error)]
pub enum LocalLawError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("index {index} out of range for n={n}")]
    Index { index: usize, n: usize },
    #[error("self-consistent identity violated: residual {residual:e}")]
    Identity { residual: f64 },
}
