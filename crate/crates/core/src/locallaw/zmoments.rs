use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::diagnostics::{diagnostics_from_resolvent, x_diag, DiagnosticsOptions, MinorRoute};
use super::LocalLawError;
use crate::ensembles::{sample_matrix, EntryDistribution, MatrixSample, SymmetryClass, VarianceProfile};
use crate::linalg::LuFactors;
use crate::seed::{job_seed, rng_from};
use crate::semicircle::{in_domain, ControlFunction, Domain, LogFactors, SpectralPoint};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZMomentRow {
    pub p: u32,
    /// Sample mean of |N⁻¹Σ_i Z_i|^p.
    pub moment: f64,
    pub bootstrap_se: f64,
    /// moment / ((log N)^{3+2α}X²)^p with literal logarithms.
    pub ratio: f64,
    /// Same with the logarithms replaced by 1.
    pub ratio_dropped_logs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZMomentTable {
    pub n: usize,
    pub z: Complex64,
    pub x_diag: f64,
    /// N⁻¹Σ_i Z_i per sample.
    pub averages: Vec<Complex64>,
    pub rows: Vec<ZMomentRow>,
}

/// Empirical E|N⁻¹Σ_i Z_i|^p for p = 2, 4, …, `p_max`.
///
/// The point must lie in the D* domain (logarithms dropped). Sample k uses
/// seed `job_seed(seed, k)`; bootstrap resamples are drawn from
/// `job_seed(seed, u64::MAX)`.
pub fn z_average_moments(
    p: &VarianceProfile,
    d: &EntryDistribution,
    beta: SymmetryClass,
    z: SpectralPoint,
    n_samples: usize,
    p_max: u32,
    seed: u64,
) -> Result<ZMomentTable, LocalLawError> {
    z_moments_with(p, d.subexp_alpha(), z, n_samples, p_max, seed, |s| {
        sample_matrix(p, d, beta, s).map_err(LocalLawError::from)
    })
}

pub(crate) fn z_moments_with(
    p: &VarianceProfile,
    alpha: f64,
    z: SpectralPoint,
    n_samples: usize,
    p_max: u32,
    seed: u64,
    sampler: impl Fn(u64) -> Result<MatrixSample, LocalLawError> + Sync,
) -> Result<ZMomentTable, LocalLawError> {
    if p_max < 2 || p_max > 8 || p_max % 2 != 0 {
        return Err(LocalLawError::Config(format!("p_max must be even and in [2, 8], got {p_max}")));
    }
    if n_samples == 0 {
        return Err(LocalLawError::Config("n_samples must be positive".into()));
    }
    let n = p.n();
    let ctrl = ControlFunction::new(p.delta_plus(), p.edge_exponent_a());
    if !in_domain(z, &ctrl, n, p.m_param(), Domain::DStar, alpha, LogFactors::Dropped) {
        return Err(LocalLawError::Config(format!("z = {} + {}i lies outside D* for n={n}", z.e, z.eta)));
    }
    let zc = z.z();
    let opts = DiagnosticsOptions { route: MinorRoute::Schur, alpha };
    let averages: Vec<Result<Complex64, LocalLawError>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let h = sampler(job_seed(seed, k as u64))?.entries;
            let g = LuFactors::factor(&h.shifted(zc))?.inverse();
            let diag = diagnostics_from_resolvent(&h, p, zc, &g, opts)?;
            Ok(diag.z_terms.iter().sum::<Complex64>() / n as f64)
        })
        .collect();
    let averages = averages.into_iter().collect::<Result<Vec<_>, _>>()?;

    let x_lit = x_diag(n, p.m_param(), zc, alpha, LogFactors::Literal);
    let x_drop = x_diag(n, p.m_param(), zc, alpha, LogFactors::Dropped);
    let scale_lit = LogFactors::Literal.pow(n, 3.0 + 2.0 * alpha) * x_lit * x_lit;
    let scale_drop = x_drop * x_drop;
    let abs: Vec<f64> = averages.iter().map(|a| a.norm()).collect();
    let mut rng = rng_from(job_seed(seed, u64::MAX));
    let resamples: Vec<Vec<usize>> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..abs.len()).map(|_| rng.random_range(0..abs.len())).collect())
        .collect();
    let rows = (2..=p_max)
        .step_by(2)
        .map(|pw| {
            let pf = pw as f64;
            let moment = abs.iter().map(|a| a.powf(pf)).sum::<f64>() / abs.len() as f64;
            let boot: Vec<f64> = resamples
                .iter()
                .map(|idx| idx.iter().map(|&i| abs[i].powf(pf)).sum::<f64>() / idx.len() as f64)
                .collect();
            let mean = boot.iter().sum::<f64>() / boot.len() as f64;
            let var = boot.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boot.len() - 1) as f64;
            ZMomentRow {
                p: pw,
                moment,
                bootstrap_se: var.sqrt(),
                ratio: moment / scale_lit.powf(pf),
                ratio_dropped_logs: moment / scale_drop.powf(pf),
            }
        })
        .collect();
    Ok(ZMomentTable { n, z: zc, x_diag: x_lit, averages, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{catalog_distribution, sample_unchecked, wigner_profile};

    #[test]
    fn zero_profile_gives_zero_moments() {
        let n = 6;
        let p = VarianceProfile::from_variances(n, vec![0.0; n * n]).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        let z = SpectralPoint { e: 0.5, eta: 0.5 };
        let t = z_moments_with(&p, 1.0, z, 4, 4, 1, |s| Ok(sample_unchecked(&p, &d, SymmetryClass::Complex, s)))
            .unwrap();
        for r in &t.rows {
            assert!(r.moment < 1e-28, "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_power_and_domain() {
        let p = wigner_profile(20).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        let ok = SpectralPoint { e: 0.5, eta: 0.5 };
        assert!(z_average_moments(&p, &d, SymmetryClass::Complex, ok, 2, 3, 0).is_err());
        assert!(z_average_moments(&p, &d, SymmetryClass::Complex, ok, 2, 10, 0).is_err());
        let bad = SpectralPoint { e: 0.5, eta: 0.01 };
        assert!(matches!(
            z_average_moments(&p, &d, SymmetryClass::Complex, bad, 2, 2, 0),
            Err(LocalLawError::Config(_))
        ));
    }

    #[test]
    fn moments_are_deterministic_and_ordered() {
        let p = wigner_profile(30).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        let z = SpectralPoint { e: 0.5, eta: 0.3 };
        let a = z_average_moments(&p, &d, SymmetryClass::Complex, z, 8, 4, 5).unwrap();
        let b = z_average_moments(&p, &d, SymmetryClass::Complex, z, 8, 4, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        // Jensen: (E|X|²)² ≤ E|X|⁴.
        assert!(a.rows[0].moment.powi(2) <= a.rows[1].moment * (1.0 + 1e-12));
    }
}
