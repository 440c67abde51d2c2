use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagnostics::{diagnostics_from_resolvent, DiagnosticsOptions, MinorRoute, MAINSEEQ_TOL};
use super::LocalLawError;
use crate::ensembles::{sample_matrix, EntryDistribution, SymmetryClass, VarianceProfile};
use crate::linalg::{HermitianMatrix, LuFactors};
use crate::seed::{job_seed, rng_from};
use crate::semicircle::{in_domain, msc, theta, ControlFunction, Domain, LogFactors, SpectralPoint, ThetaVariant};

/// Columns solved when Λ_o is estimated instead of computed exactly.
const SUBSAMPLE_COLUMNS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    pub domain: Domain,
    pub theta: ThetaVariant,
    pub logs: LogFactors,
    pub alpha: f64,
    /// Above this size Λ_o is estimated from a column subsample and the
    /// Υ-diagnostics are skipped.
    pub full_resolvent_max_n: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            domain: Domain::DTheorem,
            theta: ThetaVariant::Exact,
            logs: LogFactors::Dropped,
            alpha: 1.0,
            full_resolvent_max_n: 2000,
        }
    }
}

/// One (z, sample) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub n: usize,
    pub e: f64,
    pub eta: f64,
    pub sample_index: usize,
    pub sample_seed: u64,
    pub m_n: Complex64,
    /// |m_N − m_sc|
    pub m_err: f64,
    pub lambda_d: f64,
    pub lambda_o: f64,
    pub lambda_o_subsampled: bool,
    /// NaN when the Υ-diagnostics were skipped.
    pub upsilon_max: f64,
    pub mainseeq_residual: f64,
    /// Mη(κ+η)^A |m_N − m_sc|
    pub m_err_norm: f64,
    /// √(Mη)(κ+η)^{A/2−1/4} Λ_d
    pub lambda_d_norm: f64,
    /// √(Mη)(κ+η)^{−1/4} Λ_o
    pub lambda_o_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub median: f64,
    pub q90: f64,
}

/// Linear-interpolation quantile of unsorted data; NaN values are ignored.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        Self { median: quantile(values, 0.5), q90: quantile(values, 0.9) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPointSummary {
    pub e: f64,
    pub eta: f64,
    pub theta: f64,
    /// Keyed by statistic name; see [`ScanResult::statistic`].
    pub quantiles: BTreeMap<String, Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n: usize,
    pub m_param: f64,
    pub edge_exponent_a: u8,
    pub sample_count: usize,
    pub seed_base: u64,
    pub options: ScanOptions,
    pub records: Vec<ScanRecord>,
    pub grid: Vec<ScanPointSummary>,
}

/// Statistic names carried in [`ScanPointSummary::quantiles`].
pub const SCAN_STATISTICS: [&str; 7] = [
    "m_err_norm",
    "lambda_d_norm",
    "lambda_o_norm",
    "m_err_plain",
    "lambda_d_plain",
    "lambda_d_theta",
    "lambda_o_plain",
];

impl ScanResult {
    /// Values of a named statistic for grid point `zi`, recomputed from the
    /// raw records:
    /// `m_err_plain` = Mη|m_N − m_sc|, `lambda_d_plain` = √(Mη)Λ_d,
    /// `lambda_d_theta` = √(Mη)Λ_d/θ, `lambda_o_plain` = √(Mη)Λ_o; the `_norm`
    /// variants carry the (κ+η) powers.
    pub fn statistic(&self, zi: usize, name: &str) -> Vec<f64> {
        let g = &self.grid[zi];
        let meta = self.m_param * g.eta;
        self.records
            .iter()
            .filter(|r| r.e == g.e && r.eta == g.eta)
            .map(|r| match name {
                "m_err_norm" => r.m_err_norm,
                "lambda_d_norm" => r.lambda_d_norm,
                "lambda_o_norm" => r.lambda_o_norm,
                "m_err_plain" => meta * r.m_err,
                "lambda_d_plain" => meta.sqrt() * r.lambda_d,
                "lambda_d_theta" => meta.sqrt() * r.lambda_d / g.theta,
                "lambda_o_plain" => meta.sqrt() * r.lambda_o,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn quantiles(&self, zi: usize, name: &str) -> Option<Quantiles> {
        self.grid.get(zi)?.quantiles.get(name).copied()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("# rmt-locallaw v1 schema=locallaw-scan\n");
        s.push_str("n,E,eta,sample_seed,m_err_norm,lambda_d_norm,lambda_o_norm,upsilon_max,mainseeq_residual,m_err,lambda_d,lambda_o,lambda_o_subsampled\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.e,
                r.eta,
                r.sample_seed,
                r.m_err_norm,
                r.lambda_d_norm,
                r.lambda_o_norm,
                r.upsilon_max,
                r.mainseeq_residual,
                r.m_err,
                r.lambda_d,
                r.lambda_o,
                r.lambda_o_subsampled
            );
        }
        s
    }
}

/// Samples `n_samples` matrices and evaluates every grid point on each.
///
/// Sample k uses seed `job_seed(seed, k)`; the same matrix is reused across
/// the grid. Work is spread over the current rayon pool and collected in
/// job order, so the result does not depend on the number of workers.
pub fn local_law_scan(
    p: &VarianceProfile,
    d: &EntryDistribution,
    beta: SymmetryClass,
    n_samples: usize,
    z_grid: &[SpectralPoint],
    seed: u64,
    opts: &ScanOptions,
) -> Result<ScanResult, LocalLawError> {
    let n = p.n();
    let a = p.edge_exponent_a();
    let ctrl = ControlFunction { delta_plus: p.delta_plus(), edge_exponent_a: a, variant: opts.theta };
    for z in z_grid {
        if !(z.eta > 0.0) || !in_domain(*z, &ctrl, n, p.m_param(), opts.domain, opts.alpha, opts.logs) {
            return Err(LocalLawError::Config(format!(
                "z = {} + {}i lies outside the {:?} domain for n={n}",
                z.e, z.eta, opts.domain
            )));
        }
    }
    let per_sample: Vec<Result<Vec<ScanRecord>, LocalLawError>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let s = job_seed(seed, k as u64);
            let h = sample_matrix(p, d, beta, s)?.entries;
            z_grid.iter().map(|z| evaluate(&h, p, *z, k, s, a, opts)).collect()
        })
        .collect();
    let mut by_sample = Vec::with_capacity(n_samples);
    for r in per_sample {
        by_sample.push(r?);
    }
    let mut records = Vec::with_capacity(n_samples * z_grid.len());
    for zi in 0..z_grid.len() {
        for s in &by_sample {
            records.push(s[zi].clone());
        }
    }
    let mut result = ScanResult {
        n,
        m_param: p.m_param(),
        edge_exponent_a: a,
        sample_count: n_samples,
        seed_base: seed,
        options: *opts,
        records,
        grid: z_grid
            .iter()
            .map(|z| ScanPointSummary { e: z.e, eta: z.eta, theta: theta(*z, &ctrl), quantiles: BTreeMap::new() })
            .collect(),
    };
    for zi in 0..z_grid.len() {
        let q: BTreeMap<String, Quantiles> =
            SCAN_STATISTICS.iter().map(|&name| (name.to_string(), Quantiles::of(&result.statistic(zi, name)))).collect();
        result.grid[zi].quantiles = q;
    }
    Ok(result)
}

fn evaluate(
    h: &HermitianMatrix,
    p: &VarianceProfile,
    z: SpectralPoint,
    sample_index: usize,
    sample_seed: u64,
    a: u8,
    opts: &ScanOptions,
) -> Result<ScanRecord, LocalLawError> {
    let n = h.dim();
    let zc = z.z();
    let lu = LuFactors::factor(&h.shifted(zc))?;
    let (m_n, lambda_d, lambda_o, subsampled, upsilon_max, residual) = if n <= opts.full_resolvent_max_n {
        let g = lu.inverse();
        let d = diagnostics_from_resolvent(h, p, zc, &g, DiagnosticsOptions { route: MinorRoute::Schur, alpha: opts.alpha })?;
        if !(d.mainseeq_residual < MAINSEEQ_TOL) {
            return Err(LocalLawError::Identity { residual: d.mainseeq_residual });
        }
        (d.m_n, d.lambda_d, d.lambda_o, false, d.upsilon_max, d.mainseeq_residual)
    } else {
        let diag = lu.inverse_diagonal();
        let m_n = diag.iter().sum::<Complex64>() / n as f64;
        let msc_z = msc(zc);
        let lambda_d = diag.iter().map(|g| (g - msc_z).norm()).fold(0.0, f64::max);
        let mut rng = rng_from(job_seed(sample_seed, 0x4c6f));
        let mut lambda_o = 0.0f64;
        for j in sample_indices(&mut rng, n, SUBSAMPLE_COLUMNS.min(n)).into_iter() {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = lu.solve(&e);
            for (i, v) in col.iter().enumerate() {
                if i != j {
                    lambda_o = lambda_o.max(v.norm());
                }
            }
        }
        (m_n, lambda_d, lambda_o, true, f64::NAN, f64::NAN)
    };
    let m_err = (m_n - msc(zc)).norm();
    let meta = p.m_param() * z.eta;
    let ke = z.kappa() + z.eta;
    let af = a as f64;
    Ok(ScanRecord {
        n,
        e: z.e,
        eta: z.eta,
        sample_index,
        sample_seed,
        m_n,
        m_err,
        lambda_d,
        lambda_o,
        lambda_o_subsampled: subsampled,
        upsilon_max,
        mainseeq_residual: residual,
        m_err_norm: meta * ke.powf(af) * m_err,
        lambda_d_norm: meta.sqrt() * ke.powf(af / 2.0 - 0.25) * lambda_d,
        lambda_o_norm: meta.sqrt() * ke.powf(-0.25) * lambda_o,
    })
}
