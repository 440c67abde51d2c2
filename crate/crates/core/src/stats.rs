//! Unfolding, gap statistics, k-point correlation estimators and ensemble
//! comparisons.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::{sample_matrix, EnsembleError, EntryDistribution, SymmetryClass, VarianceProfile};
use crate::linalg::{eigvalsh, stieltjes, LinalgError};
use crate::seed::job_seed;
use crate::semicircle::{msc, nsc, rho_sc};

pub const DEFAULT_KAPPA_CUT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty input: {0}")]
    Empty(String),
    #[error("insufficient statistics: {0}")]
    Statistics(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSample {
    /// N·n_sc(λ_j)
    pub points: Vec<f64>,
    /// Indices j with |λ_j| ≤ 2 − κ_cut.
    pub bulk_mask: Vec<usize>,
    pub source: String,
}

pub fn unfold(spectrum: &[f64], kappa_cut: f64) -> UnfoldedSample {
    let n = spectrum.len() as f64;
    UnfoldedSample {
        points: spectrum.iter().map(|&l| n * nsc(l)).collect(),
        bulk_mask: (0..spectrum.len()).filter(|&j| spectrum[j].abs() <= 2.0 - kappa_cut).collect(),
        source: String::new(),
    }
}

/// Empirical distribution function F(x) = #{v ≤ x}/len of sorted values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty("no values for an empirical CDF".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::Config("NaN in empirical CDF input".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Jump points with the CDF value just after each.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# rmt-locallaw v1 schema=gap-cdf\nx,cdf\n");
        let n = self.values.len();
        for (i, v) in self.values.iter().enumerate() {
            if i + 1 == n || self.values[i + 1] != *v {
                let _ = writeln!(s, "{v},{}", (i + 1) as f64 / n as f64);
            }
        }
        s
    }
}

/// Pooled consecutive differences between bulk points.
pub fn gap_distribution(samples: &[UnfoldedSample]) -> Result<EmpiricalCdf, StatsError> {
    let mut gaps = Vec::new();
    for s in samples {
        for w in s.bulk_mask.windows(2) {
            if w[1] == w[0] + 1 {
                gaps.push(s.points[w[1]] - s.points[w[0]]);
            }
        }
    }
    if gaps.is_empty() {
        return Err(StatsError::Empty("no consecutive bulk points".into()));
    }
    EmpiricalCdf::new(gaps)
}

/// sup_x |F_a(x) − F_b(x)| over the merged jump set.
pub fn ks_distance(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (x, y) = (&a.values, &b.values);
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < x.len() || j < y.len() {
        let t = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / nx - j as f64 / ny).abs());
    }
    d
}

/// K(x) = sin(πx)/(πx), K(0) = 1.
pub fn sine_kernel(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let px = std::f64::consts::PI * x;
    px.sin() / px
}

/// Smooth test functions applied as a product over the offsets of a k-tuple
/// from its first point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// exp(−α²/(2w²))
    Gaussian { width: f64 },
    /// Piecewise-linear through (α, O(α)) pairs sorted by α, zero outside.
    Tabulated { points: Vec<(f64, f64)> },
}

impl TestFunction {
    pub fn eval(&self, a: f64) -> f64 {
        match self {
            TestFunction::Gaussian { width } => (-a * a / (2.0 * width * width)).exp(),
            TestFunction::Tabulated { points } => {
                let k = points.partition_point(|p| p.0 <= a);
                if k == 0 || k == points.len() {
                    return if k > 0 && points[k - 1].0 == a { points[k - 1].1 } else { 0.0 };
                }
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (a - x0) / (x1 - x0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPointOptions {
    pub k: usize,
    pub energy: f64,
    /// Half-width b of the energy window.
    pub window: f64,
    pub bins: usize,
    /// Largest offset in unfolded units for k ≥ 2.
    pub max_offset: f64,
    pub test_function: Option<TestFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    /// Bin centres. For k=1 the position in the unfolded window; for k=2 the
    /// absolute offset; for k=3 the offset pairs of a `bins × bins` grid,
    /// row-major.
    pub bins: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Per-sample mean of Σ O(offsets)/L over tuples anchored in the window.
    pub observable: Option<(f64, f64)>,
    pub samples: usize,
}

impl CorrelationEstimate {
    /// Mean value across bins; ≈ 1 for the one-point function.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("# rmt-locallaw v1 schema=kpoint\n");
        let dims = self.bins.first().map_or(0, Vec::len);
        for d in 0..dims {
            let _ = write!(s, "alpha{},", d + 1);
        }
        s.push_str("value,stderr\n");
        for ((c, v), e) in self.bins.iter().zip(&self.values).zip(&self.stderr) {
            for x in c {
                let _ = write!(s, "{x},");
            }
            let _ = writeln!(s, "{v},{e}");
        }
        s
    }
}

fn mean_se(rows: &[Vec<f64>], col: usize) -> (f64, f64) {
    let s = rows.len() as f64;
    let mean = rows.iter().map(|r| r[col]).sum::<f64>() / s;
    if rows.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = rows.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / (s - 1.0);
    (mean, (var / s).sqrt())
}

/// Histogram estimate of the locally rescaled k-point function, averaged
/// over energies in [E − b, E + b].
///
/// Each spectrum is unfolded with N·n_sc, so the rescaling E′ + α/(Nρ_sc(E′))
/// becomes a unit-density shift. Tuples are anchored at a point inside the
/// unfolded window of length L; counts are divided by L and the bin volume
/// (twice the width for the absolute offset at k = 2).
pub fn kpoint_estimate(spectra: &[Vec<f64>], opts: &KPointOptions) -> Result<CorrelationEstimate, StatsError> {
    let k = opts.k;
    if !(1..=3).contains(&k) {
        return Err(StatsError::Config(format!("k must be 1, 2 or 3, got {k}")));
    }
    if !(opts.energy.abs() < 2.0) || !(opts.window > 0.0) || opts.bins == 0 {
        return Err(StatsError::Config("need |E| < 2, b > 0 and at least one bin".into()));
    }
    if k >= 2 && !(opts.max_offset > 0.0) {
        return Err(StatsError::Config("max_offset must be positive".into()));
    }
    if spectra.is_empty() {
        return Err(StatsError::Statistics("no samples".into()));
    }
    let nb = opts.bins;
    let rows: Vec<(Vec<f64>, f64, usize)> = spectra
        .par_iter()
        .map(|spec| {
            let n = spec.len() as f64;
            let u: Vec<f64> = spec.iter().map(|&l| n * nsc(l)).collect();
            let lo = n * nsc(opts.energy - opts.window);
            let hi = n * nsc(opts.energy + opts.window);
            let len = hi - lo;
            let anchors: Vec<usize> = (0..u.len()).filter(|&i| lo <= u[i] && u[i] < hi).collect();
            let o = |a: f64| opts.test_function.as_ref().map_or(0.0, |f| f.eval(a));
            let mut obs = 0.0;
            let vals = match k {
                1 => {
                    let w = len / nb as f64;
                    let mut c = vec![0.0; nb];
                    for &i in &anchors {
                        c[(((u[i] - lo) / w) as usize).min(nb - 1)] += 1.0;
                    }
                    obs = anchors.len() as f64 / len;
                    c.iter().map(|x| x / w).collect()
                }
                2 => {
                    let w = opts.max_offset / nb as f64;
                    let mut c = vec![0.0; nb];
                    for &i in &anchors {
                        for j in neighbours(&u, i, opts.max_offset) {
                            let d = u[j] - u[i];
                            c[((d.abs() / w) as usize).min(nb - 1)] += 1.0;
                            obs += o(d);
                        }
                    }
                    obs /= len;
                    c.iter().map(|x| x / (len * 2.0 * w)).collect()
                }
                _ => {
                    let w = 2.0 * opts.max_offset / nb as f64;
                    let mut c = vec![0.0; nb * nb];
                    for &i in &anchors {
                        let nbh: Vec<usize> = neighbours(&u, i, opts.max_offset).collect();
                        for &j in &nbh {
                            for &l in &nbh {
                                if j == l {
                                    continue;
                                }
                                let (d1, d2) = (u[j] - u[i], u[l] - u[i]);
                                let b1 = (((d1 + opts.max_offset) / w) as usize).min(nb - 1);
                                let b2 = (((d2 + opts.max_offset) / w) as usize).min(nb - 1);
                                c[b1 * nb + b2] += 1.0;
                                obs += o(d1) * o(d2);
                            }
                        }
                    }
                    obs /= len;
                    c.iter().map(|x| x / (len * w * w)).collect()
                }
            };
            (vals, obs, anchors.len())
        })
        .collect();
    if rows.iter().all(|r| r.2 < k) {
        return Err(StatsError::Statistics(format!("no sample has {k} points in the window")));
    }
    let centres: Vec<Vec<f64>> = match k {
        1 => {
            let n = spectra[0].len() as f64;
            let lo = n * nsc(opts.energy - opts.window);
            let w = (n * nsc(opts.energy + opts.window) - lo) / nb as f64;
            (0..nb).map(|b| vec![lo + (b as f64 + 0.5) * w]).collect()
        }
        2 => {
            let w = opts.max_offset / nb as f64;
            (0..nb).map(|b| vec![(b as f64 + 0.5) * w]).collect()
        }
        _ => {
            let w = 2.0 * opts.max_offset / nb as f64;
            let c = |b: usize| -opts.max_offset + (b as f64 + 0.5) * w;
            (0..nb * nb).map(|b| vec![c(b / nb), c(b % nb)]).collect()
        }
    };
    let value_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
    let (values, stderr) = (0..centres.len()).map(|c| mean_se(&value_rows, c)).unzip();
    let observable = opts.test_function.as_ref().map(|_| {
        let obs: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1]).collect();
        mean_se(&obs, 0)
    });
    Ok(CorrelationEstimate { k, bins: centres, values, stderr, observable, samples: spectra.len() })
}

/// Indices j ≠ i of sorted `u` with |u_j − u_i| < r.
fn neighbours(u: &[f64], i: usize, r: f64) -> impl Iterator<Item = usize> + '_ {
    let lo = u[..i].partition_point(|&x| x <= u[i] - r);
    let hi = i + 1 + u[i + 1..].partition_point(|&x| x < u[i] + r);
    (lo..hi).filter(move |&j| j != i)
}

/// Observables F(N⁻¹Tr G) used by the Green-function comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Functional {
    /// Im m_N(z)
    ImTrace,
    /// Re m_N(z)
    ReTrace,
    /// Im m_N(z)·Im m_N(z + shift/N)
    TraceProduct { shift: f64 },
    /// arctan(Im m_N(z)), smooth and bounded
    Arctan,
}

impl Functional {
    fn apply(&self, spectrum: &[f64], z: Complex64) -> f64 {
        let n = spectrum.len() as f64;
        let m = stieltjes(spectrum, z);
        match self {
            Functional::ImTrace => m.im,
            Functional::ReTrace => m.re,
            Functional::TraceProduct { shift } => m.im * stieltjes(spectrum, z + shift / n).im,
            Functional::Arctan => m.im.atan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub distribution: EntryDistribution,
    pub beta: SymmetryClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreenOptions {
    pub epsilon: f64,
    /// Relative slack on the η window [N^{−1−ε}, N^{−1}].
    pub slack: f64,
    pub kappa_cut: f64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        Self { epsilon: 0.1, slack: 0.1, kappa_cut: DEFAULT_KAPPA_CUT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenPoint {
    pub z: Complex64,
    pub mean_a: f64,
    pub mean_b: f64,
    /// mean_a − mean_b
    pub difference: f64,
    /// Jackknife standard error of the paired difference.
    pub stderr: f64,
    /// F evaluated on m_sc(z).
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenComparison {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub functional: Functional,
    pub points: Vec<GreenPoint>,
    /// |m₃(A) − m₃(B)|
    pub m3_mismatch: f64,
    /// |m₄(A) − m₄(B)|
    pub m4_mismatch: f64,
}

/// Jackknife standard error of the mean of `x`.
pub fn jackknife_se(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let total: f64 = x.iter().sum();
    let loo: Vec<f64> = x.iter().map(|v| (total - v) / (n - 1) as f64).collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    ((n - 1) as f64 / n as f64 * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt()
}

/// E F(m_N^{(A)}) − E F(m_N^{(B)}) at each z.
///
/// Sample k of both ensembles is drawn with seed `job_seed(seed, k)`, so the
/// two matrices share their underlying random stream and the estimate is a
/// paired difference.
pub fn green_comparison(
    profile: &VarianceProfile,
    a: &Ensemble,
    b: &Ensemble,
    z_list: &[Complex64],
    functional: Functional,
    n_samples: usize,
    seed: u64,
    opts: &GreenOptions,
) -> Result<GreenComparison, StatsError> {
    let n = profile.n();
    let nf = n as f64;
    let lo = nf.powf(-1.0 - opts.epsilon) * (1.0 - opts.slack);
    let hi = nf.powf(-1.0) * (1.0 + opts.slack);
    for z in z_list {
        if !(z.im >= lo && z.im <= hi) {
            return Err(StatsError::Config(format!("eta = {} outside [{lo}, {hi}]", z.im)));
        }
        if z.re.abs() > 2.0 - 2.0 * opts.kappa_cut {
            return Err(StatsError::Config(format!("E = {} outside the bulk window", z.re)));
        }
    }
    if n_samples < 2 {
        return Err(StatsError::Statistics("at least two samples are needed for error bars".into()));
    }
    let per_sample: Vec<Result<(Vec<f64>, Vec<f64>), StatsError>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let s = job_seed(seed, k as u64);
            let sa = eigvalsh(&sample_matrix(profile, &a.distribution, a.beta, s)?.entries)?;
            let sb = eigvalsh(&sample_matrix(profile, &b.distribution, b.beta, s)?.entries)?;
            Ok((
                z_list.iter().map(|&z| functional.apply(&sa, z)).collect(),
                z_list.iter().map(|&z| functional.apply(&sb, z)).collect(),
            ))
        })
        .collect();
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>, _>>()?;
    let points = z_list
        .iter()
        .enumerate()
        .map(|(zi, &z)| {
            let fa: Vec<f64> = per_sample.iter().map(|r| r.0[zi]).collect();
            let fb: Vec<f64> = per_sample.iter().map(|r| r.1[zi]).collect();
            let d: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let m = msc(z);
            let reference = match functional {
                Functional::ImTrace => m.im,
                Functional::ReTrace => m.re,
                Functional::TraceProduct { .. } => m.im * m.im,
                Functional::Arctan => m.im.atan(),
            };
            GreenPoint {
                z,
                mean_a: mean(&fa),
                mean_b: mean(&fb),
                difference: mean(&d),
                stderr: jackknife_se(&d),
                reference,
            }
        })
        .collect();
    Ok(GreenComparison {
        n,
        samples: n_samples,
        seed,
        functional,
        points,
        m3_mismatch: (a.distribution.m3() - b.distribution.m3()).abs(),
        m4_mismatch: (a.distribution.m4() - b.distribution.m4()).abs(),
    })
}

/// ∫_a^b ρ_sc by Simpson's rule; used as an independent check of n_sc.
pub fn semicircle_mass(a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals.max(2) & !1;
    let h = (b - a) / m as f64;
    let mut s = rho_sc(a) + rho_sc(b);
    for i in 1..m {
        s += rho_sc(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{catalog_distribution, wigner_profile};
    use crate::seed::rng_from;
    use crate::semicircle::classical_locations;
    use proptest::prelude::*;
    use rand::Rng;

    fn cdf(v: &[f64]) -> EmpiricalCdf {
        EmpiricalCdf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unfold_examples() {
        let u = unfold(&[0.0], 0.5);
        assert_eq!(u.points, vec![0.5]);
        let n = 10;
        let z = vec![0.0; n];
        assert_eq!(unfold(&z, 0.5).points[0], 5.0);
        let n = 300;
        let g = classical_locations(n);
        let u = unfold(&g, 0.5);
        for (j, p) in u.points.iter().enumerate() {
            assert!((p - (j + 1) as f64).abs() < 1e-9, "{j} {p}");
        }
        assert!(u.bulk_mask.iter().all(|&j| g[j].abs() <= 1.5));
    }

    #[test]
    fn gap_examples() {
        let s = UnfoldedSample { points: vec![1.0, 2.0, 4.0], bulk_mask: vec![0, 1, 2], source: String::new() };
        assert_eq!(gap_distribution(&[s]).unwrap().values(), &[1.0, 2.0]);
        let s = UnfoldedSample { points: vec![3.0; 4], bulk_mask: vec![0, 1, 2, 3], source: String::new() };
        let c = gap_distribution(&[s]).unwrap();
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(-1e-300), 0.0);
        let s = UnfoldedSample { points: vec![1.0], bulk_mask: vec![], source: String::new() };
        assert!(matches!(gap_distribution(&[s]), Err(StatsError::Empty(_))));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&cdf(&[1.0, 2.0, 3.0]), &cdf(&[1.0, 2.0, 3.0])), 0.0);
        assert_eq!(ks_distance(&cdf(&[0.0]), &cdf(&[1.0])), 1.0);
        assert_eq!(ks_distance(&cdf(&[0.0, 1.0]), &cdf(&[0.5])), 0.5);
        assert!(EmpiricalCdf::new(vec![]).is_err());
    }

    fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
        let (ca, cb) = (cdf(a), cdf(b));
        a.iter().chain(b).map(|&x| (ca.eval(x) - cb.eval(x)).abs()).fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn ks_is_a_metric(
            a in prop::collection::vec(-5i32..5, 1..20),
            b in prop::collection::vec(-5i32..5, 1..20),
            c in prop::collection::vec(-5i32..5, 1..20),
        ) {
            let f = |v: &[i32]| v.iter().map(|&x| x as f64 * 0.5).collect::<Vec<_>>();
            let (a, b, c) = (f(&a), f(&b), f(&c));
            let (ca, cb, cc) = (cdf(&a), cdf(&b), cdf(&c));
            let dab = ks_distance(&ca, &cb);
            prop_assert_eq!(dab, ks_distance(&cb, &ca));
            prop_assert!((dab - ks_brute(&a, &b)).abs() < 1e-15);
            prop_assert!(ks_distance(&ca, &cc) <= dab + ks_distance(&cb, &cc) + 1e-15);
            prop_assert_eq!(ks_distance(&ca, &ca), 0.0);
            if dab == 0.0 {
                let (mut x, mut y) = (a.clone(), b.clone());
                x.sort_by(f64::total_cmp);
                y.sort_by(f64::total_cmp);
                x.dedup();
                y.dedup();
                prop_assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn sine_kernel_values() {
        assert_eq!(sine_kernel(0.0), 1.0);
        assert!(sine_kernel(1.0).abs() < 1e-16);
        assert!((sine_kernel(0.5) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn one_point_of_classical_locations() {
        let g = classical_locations(1000);
        let opts = KPointOptions { k: 1, energy: 0.0, window: 0.5, bins: 10, max_offset: 0.0, test_function: None };
        let e = kpoint_estimate(&[g], &opts).unwrap();
        for v in &e.values {
            assert!((v - 1.0).abs() < 0.1, "{v}");
        }
        assert!((e.mass() - 1.0).abs() < 0.02);
    }

    fn semicircle_iid(n: usize, seed: u64) -> Vec<f64> {
        // Inverse of n_sc by bisection, so the unfolded points are i.i.d. uniform.
        let mut rng = rng_from(seed);
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                let t: f64 = rng.random();
                let (mut lo, mut hi) = (-2.0, 2.0);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if nsc(mid) < t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn pair_counts_match_brute_force_and_poisson_is_flat() {
        let spectra: Vec<Vec<f64>> = (0..40).map(|s| semicircle_iid(400, s)).collect();
        let opts = KPointOptions {
            k: 2,
            energy: 0.0,
            window: 0.5,
            bins: 5,
            max_offset: 2.5,
            test_function: Some(TestFunction::Gaussian { width: 1.0 }),
        };
        let e = kpoint_estimate(&spectra, &opts).unwrap();
        // Brute force over all ordered pairs of the first sample.
        let n = 400.0;
        let u: Vec<f64> = spectra[0].iter().map(|&l| n * nsc(l)).collect();
        let (lo, hi) = (n * nsc(-0.5), n * nsc(0.5));
        let w = 0.5;
        let mut counts = [0.0; 5];
        for i in 0..u.len() {
            if !(lo <= u[i] && u[i] < hi) {
                continue;
            }
            for j in 0..u.len() {
                let d = (u[j] - u[i]).abs();
                if j != i && d < 2.5 {
                    counts[((d / w) as usize).min(4)] += 1.0;
                }
            }
        }
        let single = kpoint_estimate(&spectra[..1], &opts).unwrap();
        for b in 0..5 {
            let want = counts[b] / ((hi - lo) * 2.0 * w);
            assert!((single.values[b] - want).abs() < 1e-12);
        }
        for (v, s) in e.values.iter().zip(&e.stderr) {
            assert!((v - 1.0).abs() < 4.0 * s + 0.02, "{v} ± {s}");
        }
        // ∫ e^{−α²/2} over |α| < 2.5 for unit-density Poisson points.
        let (obs, se) = e.observable.unwrap();
        assert!((obs - 2.4755).abs() < 4.0 * se + 0.05, "{obs} ± {se}");
    }

    #[test]
    fn three_point_bins_are_symmetric() {
        let spectra: Vec<Vec<f64>> = (0..4).map(|s| semicircle_iid(200, s)).collect();
        let opts = KPointOptions { k: 3, energy: 0.0, window: 0.5, bins: 4, max_offset: 2.0, test_function: None };
        let e = kpoint_estimate(&spectra, &opts).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((e.values[a * 4 + b] - e.values[b * 4 + a]).abs() < 1e-12);
            }
        }
        let bad = KPointOptions { k: 4, ..opts.clone() };
        assert!(kpoint_estimate(&spectra, &bad).is_err());
        assert!(matches!(kpoint_estimate(&[], &opts), Err(StatsError::Statistics(_))));
    }

    #[test]
    fn tabulated_test_function() {
        let f = TestFunction::Tabulated { points: vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)] };
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(2.0), 0.0);
    }

    #[test]
    fn jackknife_equals_classical_se_for_mean() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let m = x.iter().sum::<f64>() / 5.0;
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((jackknife_se(&x) - sd / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn green_identical_ensembles_cancel() {
        let n = 60;
        let p = wigner_profile(n).unwrap();
        let e = Ensemble { distribution: catalog_distribution("bernoulli").unwrap(), beta: SymmetryClass::Complex };
        let z = [Complex64::new(0.2, 1.0 / n as f64)];
        let r = green_comparison(&p, &e, &e, &z, Functional::ImTrace, 4, 7, &GreenOptions::default()).unwrap();
        assert_eq!(r.points[0].difference, 0.0);
        assert_eq!(r.m4_mismatch, 0.0);
        let u = Ensemble { distribution: catalog_distribution("uniform").unwrap(), beta: SymmetryClass::Complex };
        let r = green_comparison(&p, &e, &u, &z, Functional::Arctan, 2, 7, &GreenOptions::default()).unwrap();
        assert!((r.m4_mismatch - 0.8).abs() < 1e-12);
        let far = [Complex64::new(0.2, 0.5)];
        assert!(matches!(
            green_comparison(&p, &e, &e, &far, Functional::ImTrace, 4, 7, &GreenOptions::default()),
            Err(StatsError::Config(_))
        ));
    }

    #[test]
    fn simpson_matches_counting_function() {
        for &(a, b) in &[(-2.0, 2.0), (0.0, 1.0), (-1.3, 0.4)] {
            let q = semicircle_mass(a, b, 20_000);
            assert!((q - (nsc(b) - nsc(a))).abs() < 1e-6, "{a} {b}");
        }
    }
}
