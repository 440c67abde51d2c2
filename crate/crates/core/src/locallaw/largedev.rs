use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::EntryDistribution;
use crate::seed::{job_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientCase {
    /// |Σ_i a_i A_i|
    Linear,
    /// |Σ_i (|a_i|² − σ²) B_ii|
    Diagonal,
    /// |Σ_{i≠j} ā_i B_ij a_j|
    OffDiagonal,
}

/// Coefficient fixtures for [`large_deviation_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientFixture {
    /// A = e₁; B = e₁e₁* for the diagonal case and e₁e₂* + e₂e₁* off the diagonal.
    FirstBasis,
    Zero,
    /// Independent standard complex Gaussians drawn from the seed, B Hermitian.
    #[default]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeDeviationResult {
    pub threshold: f64,
    pub exceedances: usize,
    pub trials: usize,
    pub rate: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for k successes in n trials at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

enum Coeffs {
    Vector(Vec<Complex64>),
    /// Row-major n×n.
    Matrix(Vec<Complex64>),
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

fn build(n: usize, case: CoefficientCase, fixture: CoefficientFixture, seed: u64) -> Coeffs {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut rng = rng_from(job_seed(seed, u64::MAX));
    match case {
        CoefficientCase::Linear => Coeffs::Vector(match fixture {
            CoefficientFixture::Zero => vec![zero; n],
            CoefficientFixture::FirstBasis => (0..n).map(|i| if i == 0 { one } else { zero }).collect(),
            CoefficientFixture::Random => (0..n).map(|_| complex_normal(&mut rng)).collect(),
        }),
        CoefficientCase::Diagonal | CoefficientCase::OffDiagonal => {
            let mut b = vec![zero; n * n];
            match fixture {
                CoefficientFixture::Zero => {}
                CoefficientFixture::FirstBasis => {
                    if case == CoefficientCase::Diagonal || n < 2 {
                        b[0] = one;
                    } else {
                        b[1] = one;
                        b[n] = one;
                    }
                }
                CoefficientFixture::Random => {
                    for i in 0..n {
                        b[i * n + i] = Complex64::new(rng.sample(StandardNormal), 0.0);
                        for j in i + 1..n {
                            let v = complex_normal(&mut rng);
                            b[i * n + j] = v;
                            b[j * n + i] = v.conj();
                        }
                    }
                }
            }
            Coeffs::Matrix(b)
        }
    }
}

/// Probability that a linear or quadratic form in i.i.d. entries drawn from
/// `d` (variance σ² = 1) exceeds the large-deviation threshold
/// `(log N)^{3/2+α}σ‖A‖₂`, `(log N)^{3/2+2α}σ²(Σ|B_ii|²)^{1/2}` or
/// `(log N)^{3+2α}σ²(Σ_{i≠j}|B_ij|²)^{1/2}`, with α the distribution's
/// subexponential exponent.
///
/// Trial t draws a_1..a_n from `rng_from(job_seed(seed, t))`. A form that is
/// identically zero never counts as an exceedance.
pub fn large_deviation_mc(
    d: &EntryDistribution,
    n: usize,
    trials: usize,
    case: CoefficientCase,
    fixture: CoefficientFixture,
    seed: u64,
) -> LargeDeviationResult {
    let coeffs = build(n, case, fixture, seed);
    let ln = (n.max(2) as f64).ln();
    let alpha = d.subexp_alpha();
    let (norm, power) = match (&coeffs, case) {
        (Coeffs::Vector(a), _) => (a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(), 1.5 + alpha),
        (Coeffs::Matrix(b), CoefficientCase::Diagonal) => {
            ((0..n).map(|i| b[i * n + i].norm_sqr()).sum::<f64>().sqrt(), 1.5 + 2.0 * alpha)
        }
        (Coeffs::Matrix(b), _) => {
            let s: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| b[i * n + j].norm_sqr())).sum();
            (s.sqrt(), 3.0 + 2.0 * alpha)
        }
    };
    let threshold = ln.powf(power) * norm;
    let exceedances = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = rng_from(job_seed(seed, t as u64));
            let a: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            let value = match (&coeffs, case) {
                (Coeffs::Vector(c), _) => a.iter().zip(c).map(|(x, c)| c * *x).sum::<Complex64>().norm(),
                (Coeffs::Matrix(b), CoefficientCase::Diagonal) => {
                    (0..n).map(|i| b[i * n + i] * (a[i] * a[i] - 1.0)).sum::<Complex64>().norm()
                }
                (Coeffs::Matrix(b), _) => {
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        let row = &b[i * n..(i + 1) * n];
                        let mut r = Complex64::new(0.0, 0.0);
                        for j in 0..n {
                            if j != i {
                                r += row[j] * a[j];
                            }
                        }
                        s += r * a[i];
                    }
                    s.norm()
                }
            };
            norm > 0.0 && value > threshold
        })
        .count();
    let (ci_low, ci_high) = wilson_interval(exceedances, trials, 1.96);
    LargeDeviationResult {
        threshold,
        exceedances,
        trials,
        rate: if trials == 0 { 0.0 } else { exceedances as f64 / trials as f64 },
        ci_low,
        ci_high,
    }
}
