//! Dyson Brownian motion on matrices and on eigenvalues, and the spectral
//! statistics behind the universality assumptions.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ensembles::{catalog_distribution, MatrixSample, SymmetryClass};
use crate::linalg::{HermitianMatrix, LinalgError};
use crate::seed::{job_seed, rng_from};
use crate::semicircle::{classical_locations, nsc};

pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Error)]
pub enum DbmError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ordering violated after {halvings} step halvings (dt = {dt:e})")]
    Step { halvings: u32, dt: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// e^{−t/2} and (1 − e^{−t})^{1/2}.
pub fn flow_coefficients(t: f64) -> (f64, f64) {
    ((-0.5 * t).exp(), (-(-t).exp_m1()).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub h0: MatrixSample,
    pub v: MatrixSample,
    pub ht: HermitianMatrix,
}

/// h_t = e^{−t/2}h₀ + (1 − e^{−t})^{1/2}v, entrywise and exact.
pub fn flow_interpolate(h0: &MatrixSample, v: &MatrixSample, t: f64) -> Result<FlowState, DbmError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DbmError::Config(format!("flow time must be finite and nonnegative, got {t}")));
    }
    if h0.profile_id != v.profile_id || h0.n() != v.n() {
        return Err(DbmError::Config(format!("profile mismatch: {} vs {}", h0.profile_id, v.profile_id)));
    }
    if h0.symmetry_class != v.symmetry_class {
        return Err(DbmError::Config("h0 and v have different symmetry classes".into()));
    }
    let gaussian = catalog_distribution("gaussian").expect("catalog entry").id();
    if v.dist_id != gaussian {
        return Err(DbmError::Config(format!("v must be Gaussian, got distribution {}", v.dist_id)));
    }
    let (a, b) = flow_coefficients(t);
    let ht = h0.entries.lin_comb(a, &v.entries, b)?;
    Ok(FlowState { t, h0: h0.clone(), v: v.clone(), ht })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleState {
    pub x: Vec<f64>,
    pub beta: SymmetryClass,
    pub time: f64,
}

impl ParticleState {
    pub fn new(x: Vec<f64>, beta: SymmetryClass) -> Result<Self, DbmError> {
        if !is_strictly_ordered(&x) {
            return Err(DbmError::Config("initial particles must be strictly increasing".into()));
        }
        Ok(Self { x, beta, time: 0.0 })
    }
}

fn is_strictly_ordered(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite()) && x.windows(2).all(|w| w[0] < w[1])
}

/// −(β/4)x_i + (β/2N)Σ_{j≠i} 1/(x_i − x_j)
pub fn drift(x: &[f64], beta: f64) -> Vec<f64> {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let s: f64 = x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| 1.0 / (xi - xj)).sum();
            -0.25 * beta * xi + beta / (2.0 * n) * s
        })
        .collect()
}

/// One Euler–Maruyama step with noise drawn from `rng_from(noise_seed)`.
pub fn sde_step(state: &ParticleState, dt: f64, noise_seed: u64) -> Result<ParticleState, DbmError> {
    let mut rng = rng_from(noise_seed);
    let g: Vec<f64> = (0..state.x.len()).map(|_| rng.sample(StandardNormal)).collect();
    sde_step_with_noise(state, dt, &g)
}

/// Euler–Maruyama step with the supplied standard normals. When the step
/// breaks the ordering it is retried with dt/2, reusing `g`.
pub fn sde_step_with_noise(state: &ParticleState, dt: f64, g: &[f64]) -> Result<ParticleState, DbmError> {
    if !(dt > 0.0) {
        return Err(DbmError::Config(format!("dt must be positive, got {dt}")));
    }
    if g.len() != state.x.len() {
        return Err(DbmError::Config(format!("{} noise values for {} particles", g.len(), state.x.len())));
    }
    let n = state.x.len() as f64;
    let f = drift(&state.x, state.beta.beta_f64());
    let mut h = dt;
    for _ in 0..=MAX_HALVINGS {
        let s = (h / n).sqrt();
        let x: Vec<f64> = state.x.iter().zip(&f).zip(g).map(|((x, f), g)| x + h * f + s * g).collect();
        if is_strictly_ordered(&x) {
            return Ok(ParticleState { x, beta: state.beta, time: state.time + h });
        }
        h *= 0.5;
    }
    Err(DbmError::Step { halvings: MAX_HALVINGS, dt: h * 2.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let n = self.snapshots.first().map_or(0, Vec::len);
        let mut s = String::from("# rmt-locallaw v1 schema=dbm-trajectory\nt");
        for i in 1..=n {
            let _ = write!(s, ",x{i}");
        }
        s.push('\n');
        for (t, x) in self.times.iter().zip(&self.snapshots) {
            let _ = write!(s, "{t}");
            for v in x {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.snapshots.last().map(Vec::as_slice)
    }
}

/// Runs `steps` SDE steps, step k using noise seed `job_seed(seed, k)`, and
/// records the initial state and every `stride`-th state.
pub fn simulate(
    initial: &ParticleState,
    dt: f64,
    steps: usize,
    seed: u64,
    stride: usize,
) -> Result<Trajectory, DbmError> {
    let stride = stride.max(1);
    let mut state = initial.clone();
    let mut traj = Trajectory { times: vec![state.time], snapshots: vec![state.x.clone()] };
    for k in 0..steps {
        state = sde_step(&state, dt, job_seed(seed, k as u64))?;
        if (k + 1) % stride == 0 {
            traj.times.push(state.time);
            traj.snapshots.push(state.x.clone());
        }
    }
    Ok(traj)
}

/// Independent trajectories in parallel; trajectory r uses seed `job_seed(seed, r)`.
pub fn simulate_many(
    initial: &ParticleState,
    dt: f64,
    steps: usize,
    seed: u64,
    stride: usize,
    count: usize,
) -> Result<Vec<Trajectory>, DbmError> {
    (0..count)
        .into_par_iter()
        .map(|r| simulate(initial, dt, steps, job_seed(seed, r as u64), stride))
        .collect()
}

/// |mean over samples of N⁻¹#{λ_j ∈ [a, b]} − ∫_a^b ρ_sc|
pub fn assumption_ii_stat(spectra: &[Vec<f64>], a: f64, b: f64) -> f64 {
    if spectra.is_empty() {
        return f64::NAN;
    }
    let mean = spectra
        .iter()
        .map(|s| s.iter().filter(|&&l| a <= l && l <= b).count() as f64 / s.len() as f64)
        .sum::<f64>()
        / spectra.len() as f64;
    (mean - (nsc(b) - nsc(a))).abs()
}

/// N⁻¹Σ_j (x_j − γ_j)²
pub fn assumption_iii_stat(spectrum: &[f64]) -> f64 {
    let gamma = classical_locations(spectrum.len());
    spectrum.iter().zip(&gamma).map(|(x, g)| (x - g).powi(2)).sum::<f64>() / spectrum.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityBound {
    pub count: usize,
    /// count ≥ K·N·|I|
    pub exceeds: bool,
}

/// 𝒩_I = #{λ ∈ [a, b]} against K·N·|I|. The interval must sit inside
/// (−2, 2) and have length at least N^{−1+σ}.
pub fn assumption_iv_stat(spectrum: &[f64], a: f64, b: f64, k: f64, sigma: f64) -> Result<DensityBound, DbmError> {
    let n = spectrum.len();
    if !(-2.0 < a && a < b && b < 2.0) {
        return Err(DbmError::Config(format!("interval [{a}, {b}] must lie inside (-2, 2)")));
    }
    let min_len = (n as f64).powf(-1.0 + sigma);
    if b - a < min_len {
        return Err(DbmError::Config(format!("interval length {} below N^(-1+sigma) = {min_len}", b - a)));
    }
    let count = spectrum.iter().filter(|&&l| a <= l && l <= b).count();
    Ok(DensityBound { count, exceeds: count as f64 >= k * n as f64 * (b - a) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, wigner_profile};

    fn pair(n: usize, d: &str, beta: SymmetryClass) -> (MatrixSample, MatrixSample) {
        let p = wigner_profile(n).unwrap();
        let h0 = sample_matrix(&p, &catalog_distribution(d).unwrap(), beta, 1).unwrap();
        let v = sample_matrix(&p, &catalog_distribution("gaussian").unwrap(), beta, 2).unwrap();
        (h0, v)
    }

    #[test]
    fn coefficient_identity() {
        for k in 0..=200 {
            let t = 0.05 * k as f64;
            let (a, b) = flow_coefficients(t);
            assert!((a * a + b * b - 1.0).abs() <= 1e-15, "t={t}");
        }
    }

    #[test]
    fn flow_examples() {
        let (h0, v) = pair(8, "bernoulli", SymmetryClass::Complex);
        let s = flow_interpolate(&h0, &v, 0.0).unwrap();
        assert_eq!(s.ht, h0.entries);
        let s = flow_interpolate(&h0, &v, 2f64.ln()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..8 {
            for j in 0..8 {
                let want = h0.entries.get(i, j) * r + v.entries.get(i, j) * r;
                assert!((s.ht.get(i, j) - want).norm() < 1e-15);
            }
        }
        assert_eq!(s.ht.hermitian_defect(), 0.0);
        let s = flow_interpolate(&h0, &v, 50.0).unwrap();
        let d = s.ht.lin_comb(1.0, &v.entries, -1.0).unwrap().max_abs();
        assert!(d < 2e-11 * h0.entries.max_abs() + 1e-15);
    }

    #[test]
    fn flow_rejects_mismatch() {
        let (h0, v) = pair(8, "bernoulli", SymmetryClass::Complex);
        assert!(flow_interpolate(&h0, &h0, 1.0).is_err());
        let (_, w) = pair(9, "bernoulli", SymmetryClass::Complex);
        assert!(flow_interpolate(&h0, &w, 1.0).is_err());
        let (_, r) = pair(8, "bernoulli", SymmetryClass::Real);
        assert!(flow_interpolate(&h0, &r, 1.0).is_err());
        assert!(flow_interpolate(&h0, &v, -1.0).is_err());
    }

    #[test]
    fn two_particle_drift() {
        let s = ParticleState::new(vec![-1.0, 1.0], SymmetryClass::Complex).unwrap();
        let next = sde_step_with_noise(&s, 0.01, &[0.0, 0.0]).unwrap();
        assert!((next.x[0] + 0.9975).abs() < 1e-15);
        assert!((next.x[1] - 0.9975).abs() < 1e-15);
        assert_eq!(next.time, 0.01);
    }

    #[test]
    fn zero_noise_preserves_symmetry_and_centre() {
        let x: Vec<f64> = (0..21).map(|i| -1.5 + 0.15 * i as f64).collect();
        let mut s = ParticleState::new(x, SymmetryClass::Real).unwrap();
        let g = vec![0.0; 21];
        for _ in 0..50 {
            s = sde_step_with_noise(&s, 1e-3, &g).unwrap();
        }
        for i in 0..21 {
            assert!((s.x[i] + s.x[20 - i]).abs() < 1e-13, "{i} {}", s.x[i] + s.x[20 - i]);
        }
        // Shifted start: the mean decays like e^{−βt/4}; the pair forces cancel.
        let x: Vec<f64> = classical_locations(10).iter().map(|v| v + 0.5).collect();
        let s0 = ParticleState::new(x, SymmetryClass::Complex).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let dt = 1e-3;
        let s1 = sde_step_with_noise(&s0, dt, &[0.0; 10]).unwrap();
        let want = mean(&s0.x) * (1.0 - 0.5 * dt);
        assert!((mean(&s1.x) - want).abs() < 1e-13);
    }

    #[test]
    fn collision_triggers_halving() {
        let s = ParticleState::new(vec![-1e-3, 1e-3], SymmetryClass::Complex).unwrap();
        // Noise pushes the particles through each other at the full step.
        let next = sde_step_with_noise(&s, 1e-4, &[5.0, -5.0]).unwrap();
        assert!(next.time < 1e-6);
        assert!(next.x[0] < next.x[1]);
        assert!(matches!(sde_step_with_noise(&s, 1e-4, &[1e6, -1e6]), Err(DbmError::Step { .. })));
        assert!(ParticleState::new(vec![0.0, 0.0], SymmetryClass::Complex).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let s = ParticleState::new(vec![-1.0, 0.0, 1.0], SymmetryClass::Complex).unwrap();
        let t = simulate(&s, 1e-3, 10, 4, 5).unwrap();
        assert_eq!(t.times.len(), 3);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "t,x1,x2,x3");
        assert_eq!(lines.len(), 5);
        assert_eq!(simulate(&s, 1e-3, 10, 4, 5).unwrap(), t);
    }

    #[test]
    fn assumption_examples() {
        let n = 200;
        let g = classical_locations(n);
        assert!(assumption_ii_stat(&[g.clone()], -2.0, 2.0) <= 1.0 / n as f64);
        assert_eq!(assumption_ii_stat(&[g.clone()], 3.5, 4.0), 0.0);
        assert_eq!(assumption_iii_stat(&g), 0.0);
        let shifted: Vec<f64> = g.iter().map(|x| x + 0.01).collect();
        assert!((assumption_iii_stat(&shifted) - 1e-4).abs() < 1e-15);

        let r = assumption_iv_stat(&g, -0.5, 0.5, 2.0, 0.1).unwrap();
        assert!(!r.exceeds && r.count > 0);
        assert!(assumption_iv_stat(&g, -0.5, 0.5, 0.0, 0.1).unwrap().exceeds);
        let gap = [-1.5, -1.0, 1.0, 1.5];
        assert_eq!(assumption_iv_stat(&gap, -0.5, 0.5, 1.0, 0.1).unwrap().count, 0);
        assert!(assumption_iv_stat(&g, -0.5, -0.4999, 1.0, 0.1).is_err());
        assert!(assumption_iv_stat(&g, -2.5, 0.5, 1.0, 0.1).is_err());
    }
}
