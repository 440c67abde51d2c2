//! Four-moment arithmetic: laws with prescribed third and fourth moments,
//! Gaussian-divisible matching, and tail checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::{DistributionKind, EnsembleError, EntryDistribution};

/// Default cap on admissible fourth moments.
pub const DEFAULT_M4_CAP: f64 = 100.0;
const FEAS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("infeasible moments m3={m3}, m4={m4}: need m4 - m3^2 >= 1")]
    Infeasible { m3: f64, m4: f64 },
    #[error("m4={m4} exceeds the cap {cap}")]
    AboveCap { m4: f64, cap: f64 },
    #[error("gaussian weight {0} must lie in (0, 1)")]
    Gamma(f64),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Third and fourth moment of a standardized law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTarget {
    pub m3: f64,
    pub m4: f64,
}

impl MomentTarget {
    pub fn new(m3: f64, m4: f64) -> Result<Self, MomentError> {
        Self::with_cap(m3, m4, DEFAULT_M4_CAP)
    }

    pub fn with_cap(m3: f64, m4: f64, cap: f64) -> Result<Self, MomentError> {
        if !(m3.is_finite() && m4.is_finite()) || m4 - m3 * m3 < 1.0 - FEAS_TOL {
            return Err(MomentError::Infeasible { m3, m4 });
        }
        if m4 > cap {
            return Err(MomentError::AboveCap { m4, cap });
        }
        Ok(Self { m3, m4 })
    }
}

/// Law with moments (0, 1, m3, m4): an atom at 0 of weight 1 − 1/D mixed with
/// the two-point law s·{a, −1/a}, D = m4 − m3², s = √D.
pub fn three_point_construct(t: MomentTarget) -> Result<EntryDistribution, MomentError> {
    let d = t.m4 - t.m3 * t.m3;
    if d < 1.0 - FEAS_TOL {
        return Err(MomentError::Infeasible { m3: t.m3, m4: t.m4 });
    }
    let d = d.max(1.0);
    let s = d.sqrt();
    let w = 1.0 - 1.0 / d;
    let mu = t.m3 / s;
    let a = (mu + (mu * mu + 4.0).sqrt()) / 2.0;
    let p_pos = (1.0 - w) / (1.0 + a * a);
    let p_neg = (1.0 - w) * a * a / (1.0 + a * a);
    let mut atoms = vec![(-s / a, p_neg)];
    if w > 0.0 {
        atoms.push((0.0, w));
    }
    atoms.push((s * a, p_pos));
    Ok(EntryDistribution::from_atoms(atoms)?)
}

/// Moments of √(1−γ)·ζ + √γ·G from those of ζ.
pub fn gaussian_divisible_transform(m3: f64, m4: f64, gamma: f64) -> (f64, f64) {
    let g = 1.0 - gamma;
    (g.powf(1.5) * m3, g * g * m4 + 6.0 * gamma - 3.0 * gamma * gamma)
}

/// How the fourth moment of ξ_γ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStrategy {
    /// m4(ξ_γ) = m3(ξ_γ)² + (m4 − m3²): the variance of ξ² is carried over.
    #[default]
    PaperShift,
    /// m4(ξ_γ) solves the fourth-moment relation exactly, raised to the
    /// feasibility floor m3(ξ_γ)² + 1 when the exact value is infeasible.
    ExactFourth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedLaw {
    pub target: MomentTarget,
    pub strategy: MatchStrategy,
    pub xi_gamma: EntryDistribution,
    pub gamma: f64,
    pub achieved_m3: f64,
    pub achieved_m4: f64,
}

impl MatchedLaw {
    pub fn delta_m4(&self) -> f64 {
        self.achieved_m4 - self.target.m4
    }

    /// ξ' = √(1−γ)·ξ_γ + √γ·G as a sampleable entry law.
    pub fn distribution(&self) -> EntryDistribution {
        self.xi_gamma.gaussian_divisible(self.gamma).expect("gamma validated at construction")
    }
}

/// Builds ξ_γ so that √(1−γ)ξ_γ + √γG has third moment m3 exactly and fourth
/// moment close to m4.
pub fn match_four_moments(t: MomentTarget, gamma: f64, strategy: MatchStrategy) -> Result<MatchedLaw, MomentError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(MomentError::Gamma(gamma));
    }
    let m3g = (1.0 - gamma).powf(-1.5) * t.m3;
    let floor = m3g * m3g + 1.0;
    let m4g = match strategy {
        MatchStrategy::PaperShift => m3g * m3g + (t.m4 - t.m3 * t.m3),
        MatchStrategy::ExactFourth => {
            let exact = (t.m4 - 6.0 * gamma + 3.0 * gamma * gamma) / (1.0 - gamma).powi(2);
            exact.max(floor)
        }
    };
    let xi = three_point_construct(MomentTarget { m3: m3g, m4: m4g.max(floor) })?;
    let (achieved_m3, achieved_m4) = gaussian_divisible_transform(xi.m3(), xi.m4(), gamma);
    Ok(MatchedLaw { target: t, strategy, xi_gamma: xi, gamma, achieved_m3, achieved_m4 })
}

/// Smallest |Δm4| any Gaussian-divisible law with exact third moment can
/// reach: ξ_γ must satisfy m4 ≥ m3² + 1.
pub fn min_fourth_moment_error(t: MomentTarget, gamma: f64) -> f64 {
    let floor = t.m3 * t.m3 / (1.0 - gamma) + 1.0 + 4.0 * gamma - 2.0 * gamma * gamma;
    (floor - t.m4).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct No3No4 {
    /// m4/m2² − m3²/m2³
    pub value: f64,
    /// value > 1
    pub passes: bool,
}

pub fn check_no3no4(d: &EntryDistribution) -> No3No4 {
    let m2 = 1.0;
    let value = d.m4() / (m2 * m2) - d.m3() * d.m3() / (m2 * m2 * m2);
    No3No4 { value, passes: value > 1.0 }
}

/// P(|ξ| ≥ t).
pub trait TailProbability {
    fn tail(&self, t: f64) -> f64;
}

fn normal_upper(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

impl TailProbability for EntryDistribution {
    fn tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let gw = self.gaussian_weight();
        let (a, b) = match gw {
            Some(g) => ((1.0 - g).sqrt(), g.sqrt()),
            None => (1.0, 0.0),
        };
        // P(|a x + b G| ≥ t) for a fixed base value x.
        let point = |x: f64| -> f64 {
            if b == 0.0 {
                if (a * x).abs() >= t {
                    1.0
                } else {
                    0.0
                }
            } else {
                normal_upper((t - a * x) / b) + normal_upper((t + a * x) / b)
            }
        };
        match self.kind() {
            DistributionKind::Gaussian => 2.0 * normal_upper(t),
            DistributionKind::Bernoulli | DistributionKind::DiscreteAtoms => {
                self.atoms().unwrap_or(&[]).iter().map(|&(x, p)| p * point(x)).sum()
            }
            DistributionKind::Uniform => {
                let r = 3f64.sqrt();
                if b == 0.0 {
                    return (1.0 - t / r).max(0.0);
                }
                // Simpson over the uniform base.
                let m = 2000;
                let h = 2.0 * r / m as f64;
                let mut s = point(-r) + point(r);
                for k in 1..m {
                    s += point(-r + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                (s * h / 3.0 / (2.0 * r)).min(1.0)
            }
        }
    }
}

/// Fixture with P(|ξ| ≥ t) = min(1, t^{−p}).
#[derive(Debug, Clone, Copy)]
pub struct PowerTail {
    pub exponent: f64,
}

impl TailProbability for PowerTail {
    fn tail(&self, t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else {
            t.powf(-self.exponent)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubexpReport {
    pub worst_ratio: f64,
    pub worst_x: f64,
    pub passes: bool,
}

/// max over the grid of P(|ξ| ≥ x^α) / (β e^{−x}); passes iff ≤ 1.
pub fn subexp_verify<T: TailProbability + ?Sized>(d: &T, alpha: f64, beta_c: f64, x_grid: &[f64]) -> SubexpReport {
    let mut worst = (0.0f64, f64::NAN);
    for &x in x_grid {
        // Compare in log space: e^{−x} underflows long before the ratio matters.
        let p = d.tail(x.powf(alpha));
        let r = if p == 0.0 { 0.0 } else { (p.ln() - beta_c.ln() + x).exp() };
        if r > worst.0 || worst.1.is_nan() {
            worst = (r, x);
        }
    }
    SubexpReport { worst_ratio: worst.0, worst_x: worst.1, passes: worst.0 <= 1.0 }
}
