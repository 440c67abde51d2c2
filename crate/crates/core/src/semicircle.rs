//! Semicircle law: Stieltjes transform, density, distribution function,
//! classical locations, the control function θ and the spectral domains.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BISECT_TOL: f64 = 1e-14;
const BISECT_MAX: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemicircleError {
    #[error("spectral point needs eta > 0, got {0}")]
    Domain(f64),
}

/// z = E + iη.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub e: f64,
    pub eta: f64,
}

impl SpectralPoint {
    pub fn new(e: f64, eta: f64) -> Result<Self, SemicircleError> {
        if eta > 0.0 {
            Ok(Self { e, eta })
        } else {
            Err(SemicircleError::Domain(eta))
        }
    }

    /// κ = ||E| − 2|
    pub fn kappa(&self) -> f64 {
        (self.e.abs() - 2.0).abs()
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }
}

/// m_sc(z), the root of m² + zm + 1 = 0 with Im m > 0.
///
/// The two roots multiply to 1, so the larger one is formed without
/// cancellation and the smaller one as its reciprocal.
pub fn msc(z: Complex64) -> Complex64 {
    let s = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    let a = (-z + s) * 0.5;
    let b = (-z - s) * 0.5;
    let big = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
    let small = 1.0 / big;
    if big.im > 0.0 {
        big
    } else {
        small
    }
}

pub fn msc_eval(p: SpectralPoint) -> Result<Complex64, SemicircleError> {
    if !(p.eta > 0.0) {
        return Err(SemicircleError::Domain(p.eta));
    }
    Ok(msc(p.z()))
}

/// ρ_sc(E) = √(4 − E²)₊ / 2π
pub fn rho_sc(e: f64) -> f64 {
    (4.0 - e * e).max(0.0).sqrt() / (2.0 * PI)
}

/// n_sc(E) = ∫_{−∞}^E ρ_sc
pub fn nsc(e: f64) -> f64 {
    if e <= -2.0 {
        return 0.0;
    }
    if e >= 2.0 {
        return 1.0;
    }
    let v = 0.5 + e * (4.0 - e * e).sqrt() / (4.0 * PI) + (e / 2.0).asin() / PI;
    v.clamp(0.0, 1.0)
}

/// γ_1 < … < γ_n with n_sc(γ_j) = j/n and γ_n = 2.
pub fn classical_locations(n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n];
    if n == 0 {
        return g;
    }
    let nf = n as f64;
    // Solve the lower half by bisection and mirror: n_sc(−x) = 1 − n_sc(x).
    for j in 1..=n {
        if 2 * j < n {
            g[j - 1] = bisect_nsc(j as f64 / nf);
        } else if 2 * j == n {
            g[j - 1] = 0.0;
        } else if j == n {
            g[j - 1] = 2.0;
        } else {
            g[j - 1] = -g[n - j - 1];
        }
    }
    g
}

fn bisect_nsc(target: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    for _ in 0..BISECT_MAX {
        let mid = 0.5 * (lo + hi);
        if nsc(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECT_TOL {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaVariant {
    /// 1/|1 − m²| + 1/max(δ₊, |Re m² − 1|)
    #[default]
    Exact,
    /// (κ + η)^{−A/2}
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    pub delta_plus: f64,
    pub edge_exponent_a: u8,
    #[serde(default)]
    pub variant: ThetaVariant,
}

impl ControlFunction {
    pub fn new(delta_plus: f64, edge_exponent_a: u8) -> Self {
        Self { delta_plus, edge_exponent_a, variant: ThetaVariant::Exact }
    }

    pub fn simplified(mut self) -> Self {
        self.variant = ThetaVariant::Simplified;
        self
    }

    pub fn a(&self) -> f64 {
        self.edge_exponent_a as f64
    }
}

pub fn theta(p: SpectralPoint, ctrl: &ControlFunction) -> f64 {
    match ctrl.variant {
        ThetaVariant::Exact => theta_exact(p, ctrl.delta_plus),
        ThetaVariant::Simplified => (p.kappa() + p.eta).powf(-ctrl.a() / 2.0),
    }
}

fn theta_exact(p: SpectralPoint, delta_plus: f64) -> f64 {
    let m2 = msc(p.z()).powi(2);
    let q = delta_plus.max((m2.re - 1.0).abs());
    1.0 / (1.0 - m2).norm() + 1.0 / q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// √(Mη) ≥ (log N)^{C₁} (κ+η)^{1/4 − A}
    D,
    /// √(Mη) ≥ (log N)^{12+3α} θ² (κ+η)^{1/4}
    DTheorem,
    /// Mη ≥ (log N)^{24+6α} θ⁴ (κ+η)^{1/2}
    DStar,
}

/// Whether the (log N)^k factors in domain and bound formulas are evaluated
/// literally or replaced by 1.
///
/// At any N a computer can handle the literal powers exceed every other
/// factor (e.g. (log 10)^{15} ≈ 2.7·10⁵), so literal domains are empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LogFactors {
    Literal,
    #[default]
    Dropped,
}

impl LogFactors {
    pub fn pow(self, n: usize, k: f64) -> f64 {
        match self {
            LogFactors::Literal => (n as f64).ln().powf(k),
            LogFactors::Dropped => 1.0,
        }
    }
}

/// Membership of z in the domain `variant`, with |E| ≤ 5 and 1/N < η ≤ 10.
pub fn in_domain(
    p: SpectralPoint,
    ctrl: &ControlFunction,
    n: usize,
    m_param: f64,
    variant: Domain,
    alpha: f64,
    logs: LogFactors,
) -> bool {
    let nf = n as f64;
    if !(p.e.abs() <= 5.0 && p.eta > 1.0 / nf && p.eta <= 10.0) {
        return false;
    }
    let ke = p.kappa() + p.eta;
    let meta = m_param * p.eta;
    match variant {
        Domain::D => meta.sqrt() >= logs.pow(n, 12.0 + 3.0 * alpha) * ke.powf(0.25 - ctrl.a()),
        Domain::DTheorem => {
            let t = theta(p, ctrl);
            meta.sqrt() >= logs.pow(n, 12.0 + 3.0 * alpha) * t * t * ke.powf(0.25)
        }
        Domain::DStar => {
            let t = theta(p, ctrl);
            meta >= logs.pow(n, 24.0 + 6.0 * alpha) * t.powi(4) * ke.sqrt()
        }
    }
}

/// One comparability claim f ∼ g evaluated at a grid point.
///
/// Claims: `abs_m_vs_inv_z` (|m| against 1/max(1,|z|)), `one_minus_m2_vs_sqrt_ke`
/// (|1 − m²| against √(κ+η)), `im_m_vs_table` (Im m against √(κ+η) inside the
/// bulk and η/√(κ+η) outside, capped by 1/|z|), `im_m_plus_inv_theta_upper`
/// (Im m + 1/θ against min(1, √(κ+η))).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub claim: &'static str,
    pub e: f64,
    pub eta: f64,
    pub kappa: f64,
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRange {
    pub claim: &'static str,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub max_abs_msc: f64,
    /// max | |m||m+z| − 1 |
    pub identity_residual: f64,
    pub claims: Vec<ClaimRange>,
    pub rows: Vec<GridRow>,
}

impl AsymptoticsReport {
    pub fn claim(&self, name: &str) -> Option<&ClaimRange> {
        self.claims.iter().find(|c| c.claim == name)
    }

    /// Columns: claim, E, eta, kappa, value, bound, ratio.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("claim,E,eta,kappa,value,bound,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", r.claim, r.e, r.eta, r.kappa, r.value, r.bound, r.ratio);
        }
        s
    }
}

/// Evaluates the size relations of m_sc on a grid and reports the observed
/// ratio ranges. `ctrl` supplies θ for the Im m + 1/θ relation.
pub fn msc_asymptotics_check(grid: &[SpectralPoint], ctrl: &ControlFunction) -> AsymptoticsReport {
    let mut rows = Vec::new();
    let mut max_abs = 0.0f64;
    let mut ident = 0.0f64;
    for &p in grid {
        let z = p.z();
        let m = msc(z);
        let k = p.kappa();
        let ke = k + p.eta;
        max_abs = max_abs.max(m.norm());
        ident = ident.max((m.norm() * (m + z).norm() - 1.0).abs());
        let mut push = |claim, value: f64, bound: f64| {
            rows.push(GridRow { claim, e: p.e, eta: p.eta, kappa: k, value, bound, ratio: value / bound });
        };
        push("abs_m_vs_inv_z", m.norm(), 1.0 / z.norm().max(1.0));
        push("one_minus_m2_vs_sqrt_ke", (1.0 - m * m).norm(), ke.sqrt());
        let im_bound = if p.e.abs() <= 2.0 { ke.sqrt() } else { p.eta / ke.sqrt() };
        push("im_m_vs_table", m.im, im_bound.min(1.0 / z.norm().max(1.0)));
        push("im_m_plus_inv_theta_upper", m.im + 1.0 / theta(p, ctrl), ke.sqrt().min(1.0));
    }
    let mut claims: Vec<ClaimRange> = Vec::new();
    for r in &rows {
        match claims.iter_mut().find(|c| c.claim == r.claim) {
            Some(c) => {
                c.min_ratio = c.min_ratio.min(r.ratio);
                c.max_ratio = c.max_ratio.max(r.ratio);
            }
            None => claims.push(ClaimRange { claim: r.claim, min_ratio: r.ratio, max_ratio: r.ratio }),
        }
    }
    AsymptoticsReport { max_abs_msc: max_abs, identity_residual: ident, claims, rows }
}
