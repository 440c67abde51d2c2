use serde::Serialize;

use crate::semicircle::{classical_locations, nsc};

/// 𝔫(E) = #{λ_j ≤ E}/N for an ascending spectrum.
pub fn counting_function(spectrum: &[f64], e: f64) -> f64 {
    spectrum.partition_point(|&l| l <= e) as f64 / spectrum.len() as f64
}

/// sup_{|E|≤3} |𝔫(E) − n_sc(E)|·κ_E^A, evaluated on both sides of every
/// jump in [−3, 3] and on a uniform grid of 10·n points.
pub fn counting_gap(spectrum: &[f64], a_exponent: f64) -> f64 {
    let n = spectrum.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let weight = |e: f64| (e.abs() - 2.0).abs().powf(a_exponent);
    let mut sup = 0.0f64;
    for (j, &l) in spectrum.iter().enumerate() {
        if !(-3.0..=3.0).contains(&l) {
            continue;
        }
        let w = weight(l);
        let s = nsc(l);
        // Left limit counts strictly smaller eigenvalues; ties share a jump.
        let left = spectrum[..j].partition_point(|&x| x < l) as f64 / nf;
        let right = counting_function(spectrum, l);
        sup = sup.max((left - s).abs() * w).max((right - s).abs() * w);
    }
    let m = 10 * n;
    for k in 0..=m {
        let e = -3.0 + 6.0 * k as f64 / m as f64;
        sup = sup.max((counting_function(spectrum, e) - nsc(e)).abs() * weight(e));
    }
    sup
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityStat {
    /// Σ_j (λ_j − γ_j)²
    pub total: f64,
    pub deviations: Vec<f64>,
}

pub fn rigidity_stat(spectrum: &[f64]) -> RigidityStat {
    let gamma = classical_locations(spectrum.len());
    let deviations: Vec<f64> = spectrum.iter().zip(&gamma).map(|(l, g)| l - g).collect();
    RigidityStat { total: deviations.iter().map(|d| d * d).sum(), deviations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCheck {
    /// 2 + n^{−1/6+ε}
    pub bound: f64,
    /// λ₁ − (−bound)
    pub lower_margin: f64,
    /// bound − λ_n
    pub upper_margin: f64,
    pub passes: bool,
    /// max |λ| ≤ 3
    pub norm_ok: bool,
}

pub fn edge_check(spectrum: &[f64], epsilon: f64) -> EdgeCheck {
    let n = spectrum.len().max(1) as f64;
    let bound = 2.0 + n.powf(-1.0 / 6.0 + epsilon);
    let lo = spectrum.first().copied().unwrap_or(0.0);
    let hi = spectrum.last().copied().unwrap_or(0.0);
    let lower_margin = lo + bound;
    let upper_margin = bound - hi;
    EdgeCheck {
        bound,
        lower_margin,
        upper_margin,
        passes: lower_margin >= 0.0 && upper_margin >= 0.0,
        norm_ok: lo.abs().max(hi.abs()) <= 3.0,
    }
}
