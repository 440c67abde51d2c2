use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::EnsembleError;
use crate::linalg::{eigvalsh, HermitianMatrix};

const SINKHORN_ITERS: usize = 50;
const SINKHORN_TOL: f64 = 1e-12;

/// Entry variances σ²_ij with derived parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord", into = "ProfileRecord")]
pub struct VarianceProfile {
    n: usize,
    variances: Vec<f64>,
    m_param: f64,
    c_inf: f64,
    c_sup: f64,
    sigma_spectrum: Vec<f64>,
    delta_minus: f64,
    delta_plus: f64,
}

/// JSON form. Derived fields are written for readers but recomputed on load.
#[derive(Serialize, Deserialize)]
struct ProfileRecord {
    n: usize,
    variances: Vec<f64>,
    #[serde(default)]
    m_param: Option<f64>,
    #[serde(default)]
    c_inf: Option<f64>,
    #[serde(default)]
    c_sup: Option<f64>,
    #[serde(default)]
    sigma_spectrum: Option<Vec<f64>>,
    #[serde(default)]
    delta_minus: Option<f64>,
    #[serde(default)]
    delta_plus: Option<f64>,
}

impl TryFrom<ProfileRecord> for VarianceProfile {
    type Error = EnsembleError;
    fn try_from(r: ProfileRecord) -> Result<Self, Self::Error> {
        VarianceProfile::from_variances(r.n, r.variances)
    }
}

impl From<VarianceProfile> for ProfileRecord {
    fn from(p: VarianceProfile) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        ProfileRecord {
            n: p.n,
            m_param: finite(p.m_param),
            c_inf: Some(p.c_inf),
            c_sup: Some(p.c_sup),
            delta_minus: Some(p.delta_minus),
            delta_plus: Some(p.delta_plus),
            sigma_spectrum: Some(p.sigma_spectrum),
            variances: p.variances,
        }
    }
}

/// Band shape f in W⁻¹ f([i−j]_N / W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandShape {
    /// 1 on |x| < 1
    Indicator,
    /// max(0, 1 − |x|)
    Triangle,
    /// exp(−x²/2)
    Gaussian,
}

impl BandShape {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BandShape::Indicator => {
                if x.abs() < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            BandShape::Triangle => (1.0 - x.abs()).max(0.0),
            BandShape::Gaussian => (-0.5 * x * x).exp(),
        }
    }
}

/// Config-level description of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Wigner,
    Band { width: usize, shape: BandShape },
}

impl ProfileSpec {
    pub fn build(&self, n: usize) -> Result<VarianceProfile, EnsembleError> {
        match *self {
            ProfileSpec::Wigner => wigner_profile(n),
            ProfileSpec::Band { width, shape } => band_profile(n, width, |x| shape.eval(x)),
        }
    }
}

/// One violated condition found by [`validate_profile`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Violation {
    NegativeVariance { min: f64 },
    Asymmetric { defect: f64 },
    ColumnSum { column: usize, residual: f64 },
    TopEigenvalue { value: f64 },
    GapPlus { delta_plus: f64 },
    GapMinus { delta_minus: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    /// max_j |Σ_i σ²_ij − 1|
    pub sum_residual: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// 0 < C_inf ≤ C_sup < ∞
    pub generalized_wigner: bool,
    pub edge_exponent_a: u8,
    pub violations: Vec<Violation>,
}

impl ProfileReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

impl VarianceProfile {
    /// Builds a profile from a row-major n×n grid and computes the derived
    /// parameters. Column sums are not enforced here; see [`validate_profile`].
    pub fn from_variances(n: usize, variances: Vec<f64>) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::InvalidDimension(0));
        }
        if variances.len() != n * n {
            return Err(EnsembleError::Shape { expected: n * n, found: variances.len() });
        }
        if variances.iter().any(|v| !v.is_finite()) {
            return Err(EnsembleError::DegenerateProfile("non-finite variance".into()));
        }
        let max = variances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = variances.iter().copied().fold(f64::INFINITY, f64::min);
        let sym = HermitianMatrix::from_upper(n, true, |i, j| num_complex::Complex64::new(variances[i * n + j], 0.0));
        let sigma_spectrum = eigvalsh(&sym).map_err(|e| EnsembleError::DegenerateProfile(e.to_string()))?;
        Ok(Self::assemble(n, variances, min, max, sigma_spectrum))
    }

    fn assemble(n: usize, variances: Vec<f64>, min: f64, max: f64, sigma_spectrum: Vec<f64>) -> Self {
        let (delta_plus, delta_minus) = if n == 1 {
            (1.0, 1.0)
        } else {
            (1.0 - sigma_spectrum[n - 2], 1.0 + sigma_spectrum[0])
        };
        let m_param = if max > 0.0 { 1.0 / max } else { f64::INFINITY };
        Self {
            n,
            variances,
            m_param,
            c_inf: n as f64 * min,
            c_sup: n as f64 * max,
            sigma_spectrum,
            delta_minus,
            delta_plus,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    #[inline]
    pub fn variance(&self, i: usize, j: usize) -> f64 {
        self.variances[i * self.n + j]
    }

    /// M = 1/max σ²_ij
    pub fn m_param(&self) -> f64 {
        self.m_param
    }

    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    pub fn c_sup(&self) -> f64 {
        self.c_sup
    }

    pub fn sigma_spectrum(&self) -> &[f64] {
        &self.sigma_spectrum
    }

    pub fn delta_plus(&self) -> f64 {
        self.delta_plus
    }

    pub fn delta_minus(&self) -> f64 {
        self.delta_minus
    }

    pub fn edge_exponent_a(&self) -> u8 {
        if self.c_inf > 0.0 && self.c_sup.is_finite() {
            1
        } else {
            2
        }
    }

    /// Short content hash used as a provenance id.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for v in &self.variances {
            h.update(v.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// σ²_ij = 1/n.
pub fn wigner_profile(n: usize) -> Result<VarianceProfile, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::InvalidDimension(0));
    }
    let v = 1.0 / n as f64;
    let mut spectrum = vec![0.0; n];
    spectrum[n - 1] = 1.0;
    Ok(VarianceProfile::assemble(n, vec![v; n * n], v, v, spectrum))
}

/// Periodic band profile W⁻¹ f([i−j]_N / W), normalized to be doubly
/// stochastic.
///
/// [i−j]_N is the periodic distance min(|i−j|, N−|i−j|), so the diagonal
/// carries the weight f(0).
pub fn band_profile(n: usize, w: usize, shape: impl Fn(f64) -> f64) -> Result<VarianceProfile, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::InvalidDimension(0));
    }
    if w == 0 || w > n {
        return Err(EnsembleError::InvalidBandwidth { w, n });
    }
    let wf = w as f64;
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = i.abs_diff(j);
            let d = d.min(n - d) as f64;
            let f = shape(d / wf);
            if !(f >= 0.0) || !f.is_finite() {
                return Err(EnsembleError::DegenerateProfile(format!("shape value {f} at offset {d}")));
            }
            s[i * n + j] = f / wf;
        }
    }
    if s.iter().all(|&x| x == 0.0) {
        return Err(EnsembleError::DegenerateProfile("shape vanishes on the lattice".into()));
    }
    sinkhorn(n, &mut s)?;
    VarianceProfile::from_variances(n, s)
}

/// Alternate column rescaling and symmetrization until column sums are 1.
fn sinkhorn(n: usize, s: &mut [f64]) -> Result<(), EnsembleError> {
    let mut col = vec![0.0; n];
    for _ in 0..SINKHORN_ITERS {
        col.iter_mut().for_each(|c| *c = 0.0);
        for i in 0..n {
            for j in 0..n {
                col[j] += s[i * n + j];
            }
        }
        if col.iter().any(|&c| c == 0.0) {
            return Err(EnsembleError::DegenerateProfile("empty column".into()));
        }
        let worst = col.iter().map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
        if worst <= SINKHORN_TOL {
            return Ok(());
        }
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] /= col[j];
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let m = 0.5 * (s[i * n + j] + s[j * n + i]);
                s[i * n + j] = m;
                s[j * n + i] = m;
            }
        }
    }
    Ok(())
}

pub fn validate_profile(p: &VarianceProfile) -> ProfileReport {
    let n = p.n;
    let mut violations = Vec::new();
    let min = p.variances.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        violations.push(Violation::NegativeVariance { min });
    }
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            defect = defect.max((p.variance(i, j) - p.variance(j, i)).abs());
        }
    }
    if defect > 1e-12 {
        violations.push(Violation::Asymmetric { defect });
    }
    let mut sum_residual = 0.0f64;
    let mut worst_col = 0;
    for j in 0..n {
        let c: f64 = (0..n).map(|i| p.variance(i, j)).sum();
        let r = (c - 1.0).abs();
        if r > sum_residual {
            sum_residual = r;
            worst_col = j;
        }
    }
    if sum_residual > 1e-12 {
        violations.push(Violation::ColumnSum { column: worst_col, residual: sum_residual });
    }
    let top = p.sigma_spectrum[n - 1];
    if (top - 1.0).abs() > 1e-9 {
        violations.push(Violation::TopEigenvalue { value: top });
    }
    if !(p.delta_plus > 0.0) {
        violations.push(Violation::GapPlus { delta_plus: p.delta_plus });
    }
    if !(p.delta_minus > 0.0) {
        violations.push(Violation::GapMinus { delta_minus: p.delta_minus });
    }
    ProfileReport {
        sum_residual,
        delta_plus: p.delta_plus,
        delta_minus: p.delta_minus,
        generalized_wigner: p.edge_exponent_a() == 1,
        edge_exponent_a: p.edge_exponent_a(),
        violations,
    }
}
