use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LocalLawError;
use crate::ensembles::VarianceProfile;
use crate::linalg::{quadratic_form_z, resolvent, ComplexMatrix, HermitianMatrix};
use crate::semicircle::{msc, LogFactors, SpectralPoint};

/// Tolerance on the exact self-consistent identity.
pub const MAINSEEQ_TOL: f64 = 1e-8;

/// How the minors G^{(i)} entering Z_i are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MinorRoute {
    /// Invert every H^{(i)} − z separately. O(n⁴); an independent check.
    #[default]
    Direct,
    /// G^{(i)}_kl = G_kl − G_ki G_il / G_ii and Z^{(i)}_ii = h_ii − z − 1/G_ii. O(n²)
    /// once G is known.
    Schur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsOptions {
    pub route: MinorRoute,
    pub alpha: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self { route: MinorRoute::Direct, alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventDiagnostics {
    pub z: Complex64,
    pub m_n: Complex64,
    /// max_k |G_kk − m_sc|
    pub lambda_d: f64,
    /// max_{i≠j} |G_ij|
    pub lambda_o: f64,
    pub a_terms: Vec<Complex64>,
    pub z_terms: Vec<Complex64>,
    pub upsilon_terms: Vec<Complex64>,
    pub upsilon_max: f64,
    /// max_i |G_ii − 1/(−z − Σ_j σ²_ij G_jj + Υ_i)|
    pub mainseeq_residual: f64,
    /// X(z) = (log N)^{10+2α}(κ+η)^{1/4}/√(Mη), literal logarithms.
    pub x_diag: f64,
}

/// X(z) with the chosen treatment of the logarithmic factor.
pub fn x_diag(n: usize, m_param: f64, z: Complex64, alpha: f64, logs: LogFactors) -> f64 {
    let p = SpectralPoint { e: z.re, eta: z.im };
    logs.pow(n, 10.0 + 2.0 * alpha) * (p.kappa() + p.eta).powf(0.25) / (m_param * p.eta).sqrt()
}

/// Computes the full resolvent, the minors, and all self-consistent
/// quantities; fails if the exact identity is violated beyond
/// [`MAINSEEQ_TOL`].
pub fn diagnostics(
    h: &HermitianMatrix,
    p: &VarianceProfile,
    z: Complex64,
    opts: DiagnosticsOptions,
) -> Result<ResolventDiagnostics, LocalLawError> {
    let n = h.dim();
    if p.n() != n {
        return Err(LocalLawError::Config(format!("profile has n={}, matrix has n={n}", p.n())));
    }
    let g = resolvent(h, z, &[])?.entries;
    let d = diagnostics_from_resolvent(h, p, z, &g, opts)?;
    if !(d.mainseeq_residual < MAINSEEQ_TOL) {
        return Err(LocalLawError::Identity { residual: d.mainseeq_residual });
    }
    Ok(d)
}

/// Same as [`diagnostics`] with G = (H − z)⁻¹ supplied, and without the
/// identity assertion.
pub fn diagnostics_from_resolvent(
    h: &HermitianMatrix,
    p: &VarianceProfile,
    z: Complex64,
    g: &ComplexMatrix,
    opts: DiagnosticsOptions,
) -> Result<ResolventDiagnostics, LocalLawError> {
    let n = h.dim();
    let gd: Vec<Complex64> = (0..n).map(|i| g.get(i, i)).collect();
    let m_n = gd.iter().sum::<Complex64>() / n as f64;
    let msc_z = msc(z);
    let lambda_d = gd.iter().map(|x| (x - msc_z).norm()).fold(0.0, f64::max);
    let mut lambda_o = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                lambda_o = lambda_o.max(g.get(i, j).norm());
            }
        }
    }
    let mut a_terms = Vec::with_capacity(n);
    let mut z_terms = Vec::with_capacity(n);
    let mut upsilon_terms = Vec::with_capacity(n);
    let mut residual = 0.0f64;
    for i in 0..n {
        let gii = gd[i];
        let mut a = p.variance(i, i) * gii;
        for j in 0..n {
            if j != i {
                a += p.variance(i, j) * g.get(i, j) * g.get(j, i) / gii;
            }
        }
        let (zii, expect) = match opts.route {
            MinorRoute::Schur => {
                let zii = h.get(i, i) - z - 1.0 / gii;
                let mut e = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    if k != i {
                        let gk = gd[k] - g.get(k, i) * g.get(i, k) / gii;
                        e += p.variance(i, k) * gk;
                    }
                }
                (zii, e)
            }
            MinorRoute::Direct => {
                let (zii, _) = quadratic_form_z(h, i, i, &[i], z)?;
                let gi = resolvent(h, z, &[i])?;
                let mut e = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    if k != i {
                        e += p.variance(i, k) * gi.get(k, k).expect("k survives");
                    }
                }
                (zii, e)
            }
        };
        let zi = zii - expect;
        let ups = a + h.get(i, i) - zi;
        let s: Complex64 = (0..n).map(|j| p.variance(i, j) * gd[j]).sum();
        let rhs = 1.0 / (-z - s + ups);
        residual = residual.max((gii - rhs).norm());
        a_terms.push(a);
        z_terms.push(zi);
        upsilon_terms.push(ups);
    }
    let upsilon_max = upsilon_terms.iter().map(|u| u.norm()).fold(0.0, f64::max);
    Ok(ResolventDiagnostics {
        z,
        m_n,
        lambda_d,
        lambda_o,
        a_terms,
        z_terms,
        upsilon_terms,
        upsilon_max,
        mainseeq_residual: residual,
        x_diag: x_diag(n, p.m_param(), z, opts.alpha, LogFactors::Literal),
    })
}

/// Residuals of the four perturbation identities for 𝕋 = ∅ and 𝕋 = {k}.
///
/// For 𝕋 = {k} the last identity removes a fourth index l ∉ {i, j, k}; it is
/// skipped when n = 3.
pub fn verify_perturbation_identities(
    h: &HermitianMatrix,
    z: Complex64,
    i: usize,
    j: usize,
    k: usize,
) -> Result<f64, LocalLawError> {
    let n = h.dim();
    for &x in &[i, j, k] {
        if x >= n {
            return Err(LocalLawError::Index { index: x, n });
        }
    }
    if i == j || j == k || i == k {
        return Err(LocalLawError::Config(format!("indices must be distinct, got ({i}, {j}, {k})")));
    }
    let mut worst = identity_residuals(h, z, &[], i, j, Some(k))?;
    let l = (0..n).find(|x| ![i, j, k].contains(x));
    worst = worst.max(identity_residuals(h, z, &[k], i, j, l)?);
    Ok(worst)
}

fn with(t: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut v = t.to_vec();
    v.extend_from_slice(extra);
    v
}

fn identity_residuals(
    h: &HermitianMatrix,
    z: Complex64,
    t: &[usize],
    i: usize,
    j: usize,
    k: Option<usize>,
) -> Result<f64, LocalLawError> {
    let g = resolvent(h, z, t)?;
    let gi = resolvent(h, z, &with(t, &[i]))?;
    let gj = resolvent(h, z, &with(t, &[j]))?;
    let at = |s: &crate::linalg::ResolventSlice, a: usize, b: usize| s.get(a, b).expect("index survives");
    let mut worst = 0.0f64;

    // G^{(𝕋)}_ii = 1/K^{(i𝕋)}_ii
    let (_, kii) = quadratic_form_z(h, i, i, &with(t, &[i]), z)?;
    worst = worst.max((at(&g, i, i) - 1.0 / kii).norm());

    // G_ij = −G_jj G^{(j)}_ii K^{(ij)}_ij = −G_ii G^{(i)}_jj K^{(ij)}_ij
    let (_, kij) = quadratic_form_z(h, i, j, &with(t, &[i, j]), z)?;
    let gij = at(&g, i, j);
    worst = worst.max((gij + at(&g, j, j) * at(&gj, i, i) * kij).norm());
    worst = worst.max((gij + at(&g, i, i) * at(&gi, j, j) * kij).norm());

    // G_ii − G^{(j)}_ii = G_ij G_ji / G_jj
    worst = worst.max((at(&g, i, i) - at(&gj, i, i) - gij * at(&g, j, i) / at(&g, j, j)).norm());

    // G_ij − G^{(k)}_ij = G_ik G_kj / G_kk
    if let Some(k) = k {
        let gk = resolvent(h, z, &with(t, &[k]))?;
        let rhs = at(&g, i, k) * at(&g, k, j) / at(&g, k, k);
        worst = worst.max((gij - at(&gk, i, j) - rhs).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{catalog_distribution, sample_matrix, sample_unchecked, wigner_profile, SymmetryClass};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_everything_at_i() {
        let p = VarianceProfile::from_variances(4, vec![0.0; 16]).unwrap();
        let h = HermitianMatrix::zeros(4, false);
        let d = diagnostics(&h, &p, c(0.0, 1.0), DiagnosticsOptions::default()).unwrap();
        assert!((d.m_n - c(0.0, 1.0)).norm() < 1e-15);
        for i in 0..4 {
            assert!(d.z_terms[i].norm() < 1e-15);
            assert!(d.upsilon_terms[i].norm() < 1e-15);
        }
    }

    #[test]
    fn zero_matrix_with_wigner_profile() {
        let p = wigner_profile(6).unwrap();
        let h = HermitianMatrix::zeros(6, false);
        let d = diagnostics(&h, &p, c(0.0, 1.0), DiagnosticsOptions::default()).unwrap();
        let want = (c(0.0, 1.0) - msc(c(0.0, 1.0))).norm();
        assert!((d.lambda_d - want).abs() < 1e-14);
        assert!((d.lambda_d - 0.381_966).abs() < 1e-6);
        assert_eq!(d.lambda_o, 0.0);
    }

    #[test]
    fn bernoulli_identity_both_routes() {
        let p = wigner_profile(50).unwrap();
        let dist = catalog_distribution("bernoulli").unwrap();
        let h = sample_matrix(&p, &dist, SymmetryClass::Complex, 5).unwrap().entries;
        let z = c(1.0, 0.5);
        let direct = diagnostics(&h, &p, z, DiagnosticsOptions::default()).unwrap();
        let schur = diagnostics(&h, &p, z, DiagnosticsOptions { route: MinorRoute::Schur, alpha: 1.0 }).unwrap();
        assert!(direct.mainseeq_residual < 1e-8);
        assert!(schur.mainseeq_residual < 1e-8);
        for i in 0..50 {
            assert!((direct.z_terms[i] - schur.z_terms[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn unchecked_zero_profile_sample_is_zero() {
        let p = VarianceProfile::from_variances(3, vec![0.0; 9]).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        let s = sample_unchecked(&p, &d, SymmetryClass::Real, 1);
        assert_eq!(s.entries.max_abs(), 0.0);
    }

    #[test]
    fn three_by_three_schur_by_hand() {
        let h = HermitianMatrix::from_upper(3, false, |i, j| match (i, j) {
            (0, 0) => c(0.3, 0.0),
            (1, 1) => c(-0.2, 0.0),
            (2, 2) => c(0.1, 0.0),
            (0, 1) => c(0.4, 0.1),
            (0, 2) => c(-0.2, 0.3),
            _ => c(0.05, -0.25),
        });
        let z = c(0.2, 0.4);
        // G_00 = 1/(h00 − z − a* (B − z)⁻¹ a) with the 2×2 inverse in closed form.
        let (b11, b12, b21, b22) = (h.get(1, 1) - z, h.get(1, 2), h.get(2, 1), h.get(2, 2) - z);
        let det = b11 * b22 - b12 * b21;
        let inv = [[b22 / det, -b12 / det], [-b21 / det, b11 / det]];
        let a = [h.get(1, 0), h.get(2, 0)];
        let mut q = c(0.0, 0.0);
        for r in 0..2 {
            for s in 0..2 {
                q += a[r].conj() * inv[r][s] * a[s];
            }
        }
        let g00 = 1.0 / (h.get(0, 0) - z - q);
        let g = resolvent(&h, z, &[]).unwrap();
        assert!((g.get(0, 0).unwrap() - g00).norm() < 1e-12);
        assert!(verify_perturbation_identities(&h, z, 0, 1, 2).unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_matrix_identities_trivial() {
        let h = HermitianMatrix::from_real(4, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(verify_perturbation_identities(&h, c(0.1, 0.2), 0, 1, 2).unwrap() < 1e-15);
        assert!(verify_perturbation_identities(&h, c(0.1, 0.2), 0, 0, 2).is_err());
        assert!(verify_perturbation_identities(&h, c(0.1, 0.2), 0, 1, 9).is_err());
    }
}
