//! Dense Hermitian eigensolver.
//!
//! Householder reduction to a real symmetric tridiagonal matrix followed by
//! implicit-shift QL. The complex reflectors are chosen so that every
//! subdiagonal element comes out real, so no separate phase pass is needed.

use num_complex::Complex64;

use super::matrix::{axpy, axpy_real, dot_real, dotc, dotu, ComplexMatrix, HermitianMatrix};
use super::LinalgError;

const MAX_SWEEPS: usize = 50;

/// Ascending eigenvalues with optional eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<ComplexMatrix>,
    /// max_α ‖H u_α − λ_α u_α‖ when eigenvectors were requested.
    pub residual: Option<f64>,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues, eigenvectors: None, residual: None }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// m_N(z) = N⁻¹ Σ 1/(λ_α − z)
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        stieltjes(&self.eigenvalues, z)
    }

    /// ‖U*U − I‖_max, if eigenvectors are present.
    pub fn orthonormality_defect(&self) -> Option<f64> {
        let u = self.eigenvectors.as_ref()?;
        Some(u.conj_transpose().matmul(u).ok()?.identity_defect())
    }

    /// Σ_α u_α u_α* / (λ_α − z), the spectral form of the resolvent.
    pub fn resolvent(&self, z: Complex64) -> Option<ComplexMatrix> {
        let u = self.eigenvectors.as_ref()?;
        let n = u.rows();
        let mut g = ComplexMatrix::zeros(n, n);
        for (a, &lam) in self.eigenvalues.iter().enumerate() {
            let w = 1.0 / (Complex64::new(lam, 0.0) - z);
            for i in 0..n {
                let ui = u.get(i, a) * w;
                for j in 0..n {
                    let v = g.get(i, j) + ui * u.get(j, a).conj();
                    g.set(i, j, v);
                }
            }
        }
        Some(g)
    }
}

pub fn stieltjes(eigenvalues: &[f64], z: Complex64) -> Complex64 {
    let s: Complex64 = eigenvalues.iter().map(|&l| 1.0 / (Complex64::new(l, 0.0) - z)).sum();
    s / eigenvalues.len() as f64
}

/// Eigenvalues only.
pub fn eigvalsh(h: &HermitianMatrix) -> Result<Vec<f64>, LinalgError> {
    Ok(eigh(h, false)?.eigenvalues)
}

pub fn eigh(h: &HermitianMatrix, vectors: bool) -> Result<Spectrum, LinalgError> {
    let defect = h.hermitian_defect();
    if defect > 1e-12 {
        return Err(LinalgError::Symmetry { defect });
    }
    let n = h.dim();
    if n == 0 {
        return Ok(Spectrum { eigenvalues: vec![], eigenvectors: None, residual: None });
    }
    let reduced = match h.im() {
        None => tridiagonalize_real(n, h.re().to_vec()),
        Some(im) => tridiagonalize_complex(n, h.re().to_vec(), im.to_vec()),
    };
    let Tridiagonal { mut d, mut e, reflectors } = reduced;
    let mut zt = if vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    tql(&mut d, &mut e, zt.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&a| d[a]).collect();

    let eigenvectors = zt.map(|zt| {
        // Column α of U starts as the tridiagonal eigenvector, then Q is applied.
        let mut u = ComplexMatrix::zeros(n, n);
        for (col, &a) in order.iter().enumerate() {
            for i in 0..n {
                u.re[i * n + col] = zt[a * n + i];
            }
        }
        apply_q(n, &reflectors, &mut u);
        u
    });
    let residual = eigenvectors.as_ref().map(|u| eigen_residual(h, &eigenvalues, u));
    Ok(Spectrum { eigenvalues, eigenvectors, residual })
}

fn eigen_residual(h: &HermitianMatrix, lambda: &[f64], u: &ComplexMatrix) -> f64 {
    let n = h.dim();
    let mut worst = 0.0f64;
    for (a, &l) in lambda.iter().enumerate() {
        let col = u.column(a);
        let hu = h.matvec(&col);
        let r: f64 = hu.iter().zip(&col).map(|(x, y)| (x - y * l).norm_sqr()).sum();
        worst = worst.max(r.sqrt());
    }
    debug_assert!(n == lambda.len());
    worst
}

struct Reflector {
    tau: Complex64,
    vr: Vec<f64>,
    vi: Vec<f64>,
}

struct Tridiagonal {
    d: Vec<f64>,
    /// e[k] couples k and k+1; e[n-1] = 0.
    e: Vec<f64>,
    /// reflectors[k] acts on indices k+1..n.
    reflectors: Vec<Reflector>,
}

/// Reflector data for x ↦ βe₁ with β real: returns (β, τ, v) where
/// (I − τ̄ v v*) x = β e₁ and v₀ = 1.
fn householder(xr: &[f64], xi: &[f64]) -> (f64, Complex64, Vec<f64>, Vec<f64>) {
    let m = xr.len();
    let alpha = Complex64::new(xr[0], xi[0]);
    let tail: f64 = (1..m).map(|j| xr[j] * xr[j] + xi[j] * xi[j]).sum();
    if tail == 0.0 && alpha.im == 0.0 {
        let mut vr = vec![0.0; m];
        vr[0] = 1.0;
        return (alpha.re, Complex64::new(0.0, 0.0), vr, vec![0.0; m]);
    }
    let norm = (alpha.norm_sqr() + tail).sqrt();
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = (Complex64::new(beta, 0.0) - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    let mut vr = vec![0.0; m];
    let mut vi = vec![0.0; m];
    vr[0] = 1.0;
    for j in 1..m {
        let v = Complex64::new(xr[j], xi[j]) * scale;
        vr[j] = v.re;
        vi[j] = v.im;
    }
    (beta, tau, vr, vi)
}

fn tridiagonalize_complex(n: usize, mut ar: Vec<f64>, mut ai: Vec<f64>) -> Tridiagonal {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut pr = vec![0.0; n];
    let mut pi = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let s = k + 1;
        d[k] = ar[k * n + k];
        // Column k below the diagonal is the conjugate of row k.
        let xr: Vec<f64> = ar[k * n + s..k * n + n].to_vec();
        let xi: Vec<f64> = ai[k * n + s..k * n + n].iter().map(|v| -v).collect();
        let (beta, tau, vr, vi) = householder(&xr, &xi);
        e[k] = beta;
        if tau != Complex64::new(0.0, 0.0) {
            // p = τ A22 v
            for r in 0..m {
                let row = (s + r) * n + s;
                let t = dotu(&ar[row..row + m], &ai[row..row + m], &vr, &vi);
                let p = tau * t;
                pr[r] = p.re;
                pi[r] = p.im;
            }
            // w = p − ½ τ̄ (v* p) v
            let c = tau.conj() * dotc(&vr, &vi, &pr[..m], &pi[..m]);
            let half = -0.5 * c;
            let mut wr = pr[..m].to_vec();
            let mut wi = pi[..m].to_vec();
            axpy(&mut wr, &mut wi, half, &vr, &vi);
            let wci: Vec<f64> = wi.iter().map(|v| -v).collect();
            let vci: Vec<f64> = vi.iter().map(|v| -v).collect();
            // A22 −= v w* + w v*
            for r in 0..m {
                let row = (s + r) * n + s;
                let (yr, yi) = (&mut ar[row..row + m], &mut ai[row..row + m]);
                rank2_row(
                    yr,
                    yi,
                    Complex64::new(-vr[r], -vi[r]),
                    (&wr, &wci),
                    Complex64::new(-wr[r], -wi[r]),
                    (&vr, &vci),
                );
            }
        }
        reflectors.push(Reflector { tau, vr, vi });
    }
    d[n - 1] = ar[n * n - 1];
    Tridiagonal { d, e, reflectors }
}

/// y += a x + b z
#[inline]
fn rank2_row(yr: &mut [f64], yi: &mut [f64], a: Complex64, x: (&[f64], &[f64]), b: Complex64, z: (&[f64], &[f64])) {
    let n = yr.len();
    let (yi, xr, xi, zr, zi) = (&mut yi[..n], &x.0[..n], &x.1[..n], &z.0[..n], &z.1[..n]);
    for k in 0..n {
        yr[k] += a.re * xr[k] - a.im * xi[k] + b.re * zr[k] - b.im * zi[k];
        yi[k] += a.re * xi[k] + a.im * xr[k] + b.re * zi[k] + b.im * zr[k];
    }
}

fn tridiagonalize_real(n: usize, mut a: Vec<f64>) -> Tridiagonal {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let s = k + 1;
        d[k] = a[k * n + k];
        let x = a[k * n + s..k * n + n].to_vec();
        let (beta, tau, v, _) = householder(&x, &vec![0.0; m]);
        let tau = tau.re;
        e[k] = beta;
        if tau != 0.0 {
            for r in 0..m {
                let row = (s + r) * n + s;
                p[r] = tau * dot_real(&a[row..row + m], &v);
            }
            let c = tau * dot_real(&v, &p[..m]);
            let mut w = p[..m].to_vec();
            axpy_real(&mut w, -0.5 * c, &v);
            for r in 0..m {
                let row = (s + r) * n + s;
                let y = &mut a[row..row + m];
                let (vr, wr) = (-v[r], -w[r]);
                for q in 0..m {
                    y[q] += vr * w[q] + wr * v[q];
                }
            }
        }
        reflectors.push(Reflector { tau: Complex64::new(tau, 0.0), vi: vec![0.0; m], vr: v });
    }
    d[n - 1] = a[n * n - 1];
    Tridiagonal { d, e, reflectors }
}

/// U ← Q U with Q = H₀ H₁ ⋯ H_{n−2}, H_k = I − τ_k v_k v_k*.
fn apply_q(n: usize, reflectors: &[Reflector], u: &mut ComplexMatrix) {
    let mut sr = vec![0.0; n];
    let mut si = vec![0.0; n];
    for (k, h) in reflectors.iter().enumerate().rev() {
        if h.tau == Complex64::new(0.0, 0.0) {
            continue;
        }
        let s = k + 1;
        sr.iter_mut().for_each(|x| *x = 0.0);
        si.iter_mut().for_each(|x| *x = 0.0);
        // s = v* U[s.., :]
        for (r, (&vr, &vi)) in h.vr.iter().zip(&h.vi).enumerate() {
            let row = (s + r) * n;
            axpy(&mut sr, &mut si, Complex64::new(vr, -vi), &u.re[row..row + n], &u.im[row..row + n]);
        }
        for (r, (&vr, &vi)) in h.vr.iter().zip(&h.vi).enumerate() {
            let row = (s + r) * n;
            let coef = -(h.tau * Complex64::new(vr, vi));
            let (ur, ui) = (&mut u.re[row..row + n], &mut u.im[row..row + n]);
            axpy(ur, ui, coef, &sr, &si);
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `zt`, when given,
/// holds eigenvectors as rows and is rotated along.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [f64]>) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(LinalgError::Convergence { index: l, sweeps: MAX_SWEEPS });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zj = &mut hi[..n];
                    for k in 0..n {
                        let f = zj[k];
                        zj[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_swap() {
        let h = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = eigh(&h, true).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(s.residual.unwrap() < 1e-14);
    }

    #[test]
    fn diagonal_input_gives_permuted_identity() {
        let h = HermitianMatrix::from_real(3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let s = eigh(&h, true).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
        let u = s.eigenvectors.unwrap();
        // λ=1 ↔ e₁, λ=2 ↔ e₂, λ=3 ↔ e₀ up to phase
        assert!((u.get(1, 0).norm() - 1.0).abs() < 1e-14);
        assert!((u.get(2, 1).norm() - 1.0).abs() < 1e-14);
        assert!((u.get(0, 2).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_matrix_residual_and_orthonormality() {
        let n = 9;
        let h = HermitianMatrix::from_upper(n, false, |i, j| {
            let t = (i * 7 + j * 3) as f64;
            c(t.sin(), if i == j { 0.0 } else { (t * 0.37).cos() })
        });
        let s = eigh(&h, true).unwrap();
        assert!(s.residual.unwrap() < 1e-12);
        assert!(s.orthonormality_defect().unwrap() < 1e-12);
        let tr: f64 = s.eigenvalues.iter().sum();
        assert!((tr - h.trace()).abs() < 1e-12);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn already_tridiagonal_complex_phases() {
        // Subdiagonal entries with nonzero phase and a zero tail exercise the
        // pure-phase reflector branch.
        let h = HermitianMatrix::from_upper(3, false, |i, j| match j as isize - i as isize {
            0 => c(i as f64, 0.0),
            1 => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let s = eigh(&h, true).unwrap();
        assert!(s.residual.unwrap() < 1e-13);
    }

    #[test]
    fn empty_and_scalar() {
        let h = HermitianMatrix::zeros(0, true);
        assert!(eigh(&h, true).unwrap().is_empty());
        let h = HermitianMatrix::from_real(1, &[4.5]).unwrap();
        assert_eq!(eigvalsh(&h).unwrap(), vec![4.5]);
    }
}
