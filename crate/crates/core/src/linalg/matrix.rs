use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LinalgError;

/// Dense Hermitian matrix, row-major, both triangles stored.
///
/// Real symmetric matrices keep `im == None` and take the real code paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix {
    n: usize,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize, real: bool) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: if real { None } else { Some(vec![0.0; n * n]) },
        }
    }

    /// Builds the matrix from its upper triangle; `f(i, j)` is called for `i <= j`.
    /// The diagonal keeps only the real part.
    pub fn from_upper(n: usize, real: bool, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n, real);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.re[i * n + j] = v.re;
                m.re[j * n + i] = v.re;
                if let Some(im) = m.im.as_mut() {
                    if i == j {
                        im[i * n + i] = 0.0;
                    } else {
                        im[i * n + j] = v.im;
                        im[j * n + i] = -v.im;
                    }
                }
            }
        }
        m
    }

    /// Builds from a full row-major grid, rejecting non-Hermitian input.
    pub fn from_entries(n: usize, entries: &[Complex64]) -> Result<Self, LinalgError> {
        if entries.len() != n * n {
            return Err(LinalgError::Dimension(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        let real = entries.iter().all(|z| z.im == 0.0);
        let m = Self {
            n,
            re: entries.iter().map(|z| z.re).collect(),
            im: if real { None } else { Some(entries.iter().map(|z| z.im).collect()) },
        };
        let defect = m.hermitian_defect();
        if defect > 1e-12 {
            return Err(LinalgError::Symmetry { defect });
        }
        Ok(m)
    }

    pub fn from_real(n: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_entries(n, &c)
    }

    /// Raw split storage; the caller guarantees Hermitian symmetry.
    pub(crate) fn from_parts(n: usize, re: Vec<f64>, im: Option<Vec<f64>>) -> Self {
        debug_assert_eq!(re.len(), n * n);
        Self { n, re, im }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im.as_ref().map_or(0.0, |im| im[k]))
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    /// max |h_ij - conj(h_ji)|
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let a = self.get(i, j);
                let b = self.get(j, i).conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re[i * self.n + i]).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        let r: f64 = self.re.iter().map(|x| x * x).sum();
        let i: f64 = self.im.as_ref().map_or(0.0, |im| im.iter().map(|x| x * x).sum());
        r + i
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.n * self.n)
            .map(|k| {
                let im = self.im.as_ref().map_or(0.0, |v| v[k]);
                self.re[k].hypot(im)
            })
            .fold(0.0, f64::max)
    }

    /// Entry-wise `a * self + b * other`; both must have the same shape.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self, LinalgError> {
        if self.n != other.n {
            return Err(LinalgError::Dimension(format!("{} vs {}", self.n, other.n)));
        }
        let re = self.re.iter().zip(&other.re).map(|(x, y)| a * x + b * y).collect();
        let im = match (&self.im, &other.im) {
            (None, None) => None,
            (x, y) => {
                let zeros = vec![0.0; self.n * self.n];
                let xi = x.as_deref().unwrap_or(&zeros);
                let yi = y.as_deref().unwrap_or(&zeros);
                Some(xi.iter().zip(yi).map(|(p, q)| a * p + b * q).collect())
            }
        };
        Ok(Self { n: self.n, re, im })
    }

    /// Dense `y = H x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `H - z I` as a general complex matrix.
    pub fn shifted(&self, z: Complex64) -> ComplexMatrix {
        let n = self.n;
        let mut m = ComplexMatrix {
            rows: n,
            cols: n,
            re: self.re.clone(),
            im: self.im.clone().unwrap_or_else(|| vec![0.0; n * n]),
        };
        for i in 0..n {
            m.re[i * n + i] -= z.re;
            m.im[i * n + i] -= z.im;
        }
        m
    }
}

/// General dense complex matrix, row-major, split real/imaginary planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub(crate) rows: usize,
    pub(crate) cols: usize,
    pub(crate) re: Vec<f64>,
    pub(crate) im: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, re: vec![0.0; rows * cols], im: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.cols + j;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.cols + j;
        self.re[k] = v.re;
        self.im[k] = v.im;
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        let w = other.cols;
        for i in 0..self.rows {
            let (or, oi) = (&mut out.re[i * w..(i + 1) * w], &mut out.im[i * w..(i + 1) * w]);
            for k in 0..self.cols {
                let a = self.get(i, k);
                axpy(or, oi, a, &other.re[k * w..(k + 1) * w], &other.im[k * w..(k + 1) * w]);
            }
        }
        Ok(out)
    }

    /// max |M_ij - δ_ij|
    pub fn identity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - Complex64::new(d, 0.0)).norm());
            }
        }
        worst
    }

    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }
}

// Vector kernels on split storage. Reductions keep several independent
// accumulators so the compiler can vectorize without reassociating.

const LANES: usize = 8;

/// y += a * x
#[inline]
pub(crate) fn axpy(yr: &mut [f64], yi: &mut [f64], a: Complex64, xr: &[f64], xi: &[f64]) {
    let n = yr.len();
    let (yr, yi, xr, xi) = (&mut yr[..n], &mut yi[..n], &xr[..n], &xi[..n]);
    for k in 0..n {
        let (r, i) = (xr[k], xi[k]);
        yr[k] += a.re * r - a.im * i;
        yi[k] += a.re * i + a.im * r;
    }
}

/// y += a * x, real
#[inline]
pub(crate) fn axpy_real(y: &mut [f64], a: f64, x: &[f64]) {
    let n = y.len();
    let (y, x) = (&mut y[..n], &x[..n]);
    for k in 0..n {
        y[k] += a * x[k];
    }
}

/// Σ_k x_k y_k (no conjugation)
#[inline]
pub(crate) fn dotu(xr: &[f64], xi: &[f64], yr: &[f64], yi: &[f64]) -> Complex64 {
    let n = xr.len();
    let (xr, xi, yr, yi) = (&xr[..n], &xi[..n], &yr[..n], &yi[..n]);
    let mut ar = [0.0; LANES];
    let mut ai = [0.0; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            let (p, q, r, s) = (xr[o + l], xi[o + l], yr[o + l], yi[o + l]);
            ar[l] += p * r - q * s;
            ai[l] += p * s + q * r;
        }
    }
    let mut sr: f64 = ar.iter().sum();
    let mut si: f64 = ai.iter().sum();
    for k in chunks * LANES..n {
        sr += xr[k] * yr[k] - xi[k] * yi[k];
        si += xr[k] * yi[k] + xi[k] * yr[k];
    }
    Complex64::new(sr, si)
}

/// Σ_k conj(x_k) y_k
#[inline]
pub(crate) fn dotc(xr: &[f64], xi: &[f64], yr: &[f64], yi: &[f64]) -> Complex64 {
    let n = xr.len();
    let (xr, xi, yr, yi) = (&xr[..n], &xi[..n], &yr[..n], &yi[..n]);
    let mut ar = [0.0; LANES];
    let mut ai = [0.0; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            let (p, q, r, s) = (xr[o + l], xi[o + l], yr[o + l], yi[o + l]);
            ar[l] += p * r + q * s;
            ai[l] += p * s - q * r;
        }
    }
    let mut sr: f64 = ar.iter().sum();
    let mut si: f64 = ai.iter().sum();
    for k in chunks * LANES..n {
        sr += xr[k] * yr[k] + xi[k] * yi[k];
        si += xr[k] * yi[k] - xi[k] * yr[k];
    }
    Complex64::new(sr, si)
}

#[inline]
pub(crate) fn dot_real(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (x, y) = (&x[..n], &y[..n]);
    let mut acc = [0.0; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            acc[l] += x[o + l] * y[o + l];
        }
    }
    let mut s: f64 = acc.iter().sum();
    for k in chunks * LANES..n {
        s += x[k] * y[k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_upper_is_exactly_hermitian() {
        let m = HermitianMatrix::from_upper(4, false, |i, j| Complex64::new((i + j) as f64, (i * j) as f64 + 0.5));
        assert_eq!(m.hermitian_defect(), 0.0);
        assert_eq!(m.get(2, 2).im, 0.0);
        assert_eq!(m.get(1, 3), m.get(3, 1).conj());
    }

    #[test]
    fn from_entries_rejects_asymmetry() {
        let e = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(HermitianMatrix::from_real(2, &e), Err(LinalgError::Symmetry { .. })));
    }

    #[test]
    fn kernels_agree_with_scalar_sums() {
        let n = 19;
        let xr: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let xi: Vec<f64> = (0..n).map(|k| (k as f64).cos()).collect();
        let yr: Vec<f64> = (0..n).map(|k| (k as f64 * 0.3).sin()).collect();
        let yi: Vec<f64> = (0..n).map(|k| (k as f64 * 0.7).cos()).collect();
        let x: Vec<Complex64> = (0..n).map(|k| Complex64::new(xr[k], xi[k])).collect();
        let y: Vec<Complex64> = (0..n).map(|k| Complex64::new(yr[k], yi[k])).collect();
        let u: Complex64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let c: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        assert!((dotu(&xr, &xi, &yr, &yi) - u).norm() < 1e-13);
        assert!((dotc(&xr, &xi, &yr, &yi) - c).norm() < 1e-13);
    }
}
