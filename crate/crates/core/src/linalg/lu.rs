//! Complex LU with partial pivoting and the inverse built from it.
//!
//! With P A = L U the inverse is U⁻¹ L⁻¹ P. Both triangular inverses and their
//! product are formed with a blocked row-major update so that the working set
//! of the inner loops stays in cache.

use std::ops::Range;

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use super::LinalgError;

const NB: usize = 64;
const COL_TILE: usize = 256;
const P_CHUNK: usize = 128;

/// Pivots smaller than this relative to the largest matrix entry are treated
/// as singular.
const PIVOT_TOL: f64 = 1e-14;

/// Packed LU factors of a square complex matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    /// Row k of PA is row perm[k] of A.
    perm: Vec<usize>,
}

struct Mat<'a> {
    re: &'a [f64],
    im: &'a [f64],
    stride: usize,
}

struct MatMut<'a> {
    re: &'a mut [f64],
    im: &'a mut [f64],
    stride: usize,
}

#[derive(Clone, Copy, Default)]
struct Skip {
    /// B[p][j] = 0 for j > p
    b_lower: bool,
    /// B[p][j] = 0 for j < p
    b_upper: bool,
    /// A[i][p] = 0 for p < i (row indices counted in B's frame via `a_shift`)
    a_upper: bool,
}

/// c[t] -= Σ_p a[p] · b_p[t], four rows of b at a time.
#[inline]
fn row_update(cr: &mut [f64], ci: &mut [f64], ar: &[f64], ai: &[f64], b: &Mat, boff: usize, p0: usize) {
    let w = cr.len();
    let ci = &mut ci[..w];
    let k = ar.len();
    let mut p = 0;
    while p + 4 <= k {
        let (a0r, a1r, a2r, a3r) = (ar[p], ar[p + 1], ar[p + 2], ar[p + 3]);
        let (a0i, a1i, a2i, a3i) = (ai[p], ai[p + 1], ai[p + 2], ai[p + 3]);
        let o = (p0 + p) * b.stride + boff;
        let s = b.stride;
        let b0r = &b.re[o..o + w];
        let b0i = &b.im[o..o + w];
        let b1r = &b.re[o + s..o + s + w];
        let b1i = &b.im[o + s..o + s + w];
        let b2r = &b.re[o + 2 * s..o + 2 * s + w];
        let b2i = &b.im[o + 2 * s..o + 2 * s + w];
        let b3r = &b.re[o + 3 * s..o + 3 * s + w];
        let b3i = &b.im[o + 3 * s..o + 3 * s + w];
        for t in 0..w {
            cr[t] -= a0r * b0r[t] - a0i * b0i[t] + a1r * b1r[t] - a1i * b1i[t] + a2r * b2r[t] - a2i * b2i[t]
                + a3r * b3r[t]
                - a3i * b3i[t];
            ci[t] -= a0r * b0i[t] + a0i * b0r[t] + a1r * b1i[t] + a1i * b1r[t] + a2r * b2i[t] + a2i * b2r[t]
                + a3r * b3i[t]
                + a3i * b3r[t];
        }
        p += 4;
    }
    while p < k {
        let (a_r, a_i) = (ar[p], ai[p]);
        let o = (p0 + p) * b.stride + boff;
        let br = &b.re[o..o + w];
        let bi = &b.im[o..o + w];
        for t in 0..w {
            cr[t] -= a_r * br[t] - a_i * bi[t];
            ci[t] -= a_r * bi[t] + a_i * br[t];
        }
        p += 1;
    }
}

/// C[i][j] -= Σ_p A[i][p] B[p][j] for i ∈ rows, j ∈ cols, p ∈ ps.
///
/// Row i of C is stored at `(i - c_row0) * c.stride`; A and B use absolute
/// indices. `skip` lets the loops avoid known zero blocks.
#[allow(clippy::too_many_arguments)]
fn gemm_sub(c: &mut MatMut, c_row0: usize, rows: Range<usize>, cols: Range<usize>, a: &Mat, b: &Mat, ps: Range<usize>, skip: Skip) {
    let mut jt = cols.start;
    while jt < cols.end {
        let je = (jt + COL_TILE).min(cols.end);
        let mut plo = ps.start;
        let mut phi = ps.end;
        if skip.b_lower {
            plo = plo.max(jt);
        }
        if skip.b_upper {
            phi = phi.min(je);
        }
        let mut pc = plo;
        while pc < phi {
            let pe = (pc + P_CHUNK).min(phi);
            for i in rows.clone() {
                let lo = if skip.a_upper { pc.max(i) } else { pc };
                if lo >= pe {
                    continue;
                }
                let co = (i - c_row0) * c.stride;
                let ao = i * a.stride;
                row_update(
                    &mut c.re[co + jt..co + je],
                    &mut c.im[co + jt..co + je],
                    &a.re[ao + lo..ao + pe],
                    &a.im[ao + lo..ao + pe],
                    b,
                    jt,
                    lo,
                );
            }
            pc = pe;
        }
        jt = je;
    }
}

impl LuFactors {
    pub fn factor(m: &ComplexMatrix) -> Result<Self, LinalgError> {
        if m.rows != m.cols {
            return Err(LinalgError::Dimension(format!("LU of a {}x{} matrix", m.rows, m.cols)));
        }
        let n = m.rows;
        let mut re = m.re.clone();
        let mut im = m.im.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = re.iter().zip(&im).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
        let tol = PIVOT_TOL * scale.max(f64::MIN_POSITIVE);
        let mut pr = vec![0.0; n * NB];
        let mut pi = vec![0.0; n * NB];

        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + NB).min(n);
            // Unblocked factorization of the panel columns k0..k1, with
            // row swaps applied across the full width.
            for k in k0..k1 {
                let mut best = k;
                let mut bmag = -1.0;
                for r in k..n {
                    let v = re[r * n + k].hypot(im[r * n + k]);
                    if v > bmag {
                        bmag = v;
                        best = r;
                    }
                }
                if !(bmag > tol) {
                    return Err(LinalgError::Solver { column: k, magnitude: bmag.max(0.0) });
                }
                if best != k {
                    swap_rows(&mut re, n, k, best);
                    swap_rows(&mut im, n, k, best);
                    perm.swap(k, best);
                }
                let piv = Complex64::new(re[k * n + k], im[k * n + k]);
                let inv = 1.0 / piv;
                for r in k + 1..n {
                    let l = Complex64::new(re[r * n + k], im[r * n + k]) * inv;
                    re[r * n + k] = l.re;
                    im[r * n + k] = l.im;
                    if l == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    // Update only inside the panel; the rest waits for the
                    // blocked update below.
                    for c in k + 1..k1 {
                        let u = Complex64::new(re[k * n + c], im[k * n + c]);
                        re[r * n + c] -= l.re * u.re - l.im * u.im;
                        im[r * n + c] -= l.re * u.im + l.im * u.re;
                    }
                }
            }
            if k1 < n {
                let kb = k1 - k0;
                // U12 = L11⁻¹ A12, row by row.
                for r in k0 + 1..k1 {
                    for q in k0..r {
                        let l = Complex64::new(re[r * n + q], im[r * n + q]);
                        for c in k1..n {
                            let u = Complex64::new(re[q * n + c], im[q * n + c]);
                            re[r * n + c] -= l.re * u.re - l.im * u.im;
                            im[r * n + c] -= l.re * u.im + l.im * u.re;
                        }
                    }
                }
                // Pack L21 so the trailing rows can be borrowed mutably.
                for r in k1..n {
                    let o = r * n + k0;
                    pr[r * kb..r * kb + kb].copy_from_slice(&re[o..o + kb]);
                    pi[r * kb..r * kb + kb].copy_from_slice(&im[o..o + kb]);
                }
                let (top_re, bot_re) = re.split_at_mut(k1 * n);
                let (top_im, bot_im) = im.split_at_mut(k1 * n);
                // B rows are k0..k1 of the top part; shift columns so B[p][j]
                // lives at p*n + j with p relative to k0.
                let b = Mat { re: &top_re[k0 * n..], im: &top_im[k0 * n..], stride: n };
                // A[i][p] at (i)*kb + (p - k0): present it with p relative to 0.
                let a = Mat { re: &pr, im: &pi, stride: kb };
                let mut c = MatMut { re: bot_re, im: bot_im, stride: n };
                gemm_sub(&mut c, k1, k1..n, k1..n, &a, &b, 0..kb, Skip::default());
            }
            k0 = k1;
        }
        Ok(Self { n, re, im, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for p in 0..i {
                s -= self.at(i, p) * x[p];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for p in i + 1..n {
                s -= self.at(i, p) * x[p];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[i * self.n + j], self.im[i * self.n + j])
    }

    /// L⁻¹ (unit lower triangular), row-major.
    fn lower_inverse(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut xr = vec![0.0; n * n];
        let mut xi = vec![0.0; n * n];
        for i in 0..n {
            xr[i * n + i] = 1.0;
        }
        let l = Mat { re: &self.re, im: &self.im, stride: n };
        let mut i0 = 0;
        while i0 < n {
            let i1 = (i0 + NB).min(n);
            let (top_r, bot_r) = xr.split_at_mut(i0 * n);
            let (top_i, bot_i) = xi.split_at_mut(i0 * n);
            if i0 > 0 {
                let b = Mat { re: top_r, im: top_i, stride: n };
                let mut c = MatMut { re: &mut bot_r[..(i1 - i0) * n], im: &mut bot_i[..(i1 - i0) * n], stride: n };
                gemm_sub(&mut c, i0, i0..i1, 0..i0, &l, &b, 0..i0, Skip { b_lower: true, ..Skip::default() });
            }
            for i in i0..i1 {
                for p in i0..i {
                    let a = self.at(i, p);
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in 0..=p {
                        let (br, bi) = (xr[p * n + j], xi[p * n + j]);
                        xr[i * n + j] -= a.re * br - a.im * bi;
                        xi[i * n + j] -= a.re * bi + a.im * br;
                    }
                }
            }
            i0 = i1;
        }
        (xr, xi)
    }

    /// U⁻¹ (upper triangular), row-major.
    fn upper_inverse(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut yr = vec![0.0; n * n];
        let mut yi = vec![0.0; n * n];
        for i in 0..n {
            yr[i * n + i] = 1.0;
        }
        let u = Mat { re: &self.re, im: &self.im, stride: n };
        let mut i1 = n;
        while i1 > 0 {
            let i0 = i1.saturating_sub(NB);
            let (top_r, bot_r) = yr.split_at_mut(i1 * n);
            let (top_i, bot_i) = yi.split_at_mut(i1 * n);
            if i1 < n {
                // B rows i1..n live in `bot`; index them from 0.
                let b = Mat { re: bot_r, im: bot_i, stride: n };
                let ushift = Mat { re: &u.re[i1..], im: &u.im[i1..], stride: n };
                let mut c = MatMut { re: &mut top_r[i0 * n..], im: &mut top_i[i0 * n..], stride: n };
                gemm_sub_shifted_upper(&mut c, i0, i0..i1, i1..n, &ushift, &b, i1, n);
            }
            for i in (i0..i1).rev() {
                for p in i + 1..i1 {
                    let a = self.at(i, p);
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in p..n {
                        let (br, bi) = (yr[p * n + j], yi[p * n + j]);
                        yr[i * n + j] -= a.re * br - a.im * bi;
                        yi[i * n + j] -= a.re * bi + a.im * br;
                    }
                }
                let d = 1.0 / self.at(i, i);
                for j in i..n {
                    let v = Complex64::new(yr[i * n + j], yi[i * n + j]) * d;
                    yr[i * n + j] = v.re;
                    yi[i * n + j] = v.im;
                }
            }
            i1 = i0;
        }
        (yr, yi)
    }

    /// Full inverse A⁻¹ = U⁻¹ L⁻¹ P.
    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.n;
        let (lr, li) = self.lower_inverse();
        let (ur, ui) = self.upper_inverse();
        let mut mr = vec![0.0; n * n];
        let mut mi = vec![0.0; n * n];
        {
            let a = Mat { re: &ur, im: &ui, stride: n };
            let b = Mat { re: &lr, im: &li, stride: n };
            let mut c = MatMut { re: &mut mr, im: &mut mi, stride: n };
            gemm_sub(&mut c, 0, 0..n, 0..n, &a, &b, 0..n, Skip { b_lower: true, a_upper: true, ..Skip::default() });
        }
        // gemm_sub subtracts; flip the sign and undo the row permutation as a
        // column permutation.
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let j = self.perm[k];
                out.re[i * n + j] = -mr[i * n + k];
                out.im[i * n + j] = -mi[i * n + k];
            }
        }
        out
    }

    /// Diagonal of A⁻¹ without forming the product of the triangular inverses.
    pub fn inverse_diagonal(&self) -> Vec<Complex64> {
        let n = self.n;
        let (lr, li) = self.lower_inverse();
        let (ur, ui) = self.upper_inverse();
        let mut pos = vec![0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            pos[p] = k;
        }
        (0..n)
            .map(|i| {
                let k = pos[i];
                let mut s = Complex64::new(0.0, 0.0);
                for l in i.max(k)..n {
                    let u = Complex64::new(ur[i * n + l], ui[i * n + l]);
                    let v = Complex64::new(lr[l * n + k], li[l * n + k]);
                    s += u * v;
                }
                s
            })
            .collect()
    }
}

/// Upper-inverse block update: C[i][j] -= Σ_{p ∈ ps} U[i][p] Y[p][j] with Y
/// upper triangular, where `a` and `b` are offset so that p is counted from
/// `p_base`.
#[allow(clippy::too_many_arguments)]
fn gemm_sub_shifted_upper(c: &mut MatMut, c_row0: usize, rows: Range<usize>, ps: Range<usize>, a: &Mat, b: &Mat, p_base: usize, n: usize) {
    let mut jt = ps.start;
    while jt < n {
        let je = (jt + COL_TILE).min(n);
        // Y[p][j] = 0 for p > j, so p < je.
        let phi = ps.end.min(je);
        let mut pc = ps.start;
        while pc < phi {
            let pe = (pc + P_CHUNK).min(phi);
            for i in rows.clone() {
                let co = (i - c_row0) * c.stride;
                let ao = i * a.stride;
                row_update(
                    &mut c.re[co + jt..co + je],
                    &mut c.im[co + jt..co + je],
                    &a.re[ao + pc - p_base..ao + pe - p_base],
                    &a.im[ao + pc - p_base..ao + pe - p_base],
                    b,
                    jt,
                    pc - p_base,
                );
            }
            pc = pe;
        }
        jt = je;
    }
}

fn swap_rows(a: &mut [f64], n: usize, r1: usize, r2: usize) {
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let (top, bot) = a.split_at_mut(hi * n);
    top[lo * n..lo * n + n].swap_with_slice(&mut bot[..n]);
}
