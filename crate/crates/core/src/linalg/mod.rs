//! Dense Hermitian linear algebra: eigensolver, LU resolvent, minors.

mod eigh;
mod lu;
mod matrix;

pub use eigh::{eigh, eigvalsh, stieltjes, Spectrum};
pub use lu::LuFactors;
pub use matrix::{ComplexMatrix, HermitianMatrix};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (defect {defect:e})")]
    Symmetry { defect: f64 },
    #[error("QL iteration did not converge for eigenvalue {index} after {sweeps} sweeps")]
    Convergence { index: usize, sweeps: usize },
    #[error("index {index} out of range for dimension {n}")]
    Index { index: usize, n: usize },
    #[error("pivot {magnitude:e} at column {column} is singular to working precision")]
    Solver { column: usize, magnitude: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Surviving indices of a minor and the map back from original positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorIndex {
    removed: Vec<usize>,
    kept: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl MinorIndex {
    pub fn new(n: usize, t: &[usize]) -> Result<Self, LinalgError> {
        let mut removed = t.to_vec();
        removed.sort_unstable();
        removed.dedup();
        if let Some(&bad) = removed.iter().find(|&&i| i >= n) {
            return Err(LinalgError::Index { index: bad, n });
        }
        let mut position = vec![None; n];
        let mut kept = Vec::with_capacity(n - removed.len());
        for i in 0..n {
            if removed.binary_search(&i).is_err() {
                position[i] = Some(kept.len());
                kept.push(i);
            }
        }
        Ok(Self { removed, kept, position })
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    /// Original indices in compacted order.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// Compacted position of an original index, if it survives.
    pub fn position(&self, original: usize) -> Option<usize> {
        self.position.get(original).copied().flatten()
    }
}

/// H^{(𝕋)}: rows and columns in `t` deleted.
pub fn minor(h: &HermitianMatrix, t: &[usize]) -> Result<(HermitianMatrix, MinorIndex), LinalgError> {
    let idx = MinorIndex::new(h.dim(), t)?;
    let n = h.dim();
    let k = idx.kept.len();
    let mut re = Vec::with_capacity(k * k);
    let mut im = h.im().map(|_| Vec::with_capacity(k * k));
    for &i in &idx.kept {
        for &j in &idx.kept {
            re.push(h.re()[i * n + j]);
            if let (Some(dst), Some(src)) = (im.as_mut(), h.im()) {
                dst.push(src[i * n + j]);
            }
        }
    }
    Ok((HermitianMatrix::from_parts(k, re, im), idx))
}

/// G^{(𝕋)}(z) with entries addressed by original indices.
#[derive(Debug, Clone)]
pub struct ResolventSlice {
    pub z: Complex64,
    pub entries: ComplexMatrix,
    pub index: MinorIndex,
}

impl ResolventSlice {
    pub fn minor_set(&self) -> &[usize] {
        self.index.removed()
    }

    /// G^{(𝕋)}_ij for original indices i, j ∉ 𝕋.
    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        Some(self.entries.get(self.index.position(i)?, self.index.position(j)?))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.entries.rows()).map(|k| self.entries.get(k, k)).collect()
    }
}

fn check_upper_half(z: Complex64) -> Result<(), LinalgError> {
    if z.im > 0.0 {
        Ok(())
    } else {
        Err(LinalgError::Dimension(format!("resolvent needs Im z > 0, got {z}")))
    }
}

/// G^{(𝕋)}(z) = (H^{(𝕋)} − z)⁻¹ by LU with partial pivoting.
pub fn resolvent(h: &HermitianMatrix, z: Complex64, t: &[usize]) -> Result<ResolventSlice, LinalgError> {
    check_upper_half(z)?;
    let (m, index) = minor(h, t)?;
    let entries = if m.dim() == 0 {
        ComplexMatrix::zeros(0, 0)
    } else {
        LuFactors::factor(&m.shifted(z))?.inverse()
    };
    Ok(ResolventSlice { z, entries, index })
}

/// Diagonal of G(z) only; cheaper than the full inverse.
pub fn resolvent_diagonal(h: &HermitianMatrix, z: Complex64) -> Result<Vec<Complex64>, LinalgError> {
    check_upper_half(z)?;
    if h.dim() == 0 {
        return Ok(vec![]);
    }
    Ok(LuFactors::factor(&h.shifted(z))?.inverse_diagonal())
}

/// ‖(H^{(𝕋)} − z) G − I‖_max
pub fn inverse_residual(h: &HermitianMatrix, g: &ResolventSlice) -> Result<f64, LinalgError> {
    let (m, _) = minor(h, g.minor_set())?;
    Ok(m.shifted(g.z).matmul(&g.entries)?.identity_defect())
}

/// Z^{(𝕋)}_ij = Σ_{k,l∉𝕋} conj(h_ki) G^{(𝕋)}_kl h_lj together with
/// K^{(𝕋)}_ij = h_ij − zδ_ij − Z^{(𝕋)}_ij.
///
/// Both i and j must belong to 𝕋, so the caller passes the full removed set
/// (e.g. {i} ∪ 𝕋′ for K^{(i𝕋′)}_ii).
pub fn quadratic_form_z(
    h: &HermitianMatrix,
    i: usize,
    j: usize,
    t: &[usize],
    z: Complex64,
) -> Result<(Complex64, Complex64), LinalgError> {
    let n = h.dim();
    for &x in &[i, j] {
        if x >= n {
            return Err(LinalgError::Index { index: x, n });
        }
        if !t.contains(&x) {
            return Err(LinalgError::Index { index: x, n });
        }
    }
    let g = resolvent(h, z, t)?;
    let kept = g.index.kept();
    // a^i_k = h_ki, so conj(a^i_k) = h_ik.
    let ai: Vec<Complex64> = kept.iter().map(|&k| h.get(i, k)).collect();
    let aj: Vec<Complex64> = kept.iter().map(|&l| h.get(l, j)).collect();
    let mut zval = Complex64::new(0.0, 0.0);
    for (p, a) in ai.iter().enumerate() {
        let row: Complex64 = aj.iter().enumerate().map(|(q, b)| g.entries.get(p, q) * b).sum();
        zval += a * row;
    }
    let delta = if i == j { z } else { Complex64::new(0.0, 0.0) };
    Ok((zval, h.get(i, j) - delta - zval))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, seed: u64) -> HermitianMatrix {
        let mut s = seed;
        HermitianMatrix::from_upper(n, false, |i, j| {
            s = crate::seed::splitmix64(s);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            s = crate::seed::splitmix64(s);
            let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            if i == j {
                c(a, 0.0)
            } else {
                c(a, b)
            }
        })
    }

    #[test]
    fn zero_matrix_resolvent_is_i() {
        let h = HermitianMatrix::zeros(4, false);
        let g = resolvent(&h, c(0.0, 1.0), &[]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) };
                assert!((g.get(i, j).unwrap() - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_resolvent() {
        let h = HermitianMatrix::from_real(1, &[0.7]).unwrap();
        let z = c(0.2, 0.3);
        let g = resolvent(&h, z, &[]).unwrap();
        assert!((g.get(0, 0).unwrap() - 1.0 / (0.7 - z)).norm() < 1e-15);
    }

    #[test]
    fn lu_matches_spectral_oracle() {
        let h = sample(8, 3);
        let z = c(0.3, 0.1);
        let g = resolvent(&h, z, &[]).unwrap();
        let spec = eigh(&h, true).unwrap().resolvent(z).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((g.get(i, j).unwrap() - spec.get(i, j)).norm() < 1e-8);
            }
        }
        assert!(inverse_residual(&h, &g).unwrap() < 1e-8);
    }

    #[test]
    fn minor_semantics() {
        let h = sample(5, 9);
        let (same, _) = minor(&h, &[]).unwrap();
        assert_eq!(same, h);
        let (m1, _) = minor(&h, &[1]).unwrap();
        let (m13, _) = minor(&m1, &[2]).unwrap();
        let (direct, idx) = minor(&h, &[3, 1]).unwrap();
        assert_eq!(m13, direct);
        assert_eq!(idx.kept(), &[0, 2, 4]);
        assert_eq!(idx.position(2), Some(1));
        assert_eq!(idx.position(3), None);
        assert!(matches!(minor(&h, &[5]), Err(LinalgError::Index { index: 5, n: 5 })));
    }

    #[test]
    fn corners_of_three_by_three() {
        let h = HermitianMatrix::from_real(3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]).unwrap();
        let (m, _) = minor(&h, &[1]).unwrap();
        assert_eq!(m.re(), &[1.0, 3.0, 3.0, 6.0]);
    }

    #[test]
    fn quadratic_form_two_by_two_by_hand() {
        let h = HermitianMatrix::from_upper(2, false, |i, j| match (i, j) {
            (0, 0) => c(0.4, 0.0),
            (1, 1) => c(-0.3, 0.0),
            _ => c(0.2, -0.5),
        });
        let z = c(0.1, 0.2);
        let (zz, k) = quadratic_form_z(&h, 1, 1, &[1], z).unwrap();
        let want = c(0.2, -0.5).norm_sqr() / (0.4 - z);
        assert!((zz - want).norm() < 1e-14);
        assert!((k - (c(-0.3, 0.0) - z - want)).norm() < 1e-14);
    }

    #[test]
    fn zero_column_gives_k_minus_z() {
        let h = HermitianMatrix::from_upper(3, false, |i, j| if i == 2 || j == 2 { c(0.0, 0.0) } else { c(1.0, 0.0) });
        let z = c(0.0, 1.0);
        let (zz, k) = quadratic_form_z(&h, 2, 2, &[2], z).unwrap();
        assert_eq!(zz, c(0.0, 0.0));
        assert_eq!(k, -z);
    }

    #[test]
    fn gii_is_inverse_of_k() {
        let h = sample(6, 11);
        let z = c(-0.4, 0.25);
        let g = resolvent(&h, z, &[]).unwrap();
        for i in 0..6 {
            let (_, k) = quadratic_form_z(&h, i, i, &[i], z).unwrap();
            assert!((g.get(i, i).unwrap() - 1.0 / k).norm() < 1e-10);
        }
    }

    #[test]
    fn index_conflicts_rejected() {
        let h = sample(4, 1);
        assert!(quadratic_form_z(&h, 0, 0, &[1], c(0.0, 1.0)).is_err());
        assert!(quadratic_form_z(&h, 7, 7, &[7], c(0.0, 1.0)).is_err());
    }
}
