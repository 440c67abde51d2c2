use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EnsembleError, EntryDistribution, VarianceProfile};
use crate::linalg::HermitianMatrix;
use crate::seed::{entry_seed, rng_from};

const MAGIC: &[u8; 4] = b"RMT1";

/// β = 1 (real symmetric) or β = 2 (complex Hermitian).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum SymmetryClass {
    Real,
    Complex,
}

impl SymmetryClass {
    pub fn beta(self) -> u8 {
        match self {
            SymmetryClass::Real => 1,
            SymmetryClass::Complex => 2,
        }
    }

    pub fn beta_f64(self) -> f64 {
        self.beta() as f64
    }
}

impl TryFrom<u8> for SymmetryClass {
    type Error = String;
    fn try_from(b: u8) -> Result<Self, String> {
        match b {
            1 => Ok(SymmetryClass::Real),
            2 => Ok(SymmetryClass::Complex),
            _ => Err(format!("beta must be 1 or 2, got {b}")),
        }
    }
}

impl From<SymmetryClass> for u8 {
    fn from(s: SymmetryClass) -> u8 {
        s.beta()
    }
}

/// One sampled matrix with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub symmetry_class: SymmetryClass,
    pub entries: HermitianMatrix,
    pub profile_id: String,
    pub dist_id: String,
    pub seed: u64,
}

/// Draws H with E|h_ij|² = σ²_ij. The profile must satisfy the column-sum
/// condition to within 1e-9.
pub fn sample_matrix(
    p: &VarianceProfile,
    d: &EntryDistribution,
    beta: SymmetryClass,
    seed: u64,
) -> Result<MatrixSample, EnsembleError> {
    let n = p.n();
    for j in 0..n {
        let c: f64 = (0..n).map(|i| p.variance(i, j)).sum();
        if (c - 1.0).abs() > 1e-9 {
            return Err(EnsembleError::Sampling(format!("column {j} of the profile sums to {c}")));
        }
    }
    if p.variances().iter().any(|&v| v < 0.0) {
        return Err(EnsembleError::Sampling("negative variance".into()));
    }
    Ok(sample_unchecked(p, d, beta, seed))
}

/// Sampling without the profile checks (zero or non-stochastic profiles are
/// useful for exercising the diagnostics).
pub(crate) fn sample_unchecked(p: &VarianceProfile, d: &EntryDistribution, beta: SymmetryClass, seed: u64) -> MatrixSample {
    let n = p.n();
    let real = beta == SymmetryClass::Real;
    let entries = HermitianMatrix::from_upper(n, real, |i, j| {
        let s = p.variance(i, j).max(0.0).sqrt();
        let mut rng = rng_from(entry_seed(seed, i, j));
        if i == j || real {
            Complex64::new(s * d.sample(&mut rng), 0.0)
        } else {
            let a = d.sample(&mut rng);
            let b = d.sample(&mut rng);
            Complex64::new(a, b) * (s * std::f64::consts::FRAC_1_SQRT_2)
        }
    });
    MatrixSample {
        symmetry_class: beta,
        entries,
        profile_id: p.id(),
        dist_id: d.id(),
        seed,
    }
}

impl MatrixSample {
    pub fn n(&self) -> usize {
        self.entries.dim()
    }

    /// "RMT1" | n: u64 | β: u32 | seed: u64 | real plane | imaginary plane (β=2),
    /// all little-endian, planes row-major f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.symmetry_class.beta() as u32).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in self.entries.re() {
            w.write_all(&v.to_le_bytes())?;
        }
        if self.symmetry_class == SymmetryClass::Complex {
            let zeros;
            let im = match self.entries.im() {
                Some(im) => im,
                None => {
                    zeros = vec![0.0; self.n() * self.n()];
                    &zeros
                }
            };
            for v in im {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_binary`](Self::write_binary). Provenance ids are
    /// not part of the format and come back empty.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, EnsembleError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(EnsembleError::Format("bad magic".into()));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b4)?;
        let beta = SymmetryClass::try_from(u32::from_le_bytes(b4) as u8).map_err(EnsembleError::Format)?;
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let mut plane = || -> Result<Vec<f64>, EnsembleError> {
            let mut v = Vec::with_capacity(n * n);
            for _ in 0..n * n {
                r.read_exact(&mut b8)?;
                v.push(f64::from_le_bytes(b8));
            }
            Ok(v)
        };
        let re = plane()?;
        let im = if beta == SymmetryClass::Complex { Some(plane()?) } else { None };
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n * n {
            entries[k] = Complex64::new(re[k], im.as_ref().map_or(0.0, |v| v[k]));
        }
        let entries = HermitianMatrix::from_entries(n, &entries).map_err(|e| EnsembleError::Format(e.to_string()))?;
        Ok(Self { symmetry_class: beta, entries, profile_id: String::new(), dist_id: String::new(), seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{catalog_distribution, wigner_profile};

    #[test]
    fn bernoulli_two_by_two_support() {
        let p = wigner_profile(2).unwrap();
        let d = catalog_distribution("bernoulli").unwrap();
        for seed in 0..20 {
            let h = sample_matrix(&p, &d, SymmetryClass::Real, seed).unwrap().entries;
            for i in 0..2 {
                for j in 0..2 {
                    assert!((h.get(i, j).re.abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
                }
            }
            assert_eq!(h.get(0, 1), h.get(1, 0));
        }
    }

    #[test]
    fn determinism() {
        let p = wigner_profile(30).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        let a = sample_matrix(&p, &d, SymmetryClass::Complex, 77).unwrap();
        let b = sample_matrix(&p, &d, SymmetryClass::Complex, 77).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix(&p, &d, SymmetryClass::Complex, 78).unwrap();
        assert_ne!(a.entries, c.entries);
    }

    #[test]
    fn exact_hermitian_with_real_diagonal() {
        let p = wigner_profile(9).unwrap();
        let d = catalog_distribution("uniform").unwrap();
        let h = sample_matrix(&p, &d, SymmetryClass::Complex, 3).unwrap().entries;
        assert_eq!(h.hermitian_defect(), 0.0);
        for i in 0..9 {
            assert_eq!(h.get(i, i).im, 0.0);
        }
    }

    #[test]
    fn non_stochastic_profile_rejected() {
        let p = VarianceProfile::from_variances(2, vec![0.5, 0.5, 0.5, 0.4]).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        assert!(matches!(sample_matrix(&p, &d, SymmetryClass::Real, 0), Err(EnsembleError::Sampling(_))));
    }

    #[test]
    fn binary_round_trip() {
        let p = wigner_profile(5).unwrap();
        let d = catalog_distribution("gaussian").unwrap();
        for beta in [SymmetryClass::Real, SymmetryClass::Complex] {
            let s = sample_matrix(&p, &d, beta, 12).unwrap();
            let mut buf = Vec::new();
            s.write_binary(&mut buf).unwrap();
            let expect = 4 + 8 + 4 + 8 + 25 * 8 * beta.beta() as usize;
            assert_eq!(buf.len(), expect);
            assert_eq!(&buf[..4], b"RMT1");
            let back = MatrixSample::read_binary(&buf[..]).unwrap();
            assert_eq!(back.entries, s.entries);
            assert_eq!(back.seed, 12);
        }
    }
}
