use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EnsembleError;

const ATOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Bernoulli,
    Gaussian,
    Uniform,
    DiscreteAtoms,
}

/// A standardized (mean 0, variance 1) entry law.
///
/// With `gaussian_weight = Some(γ)` the sampled variable is
/// √(1−γ)·X + √γ·G, X drawn from the base law and G an independent standard
/// Gaussian. The stored moments and tail parameters describe that mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord", into = "DistributionRecord")]
pub struct EntryDistribution {
    kind: DistributionKind,
    atoms: Option<Vec<(f64, f64)>>,
    gaussian_weight: Option<f64>,
    m3: f64,
    m4: f64,
    subexp_alpha: f64,
    subexp_beta: f64,
    /// Cumulative probabilities for atom sampling.
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionRecord {
    kind: DistributionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gaussian_weight: Option<f64>,
    #[serde(default)]
    m3: Option<f64>,
    #[serde(default)]
    m4: Option<f64>,
    #[serde(default)]
    subexp_alpha: Option<f64>,
    #[serde(default)]
    subexp_beta: Option<f64>,
}

impl TryFrom<DistributionRecord> for EntryDistribution {
    type Error = EnsembleError;
    fn try_from(r: DistributionRecord) -> Result<Self, Self::Error> {
        let base = match r.kind {
            DistributionKind::DiscreteAtoms => {
                EntryDistribution::from_atoms(r.atoms.ok_or_else(|| EnsembleError::InvalidDistribution("discrete-atoms needs `atoms`".into()))?)?
            }
            _ if r.atoms.is_some() => {
                return Err(EnsembleError::InvalidDistribution("`atoms` is only valid for discrete-atoms".into()))
            }
            DistributionKind::Bernoulli => bernoulli(),
            DistributionKind::Gaussian => gaussian(),
            DistributionKind::Uniform => uniform(),
        };
        match r.gaussian_weight {
            Some(g) => base.gaussian_divisible(g),
            None => Ok(base),
        }
    }
}

impl From<EntryDistribution> for DistributionRecord {
    fn from(d: EntryDistribution) -> Self {
        DistributionRecord {
            kind: d.kind,
            atoms: if d.kind == DistributionKind::DiscreteAtoms { d.atoms } else { None },
            gaussian_weight: d.gaussian_weight,
            m3: Some(d.m3),
            m4: Some(d.m4),
            subexp_alpha: Some(d.subexp_alpha),
            subexp_beta: Some(d.subexp_beta),
        }
    }
}

fn bernoulli() -> EntryDistribution {
    EntryDistribution {
        kind: DistributionKind::Bernoulli,
        atoms: Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
        gaussian_weight: None,
        m3: 0.0,
        m4: 1.0,
        subexp_alpha: 1.0,
        subexp_beta: std::f64::consts::E,
        cdf: vec![0.5, 1.0],
    }
}

fn gaussian() -> EntryDistribution {
    EntryDistribution {
        kind: DistributionKind::Gaussian,
        atoms: None,
        gaussian_weight: None,
        m3: 0.0,
        m4: 3.0,
        subexp_alpha: 1.0,
        subexp_beta: 2.0,
        cdf: vec![],
    }
}

fn uniform() -> EntryDistribution {
    EntryDistribution {
        kind: DistributionKind::Uniform,
        atoms: None,
        gaussian_weight: None,
        m3: 0.0,
        m4: 1.8,
        subexp_alpha: 1.0,
        subexp_beta: 3f64.sqrt().exp(),
        cdf: vec![],
    }
}

/// bernoulli | gaussian | uniform
pub fn catalog_distribution(name: &str) -> Result<EntryDistribution, EnsembleError> {
    match name {
        "bernoulli" => Ok(bernoulli()),
        "gaussian" => Ok(gaussian()),
        "uniform" => Ok(uniform()),
        other => Err(EnsembleError::NotFound(other.to_string())),
    }
}

impl EntryDistribution {
    /// A finite law given by (value, probability) pairs. It must already be
    /// standardized.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self, EnsembleError> {
        if atoms.is_empty() {
            return Err(EnsembleError::InvalidDistribution("no atoms".into()));
        }
        if atoms.iter().any(|&(x, p)| !x.is_finite() || !(p >= 0.0)) {
            return Err(EnsembleError::InvalidDistribution("atoms need finite values and nonnegative probabilities".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > ATOM_TOL {
            return Err(EnsembleError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        let moment = |k: i32| atoms.iter().map(|&(x, p)| p * x.powi(k)).sum::<f64>();
        let (m1, m2) = (moment(1), moment(2));
        if m1.abs() > ATOM_TOL || (m2 - 1.0).abs() > ATOM_TOL {
            return Err(EnsembleError::InvalidDistribution(format!("atoms are not standardized: mean {m1}, variance {m2}")));
        }
        let radius = atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0.abs()).fold(0.0, f64::max);
        let mut acc = 0.0;
        let cdf = atoms
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        Ok(Self {
            kind: DistributionKind::DiscreteAtoms,
            gaussian_weight: None,
            m3: moment(3),
            m4: moment(4),
            subexp_alpha: 1.0,
            subexp_beta: radius.exp(),
            cdf,
            atoms: Some(atoms),
        })
    }

    /// √(1−γ)·X + √γ·G for this law X.
    pub fn gaussian_divisible(&self, gamma: f64) -> Result<Self, EnsembleError> {
        if self.gaussian_weight.is_some() {
            return Err(EnsembleError::InvalidDistribution("law is already Gaussian-divisible".into()));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(EnsembleError::InvalidDistribution(format!("gaussian weight {gamma} outside [0, 1]")));
        }
        let a = (1.0 - gamma).sqrt();
        let subexp_beta = match self.radius() {
            // |aX + bG| ≥ x forces |G| ≥ x − aR, and P(|G| ≥ y) ≤ 2e^{−y}.
            Some(r) => 2.0 * (a * r).exp(),
            None => 2.0,
        };
        Ok(Self {
            gaussian_weight: Some(gamma),
            m3: (1.0 - gamma).powf(1.5) * self.m3,
            m4: (1.0 - gamma).powi(2) * self.m4 + 6.0 * gamma - 3.0 * gamma * gamma,
            subexp_alpha: 1.0,
            subexp_beta,
            ..self.clone()
        })
    }

    /// Bound on |X| for the base law, if bounded.
    fn radius(&self) -> Option<f64> {
        match self.kind {
            DistributionKind::Gaussian => None,
            DistributionKind::Uniform => Some(3f64.sqrt()),
            DistributionKind::Bernoulli | DistributionKind::DiscreteAtoms => {
                self.atoms.as_ref().map(|a| a.iter().filter(|x| x.1 > 0.0).map(|x| x.0.abs()).fold(0.0, f64::max))
            }
        }
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        self.atoms.as_deref()
    }

    pub fn gaussian_weight(&self) -> Option<f64> {
        self.gaussian_weight
    }

    pub fn m3(&self) -> f64 {
        self.m3
    }

    pub fn m4(&self) -> f64 {
        self.m4
    }

    pub fn subexp_alpha(&self) -> f64 {
        self.subexp_alpha
    }

    pub fn subexp_beta(&self) -> f64 {
        self.subexp_beta
    }

    /// Human-readable id, e.g. "bernoulli" or "discrete-atoms(3)+g0.1".
    pub fn id(&self) -> String {
        let base = match self.kind {
            DistributionKind::Bernoulli => "bernoulli".to_string(),
            DistributionKind::Gaussian => "gaussian".to_string(),
            DistributionKind::Uniform => "uniform".to_string(),
            DistributionKind::DiscreteAtoms => format!("discrete-atoms({})", self.atoms.as_ref().map_or(0, Vec::len)),
        };
        match self.gaussian_weight {
            Some(g) => format!("{base}+g{g}"),
            None => base,
        }
    }

    /// One standardized draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match self.kind {
            DistributionKind::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionKind::Gaussian => rng.sample(StandardNormal),
            DistributionKind::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
            DistributionKind::DiscreteAtoms => {
                let u: f64 = rng.random();
                let atoms = self.atoms.as_ref().expect("atoms present");
                let k = self.cdf.partition_point(|&c| c <= u).min(atoms.len() - 1);
                atoms[k].0
            }
        };
        match self.gaussian_weight {
            Some(g) => {
                let z: f64 = rng.sample(StandardNormal);
                (1.0 - g).sqrt() * x + g.sqrt() * z
            }
            None => x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    #[test]
    fn catalog_moments() {
        assert_eq!(catalog_distribution("bernoulli").unwrap().m4(), 1.0);
        assert_eq!(catalog_distribution("gaussian").unwrap().m4(), 3.0);
        let u = catalog_distribution("uniform").unwrap();
        // ∫_{−√3}^{√3} x⁴ dx / (2√3) = 9/5
        let s3 = 3f64.sqrt();
        let exact = (s3.powi(5) * 2.0 / 5.0) / (2.0 * s3);
        assert!((u.m4() - exact).abs() < 1e-14);
        assert!(matches!(catalog_distribution("cauchy"), Err(EnsembleError::NotFound(_))));
    }

    #[test]
    fn atom_validation() {
        assert!(EntryDistribution::from_atoms(vec![(-1.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(EntryDistribution::from_atoms(vec![(-2.0, 0.5), (2.0, 0.5)]).is_err());
        let d = EntryDistribution::from_atoms(vec![(-2.0, 0.125), (0.0, 0.75), (2.0, 0.125)]).unwrap();
        assert!((d.m4() - 4.0).abs() < 1e-14);
        assert!(d.m4() - d.m3() * d.m3() - 1.0 >= 0.0);
    }

    #[test]
    fn mixture_moments_match_formula() {
        let b = catalog_distribution("bernoulli").unwrap();
        let g = b.gaussian_divisible(0.3).unwrap();
        // (0.7)²·1 + 6·0.3·0.7 + 3·0.09
        assert!((g.m4() - (0.49 + 1.26 + 0.27)).abs() < 1e-14);
        assert!(g.gaussian_divisible(0.1).is_err());
    }

    #[test]
    fn sampler_hits_atoms() {
        let d = EntryDistribution::from_atoms(vec![(-2.0, 0.125), (0.0, 0.75), (2.0, 0.125)]).unwrap();
        let mut rng = rng_from(4);
        let mut counts = [0usize; 3];
        for _ in 0..8000 {
            let x = d.sample(&mut rng);
            counts[((x + 2.0) / 2.0) as usize] += 1;
        }
        assert!(counts[1] > 5700 && counts[1] < 6300, "{counts:?}");
    }

    #[test]
    fn json_round_trip() {
        let d = catalog_distribution("bernoulli").unwrap().gaussian_divisible(0.25).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let e: EntryDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(d, e);
        let bad = r#"{"kind":"gaussian","atoms":[[1.0,1.0]]}"#;
        assert!(serde_json::from_str::<EntryDistribution>(bad).is_err());
    }
}
