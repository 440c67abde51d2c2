use serde::{Deserialize, Serialize};

use super::RunError;
use crate::ensembles::{catalog_distribution, EntryDistribution, ProfileSpec, SymmetryClass};
use crate::locallaw::{CoefficientCase, CoefficientFixture, ScanOptions};
use crate::moments::{three_point_construct, MatchStrategy, MomentTarget};
use crate::semicircle::SpectralPoint;
use crate::stats::{Functional, DEFAULT_KAPPA_CUT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    LocallawScan,
    Rigidity,
    Counting,
    Edge,
    DbmGaps,
    MomentsMatch,
    GreenCompare,
    Largedev,
    Zmoments,
    Correlations,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::LocallawScan,
        ExperimentKind::Rigidity,
        ExperimentKind::Counting,
        ExperimentKind::Edge,
        ExperimentKind::DbmGaps,
        ExperimentKind::MomentsMatch,
        ExperimentKind::GreenCompare,
        ExperimentKind::Largedev,
        ExperimentKind::Zmoments,
        ExperimentKind::Correlations,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::LocallawScan => "locallaw-scan",
            ExperimentKind::Rigidity => "rigidity",
            ExperimentKind::Counting => "counting",
            ExperimentKind::Edge => "edge",
            ExperimentKind::DbmGaps => "dbm-gaps",
            ExperimentKind::MomentsMatch => "moments-match",
            ExperimentKind::GreenCompare => "green-compare",
            ExperimentKind::Largedev => "largedev",
            ExperimentKind::Zmoments => "zmoments",
            ExperimentKind::Correlations => "correlations",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

/// An entry law by catalog name, explicit atoms, or as the three-point law
/// with given third and fourth moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Named(String),
    Atoms {
        atoms: Vec<(f64, f64)>,
    },
    ThreePoint {
        #[serde(rename = "three-point")]
        three_point: MomentTarget,
    },
}

impl DistributionSpec {
    pub fn resolve(&self) -> Result<EntryDistribution, RunError> {
        match self {
            DistributionSpec::Named(name) => {
                catalog_distribution(name).map_err(|_| RunError::Config(format!("unknown distribution \"{name}\"")))
            }
            DistributionSpec::Atoms { atoms } => {
                EntryDistribution::from_atoms(atoms.clone()).map_err(|e| RunError::Config(e.to_string()))
            }
            DistributionSpec::ThreePoint { three_point } => {
                let t = MomentTarget::new(three_point.m3, three_point.m4).map_err(|e| RunError::Config(e.to_string()))?;
                three_point_construct(t).map_err(|e| RunError::Config(e.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "wigner")]
    pub profile: ProfileSpec,
    pub distribution: DistributionSpec,
    #[serde(default = "complex")]
    pub beta: SymmetryClass,
}

fn wigner() -> ProfileSpec {
    ProfileSpec::Wigner
}

fn complex() -> SymmetryClass {
    SymmetryClass::Complex
}

impl EnsembleSpec {
    pub fn gue() -> Self {
        Self { profile: ProfileSpec::Wigner, distribution: DistributionSpec::Named("gaussian".into()), beta: SymmetryClass::Complex }
    }

    pub fn named(name: &str) -> Self {
        Self { distribution: DistributionSpec::Named(name.into()), ..Self::gue() }
    }
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self::gue()
    }
}

/// Acceptance constants with defaults matching the frozen thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// ε in N^ε factors.
    pub epsilon: f64,
    /// Constant in front of N^ε factors and of the local-law medians.
    pub multiplier: f64,
    /// Largest allowed ratio of medians between the largest and smallest n.
    pub flatness: f64,
    /// ε in the edge bound 2 + N^{−1/6+ε}.
    pub edge_epsilon: f64,
    /// Σ(λ_j − γ_j)² < N^{−exponent}.
    pub rigidity_exponent: f64,
    /// Share of samples that must pass the counting-function bound.
    pub min_pass_fraction: f64,
    /// Pairwise KS bound for gaps along the flow.
    pub ks_flow: f64,
    /// KS bound between the ensemble and the reference gap CDFs.
    pub ks_universality: f64,
    /// L² distance of the pair correlation from 1 − K².
    pub l2_correlation: f64,
    /// |Δm₄| ≤ factor·γ.
    pub moment_factor: f64,
    pub m3_tolerance: f64,
    /// Monte Carlo moments within this many standard errors.
    pub mc_sigmas: f64,
    /// Largest acceptable large-deviation exceedance rate.
    pub max_rate: f64,
    /// Largest acceptable Z-moment ratio.
    pub zmoment_ratio: f64,
    /// |difference| < significance · standard error in Green comparisons.
    pub significance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            multiplier: 10.0,
            flatness: 4.0,
            edge_epsilon: 0.05,
            rigidity_exponent: 1.0 / 7.0,
            min_pass_fraction: 0.95,
            ks_flow: 0.03,
            ks_universality: 0.05,
            l2_correlation: 0.05,
            moment_factor: 4.0,
            m3_tolerance: 1e-12,
            mc_sigmas: 5.0,
            max_rate: 0.01,
            zmoment_ratio: 1.0,
            significance: 3.0,
        }
    }
}

/// Experiment-specific settings; each experiment reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub scan: ScanOptions,
    /// Flow times for dbm-gaps.
    pub times: Vec<f64>,
    pub kappa_cut: f64,
    /// Second ensemble for green-compare and correlations.
    pub reference: Option<EnsembleSpec>,
    pub functional: Functional,
    /// Energies for green-compare; η = 1/N.
    pub energies: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Targets per axis in moments-match.
    pub grid: usize,
    /// Third moments range over [−m3_range, m3_range].
    pub m3_range: f64,
    pub m4_max: f64,
    pub strategy: MatchStrategy,
    pub mc_draws: usize,
    pub case: CoefficientCase,
    pub fixture: CoefficientFixture,
    pub p_max: u32,
    /// Correlation order for the correlations experiment.
    pub k: usize,
    /// Energy window half-width b; N^{−0.1} when absent.
    pub window: Option<f64>,
    pub bins: usize,
    pub max_offset: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            scan: ScanOptions::default(),
            times: vec![0.0, 0.1, 1.0],
            kappa_cut: DEFAULT_KAPPA_CUT,
            reference: None,
            functional: Functional::ImTrace,
            energies: vec![0.0],
            gammas: vec![0.001, 0.01, 0.1],
            grid: 10,
            m3_range: 2.5,
            m4_max: 10.0,
            strategy: MatchStrategy::ExactFourth,
            mc_draws: 1_000_000,
            case: CoefficientCase::Linear,
            fixture: CoefficientFixture::Random,
            p_max: 2,
            k: 2,
            window: None,
            bins: 20,
            max_offset: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    pub sizes: Vec<usize>,
    /// Explicit spectral points; otherwise E = `energy`, η = n^{−eta_exponent}.
    #[serde(default)]
    pub z_grid: Option<Vec<SpectralPoint>>,
    #[serde(default)]
    pub energy: f64,
    #[serde(default = "default_eta_exponent")]
    pub eta_exponent: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Parallelism hint; RMT_WORKERS takes precedence.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub params: ExperimentParams,
}

fn default_eta_exponent() -> f64 {
    0.8
}

impl ExperimentConfig {
    /// Spectral points used at size n.
    pub fn z_points(&self, n: usize) -> Vec<SpectralPoint> {
        match &self.z_grid {
            Some(g) => g.clone(),
            None => vec![SpectralPoint { e: self.energy, eta: (n as f64).powf(-self.eta_exponent) }],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a JSON configuration. Errors carry the JSON path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, RunError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        RunError::Config(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), RunError> {
    let mut errors = Vec::new();
    if cfg.sizes.is_empty() {
        errors.push("sizes: at least one size is required".to_string());
    }
    if cfg.sizes.contains(&0) {
        errors.push("sizes: sizes must be positive".to_string());
    }
    if cfg.samples == 0 {
        errors.push("samples: must be positive".to_string());
    }
    if cfg.workers == Some(0) {
        errors.push("workers: must be positive".to_string());
    }
    if let Err(e) = cfg.ensemble.distribution.resolve() {
        errors.push(format!("ensemble.distribution: {e}"));
    }
    if let Some(r) = &cfg.params.reference {
        if let Err(e) = r.distribution.resolve() {
            errors.push(format!("params.reference.distribution: {e}"));
        }
    }
    if let Some(g) = &cfg.z_grid {
        for (i, z) in g.iter().enumerate() {
            if !(z.eta > 0.0) {
                errors.push(format!("z_grid[{i}]: eta must be positive, got {}", z.eta));
            }
        }
    }
    if !(cfg.params.kappa_cut > 0.0 && cfg.params.kappa_cut < 2.0) {
        errors.push(format!("params.kappa_cut: must lie in (0, 2), got {}", cfg.params.kappa_cut));
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(RunError::Config(errors.join("; ")))
    }
}
