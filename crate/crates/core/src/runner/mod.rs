//! Configuration, seeded parallel execution, persistence and reports.

mod config;
mod experiments;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    parse_config, DistributionSpec, EnsembleSpec, ExperimentConfig, ExperimentKind, ExperimentParams, Thresholds,
};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const WORKERS_ENV: &str = "RMT_WORKERS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One acceptance clause: `statistic <comparison> threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub statistic: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Clause {
    fn new(name: String, statistic: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::Below => statistic < threshold,
            Comparison::AtMost => statistic <= threshold,
            Comparison::AtLeast => statistic >= threshold,
        };
        Self { name, statistic, comparison, threshold, passed }
    }

    pub fn below(name: String, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, Comparison::Below, threshold)
    }

    pub fn at_most(name: String, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, Comparison::AtMost, threshold)
    }

    pub fn at_least(name: String, statistic: f64, threshold: f64) -> Self {
        Self::new(name, statistic, Comparison::AtLeast, threshold)
    }
}

/// Files (name, bytes) and acceptance clauses produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub clauses: Vec<Clause>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn digests(&self) -> Vec<OutputDigest> {
        self.files
            .iter()
            .map(|(name, bytes)| OutputDigest { file: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
    pub clauses: Vec<Clause>,
    pub passed: bool,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_ACCEPTANCE
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// RMT_WORKERS, then the config hint, then the available parallelism.
pub fn worker_count(cfg: &ExperimentConfig) -> Result<usize, RunError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(RunError::Config(format!("{WORKERS_ENV} must be a positive integer, got \"{v}\""))),
        };
    }
    Ok(cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Runs the experiment on a pool of `workers` threads without touching disk.
pub fn execute_with(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentOutput, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    pool.install(|| experiments::dispatch(cfg))
}

pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    execute_with(cfg, worker_count(cfg)?)
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory and an atomic rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    let mut tmp = tempfile::Builder::new().prefix(&format!(".{name}.")).suffix(".tmp").tempfile_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io(tmp.path()))?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| RunError::Io { path: target.clone(), source: e.error })?;
    Ok(target)
}

/// Executes the experiment and writes its outputs and
/// `<experiment>.manifest.json` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.to_path_buf(), source })?;
    let workers = worker_count(cfg)?;
    let start = Instant::now();
    let out = execute_with(cfg, workers)?;
    let wall = start.elapsed().as_secs_f64();
    for (name, bytes) in &out.files {
        write_atomic(out_dir, name, bytes)?;
    }
    let manifest = RunManifest {
        artifact_version: ARTIFACT_VERSION.to_string(),
        experiment: cfg.experiment,
        config: cfg.clone(),
        workers,
        wall_clock_seconds: wall,
        outputs: out.digests(),
        passed: out.passed(),
        clauses: out.clauses,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(out_dir, &format!("{}.manifest.json", cfg.experiment.tag()), text.as_bytes())?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| RunError::Config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    /// The first failing clause, or the first clause when all pass.
    pub clause: String,
    pub statistic: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub clauses_passed: usize,
    pub clauses_total: usize,
    pub passed: bool,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub passed: bool,
}

pub fn report(manifests: &[RunManifest]) -> Report {
    let rows: Vec<ReportRow> = manifests
        .iter()
        .map(|m| {
            let headline = m.clauses.iter().find(|c| !c.passed).or(m.clauses.first());
            ReportRow {
                experiment: m.experiment.tag().to_string(),
                clause: headline.map_or_else(|| "(no clauses)".to_string(), |c| c.name.clone()),
                statistic: headline.map_or(f64::NAN, |c| c.statistic),
                comparison: headline.map_or(Comparison::Below, |c| c.comparison),
                threshold: headline.map_or(f64::NAN, |c| c.threshold),
                clauses_passed: m.clauses.iter().filter(|c| c.passed).count(),
                clauses_total: m.clauses.len(),
                passed: m.passed,
                runtime_seconds: m.wall_clock_seconds,
            }
        })
        .collect();
    let passed = !rows.is_empty() && rows.iter().all(|r| r.passed);
    Report { rows, passed }
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{x:.4}")
    } else {
        format!("{x:.3e}")
    }
}

impl Report {
    pub fn to_table(&self) -> String {
        let header = ["", "experiment", "statistic", "", "threshold", "clauses", "runtime_s", "clause"];
        let mut cells: Vec<[String; 8]> = vec![header.map(String::from)];
        for r in &self.rows {
            let cmp = serde_json::to_value(r.comparison).expect("comparison serializes");
            cells.push([
                if r.passed { "PASS".into() } else { "FAIL".into() },
                r.experiment.clone(),
                fmt_num(r.statistic),
                cmp.as_str().unwrap_or("").to_string(),
                fmt_num(r.threshold),
                format!("{}/{}", r.clauses_passed, r.clauses_total),
                format!("{:.1}", r.runtime_seconds),
                r.clause.clone(),
            ]);
        }
        let widths: Vec<usize> = (0..8).map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(0)).collect();
        let mut s = String::new();
        for row in &cells {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(s, "{}", line.join("  ").trim_end());
        }
        let _ = writeln!(s, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}
