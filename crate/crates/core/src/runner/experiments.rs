use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{EnsembleSpec, ExperimentConfig, ExperimentKind};
use super::{Clause, ExperimentOutput, RunError};
use crate::dbm::{assumption_iii_stat, flow_coefficients, flow_interpolate};
use crate::ensembles::{catalog_distribution, sample_matrix, EntryDistribution, SymmetryClass, VarianceProfile};
use crate::linalg::eigvalsh;
use crate::locallaw::{
    counting_gap, edge_check, large_deviation_mc, local_law_scan, rigidity_stat, z_average_moments, LocalLawError,
};
use crate::moments::{match_four_moments, min_fourth_moment_error, MomentTarget};
use crate::seed::{job_seed, rng_from};
use crate::stats::{
    gap_distribution, green_comparison, kpoint_estimate, ks_distance, sine_kernel, unfold, Ensemble, GreenOptions,
    KPointOptions, StatsError,
};

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    match cfg.experiment {
        ExperimentKind::LocallawScan => locallaw_scan(cfg),
        ExperimentKind::Rigidity => rigidity(cfg),
        ExperimentKind::Counting => counting(cfg),
        ExperimentKind::Edge => edge(cfg),
        ExperimentKind::DbmGaps => dbm_gaps(cfg),
        ExperimentKind::MomentsMatch => moments_match(cfg),
        ExperimentKind::GreenCompare => green_compare(cfg),
        ExperimentKind::Largedev => largedev(cfg),
        ExperimentKind::Zmoments => zmoments(cfg),
        ExperimentKind::Correlations => correlations(cfg),
    }
}

impl From<LocalLawError> for RunError {
    fn from(e: LocalLawError) -> Self {
        match e {
            LocalLawError::Config(m) => RunError::Config(m),
            LocalLawError::Index { .. } => RunError::Config(e.to_string()),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<StatsError> for RunError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Config(m) => RunError::Config(m),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

struct Resolved {
    profile: VarianceProfile,
    dist: EntryDistribution,
    beta: SymmetryClass,
}

fn resolve(spec: &EnsembleSpec, n: usize) -> Result<Resolved, RunError> {
    Ok(Resolved {
        profile: spec.profile.build(n).map_err(|e| RunError::Config(format!("profile at n={n}: {e}")))?,
        dist: spec.distribution.resolve()?,
        beta: spec.beta,
    })
}

/// Sorted spectra of `samples` matrices, sample k seeded with `job_seed(seed, k)`.
fn spectra(r: &Resolved, samples: usize, seed: u64) -> Result<Vec<(u64, Vec<f64>)>, RunError> {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let s = job_seed(seed, k as u64);
            let h = sample_matrix(&r.profile, &r.dist, r.beta, s).map_err(|e| RunError::Config(e.to_string()))?;
            let ev = eigvalsh(&h.entries).map_err(|e| RunError::Numerical(e.to_string()))?;
            Ok((s, ev))
        })
        .collect()
}

fn csv_header(schema: &str, columns: &str) -> String {
    format!("# rmt-locallaw v1 schema={schema}\n{columns}\n")
}

fn summary(cfg: &ExperimentConfig, results: serde_json::Value, clauses: &[Clause]) -> Vec<u8> {
    let v = json!({ "config": cfg, "results": results, "clauses": clauses });
    let mut s = serde_json::to_string_pretty(&v).expect("summary serializes");
    s.push('\n');
    s.into_bytes()
}

fn output(cfg: &ExperimentConfig, csv: String, results: serde_json::Value, clauses: Vec<Clause>) -> ExperimentOutput {
    let tag = cfg.experiment.tag();
    ExperimentOutput {
        files: vec![(format!("{tag}.csv"), csv.into_bytes()), (format!("{tag}.summary.json"), summary(cfg, results, &clauses))],
        clauses,
    }
}

fn locallaw_scan(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut csv = String::new();
    let mut results = Vec::new();
    let mut clauses = Vec::new();
    let mut medians = Vec::new();
    // Domain violations surface before any sampling.
    let resolved: Vec<(usize, Resolved)> =
        cfg.sizes.iter().map(|&n| resolve(&cfg.ensemble, n).map(|r| (n, r))).collect::<Result<_, _>>()?;
    for (n, r) in &resolved {
        local_law_scan(&r.profile, &r.dist, r.beta, 0, &cfg.z_points(*n), cfg.seed, &cfg.params.scan)?;
    }
    for (n, r) in &resolved {
        let res = local_law_scan(&r.profile, &r.dist, r.beta, cfg.samples, &cfg.z_points(*n), cfg.seed, &cfg.params.scan)?;
        let body = res.to_csv();
        if csv.is_empty() {
            csv.push_str(&body);
        } else {
            csv.extend(body.lines().skip(2).map(|l| format!("{l}\n")));
        }
        let q0 = |name: &str| res.quantiles(0, name).map_or(f64::NAN, |q| q.median);
        let m_med = q0("m_err_plain");
        let d_med = q0("lambda_d_plain");
        medians.push((*n, m_med));
        clauses.push(Clause::below(format!("n={n}: median N·eta·|m_N - m_sc|"), m_med, cfg.thresholds.multiplier));
        clauses.push(Clause::below(format!("n={n}: median sqrt(N·eta)·Lambda_d"), d_med, cfg.thresholds.multiplier));
        results.push(json!({ "n": n, "m_param": res.m_param, "grid": res.grid }));
    }
    if medians.len() >= 2 {
        let (lo, hi) = (medians.iter().min_by_key(|m| m.0).unwrap(), medians.iter().max_by_key(|m| m.0).unwrap());
        clauses.push(Clause::below(
            format!("median ratio n={} / n={}", hi.0, lo.0),
            hi.1 / lo.1,
            cfg.thresholds.flatness,
        ));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn rigidity(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut csv = csv_header("rigidity", "n,sample_seed,rigidity,assumption_iii");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let r = resolve(&cfg.ensemble, n)?;
        let mut worst = 0.0f64;
        let mut values = Vec::new();
        for (s, ev) in spectra(&r, cfg.samples, cfg.seed)? {
            let v = rigidity_stat(&ev).total;
            let _ = writeln!(csv, "{n},{s},{v},{}", assumption_iii_stat(&ev));
            worst = worst.max(v);
            values.push(v);
        }
        let bound = (n as f64).powf(-cfg.thresholds.rigidity_exponent);
        clauses.push(Clause::below(format!("n={n}: max over samples of sum (lambda_j - gamma_j)^2"), worst, bound));
        results.push(json!({ "n": n, "rigidity": values, "bound": bound }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn counting(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut csv = csv_header("counting", "n,sample_seed,counting_gap,bound");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let r = resolve(&cfg.ensemble, n)?;
        let a = r.profile.edge_exponent_a() as f64;
        let bound = cfg.thresholds.multiplier * (n as f64).powf(cfg.thresholds.epsilon) / n as f64;
        let mut pass = 0usize;
        let mut values = Vec::new();
        for (s, ev) in spectra(&r, cfg.samples, cfg.seed)? {
            let v = counting_gap(&ev, a);
            let _ = writeln!(csv, "{n},{s},{v},{bound}");
            if v < bound {
                pass += 1;
            }
            values.push(v);
        }
        let frac = pass as f64 / cfg.samples as f64;
        clauses.push(Clause::at_least(
            format!("n={n}: share of samples with sup |n(E) - n_sc(E)|·kappa^A < {bound:.5}"),
            frac,
            cfg.thresholds.min_pass_fraction,
        ));
        results.push(json!({ "n": n, "edge_exponent_a": a, "counting_gap": values, "bound": bound }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn edge(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut csv = csv_header("edge", "n,sample_seed,lambda_min,lambda_max,bound,lower_margin,upper_margin,norm_ok");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let r = resolve(&cfg.ensemble, n)?;
        let mut worst = f64::INFINITY;
        for (s, ev) in spectra(&r, cfg.samples, cfg.seed)? {
            let e = edge_check(&ev, cfg.thresholds.edge_epsilon);
            let _ = writeln!(
                csv,
                "{n},{s},{},{},{},{},{},{}",
                ev[0],
                ev[ev.len() - 1],
                e.bound,
                e.lower_margin,
                e.upper_margin,
                e.norm_ok
            );
            worst = worst.min(e.lower_margin.min(e.upper_margin));
        }
        clauses.push(Clause::at_least(format!("n={n}: smallest margin to 2 + n^(-1/6+eps)"), worst, 0.0));
        results.push(json!({ "n": n, "worst_margin": worst }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn dbm_gaps(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let times = &cfg.params.times;
    if times.iter().any(|t| !(*t >= 0.0)) || times.len() < 2 {
        return Err(RunError::Config("params.times: need at least two nonnegative flow times".into()));
    }
    let coeff = (0..=1000)
        .map(|k| {
            let (a, b) = flow_coefficients(0.01 * k as f64);
            (a * a + b * b - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let mut clauses = vec![Clause::at_most("OU coefficient identity |e^-t + (1 - e^-t) - 1|".into(), coeff, 1e-15)];
    let mut csv = csv_header("dbm-gaps", "n,t_a,t_b,gaps_a,gaps_b,ks");
    let mut results = Vec::new();
    let gauss = catalog_distribution("gaussian").expect("catalog entry");
    for &n in &cfg.sizes {
        let r = resolve(&cfg.ensemble, n)?;
        let per_sample: Vec<Result<Vec<Vec<f64>>, RunError>> = (0..cfg.samples)
            .into_par_iter()
            .map(|k| {
                let h0 = sample_matrix(&r.profile, &r.dist, r.beta, job_seed(cfg.seed, 2 * k as u64))
                    .map_err(|e| RunError::Config(e.to_string()))?;
                let v = sample_matrix(&r.profile, &gauss, r.beta, job_seed(cfg.seed, 2 * k as u64 + 1))
                    .map_err(|e| RunError::Config(e.to_string()))?;
                times
                    .iter()
                    .map(|&t| {
                        let ht = flow_interpolate(&h0, &v, t).map_err(|e| RunError::Config(e.to_string()))?.ht;
                        eigvalsh(&ht).map_err(|e| RunError::Numerical(e.to_string()))
                    })
                    .collect()
            })
            .collect();
        let per_sample = per_sample.into_iter().collect::<Result<Vec<_>, _>>()?;
        let cdfs = (0..times.len())
            .map(|ti| {
                let u: Vec<_> = per_sample.iter().map(|s| unfold(&s[ti], cfg.params.kappa_cut)).collect();
                gap_distribution(&u)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for a in 0..times.len() {
            for b in a + 1..times.len() {
                let ks = ks_distance(&cdfs[a], &cdfs[b]);
                let _ = writeln!(csv, "{n},{},{},{},{},{ks}", times[a], times[b], cdfs[a].len(), cdfs[b].len());
                clauses.push(Clause::below(format!("n={n}: KS gaps t={} vs t={}", times[a], times[b]), ks, cfg.thresholds.ks_flow));
            }
        }
        results.push(json!({ "n": n, "times": times, "gaps": cdfs.iter().map(|c| c.len()).collect::<Vec<_>>() }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

#[derive(Serialize)]
struct MomentRow {
    m3: f64,
    m4: f64,
    gamma: f64,
    achieved_m3: f64,
    achieved_m4: f64,
    delta_m4: f64,
    min_delta_m4: f64,
    mc_m3: f64,
    mc_m4: f64,
    z_m3: f64,
    z_m4: f64,
}

/// Sample third and fourth moments with their standard errors.
fn mc_moments(d: &EntryDistribution, draws: usize, seed: u64) -> (f64, f64, f64, f64) {
    let mut rng = rng_from(seed);
    let (mut s3, mut s4, mut s6, mut s8) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..draws {
        let x = d.sample(&mut rng);
        let x2 = x * x;
        let x3 = x2 * x;
        let x4 = x2 * x2;
        s3 += x3;
        s4 += x4;
        s6 += x3 * x3;
        s8 += x4 * x4;
    }
    let n = draws as f64;
    let (m3, m4) = (s3 / n, s4 / n);
    let se3 = ((s6 / n - m3 * m3) / n).sqrt();
    let se4 = ((s8 / n - m4 * m4) / n).sqrt();
    (m3, se3, m4, se4)
}

fn moments_match(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let p = &cfg.params;
    if p.grid == 0 || p.mc_draws < 2 {
        return Err(RunError::Config("params.grid and params.mc_draws must be positive".into()));
    }
    let lin = |a: f64, b: f64, k: usize| if p.grid == 1 { a } else { a + (b - a) * k as f64 / (p.grid - 1) as f64 };
    let mut targets = Vec::new();
    for i in 0..p.grid {
        let m3 = lin(-p.m3_range, p.m3_range, i);
        for j in 0..p.grid {
            targets.push((m3, lin(m3 * m3 + 1.0, p.m4_max, j)));
        }
    }
    let jobs: Vec<(usize, f64, (f64, f64))> = p
        .gammas
        .iter()
        .flat_map(|&g| targets.iter().map(move |&t| (g, t)))
        .enumerate()
        .map(|(i, (g, t))| (i, g, t))
        .collect();
    let rows: Vec<Result<MomentRow, RunError>> = jobs
        .par_iter()
        .map(|&(i, gamma, (m3, m4))| {
            let t = MomentTarget::with_cap(m3, m4, f64::INFINITY).map_err(|e| RunError::Config(e.to_string()))?;
            let law = match_four_moments(t, gamma, p.strategy).map_err(|e| RunError::Config(e.to_string()))?;
            let (mc3, se3, mc4, se4) = mc_moments(&law.distribution(), p.mc_draws, job_seed(cfg.seed, i as u64));
            Ok(MomentRow {
                m3,
                m4,
                gamma,
                achieved_m3: law.achieved_m3,
                achieved_m4: law.achieved_m4,
                delta_m4: law.delta_m4(),
                min_delta_m4: min_fourth_moment_error(t, gamma),
                mc_m3: mc3,
                mc_m4: mc4,
                z_m3: (mc3 - law.achieved_m3) / se3,
                z_m4: (mc4 - law.achieved_m4) / se4,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut csv = csv_header(
        "moments-match",
        "m3,m4,gamma,achieved_m3,achieved_m4,delta_m4,min_delta_m4,mc_m3,mc_m4,z_m3,z_m4",
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.m3, r.m4, r.gamma, r.achieved_m3, r.achieved_m4, r.delta_m4, r.min_delta_m4, r.mc_m3, r.mc_m4, r.z_m3, r.z_m4
        );
    }
    let m3_err = rows.iter().map(|r| (r.achieved_m3 - r.m3).abs()).fold(0.0, f64::max);
    let mut clauses = vec![Clause::below("max |achieved m3 - m3|".into(), m3_err, cfg.thresholds.m3_tolerance)];
    let mut per_gamma = Vec::new();
    for &g in &p.gammas {
        let sel: Vec<&MomentRow> = rows.iter().filter(|r| r.gamma == g).collect();
        let worst = sel.iter().map(|r| r.delta_m4.abs() / g).fold(0.0, f64::max);
        let failing = sel.iter().filter(|r| r.delta_m4.abs() > cfg.thresholds.moment_factor * g).count();
        let unreachable = sel.iter().filter(|r| r.min_delta_m4 > cfg.thresholds.moment_factor * g).count();
        clauses.push(Clause::at_most(format!("gamma={g}: max |delta m4| / gamma"), worst, cfg.thresholds.moment_factor));
        per_gamma.push(json!({ "gamma": g, "targets": sel.len(), "failing": failing, "unreachable_by_any_construction": unreachable }));
    }
    let zmax = rows.iter().map(|r| r.z_m3.abs().max(r.z_m4.abs())).fold(0.0, f64::max);
    clauses.push(Clause::below("max Monte Carlo |z-score| of m3, m4".into(), zmax, cfg.thresholds.mc_sigmas));
    Ok(output(cfg, csv, json!({ "per_gamma": per_gamma, "rows": rows }), clauses))
}

fn green_compare(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let reference = cfg
        .params
        .reference
        .as_ref()
        .ok_or_else(|| RunError::Config("params.reference: green-compare needs a second ensemble".into()))?;
    let mut csv = csv_header("green-compare", "n,E,eta,mean_a,mean_b,difference,stderr,reference");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let a = resolve(&cfg.ensemble, n)?;
        let b = resolve(reference, n)?;
        if a.profile.id() != b.profile.id() {
            return Err(RunError::Config("both ensembles must share a profile".into()));
        }
        let z: Vec<Complex64> = cfg.params.energies.iter().map(|&e| Complex64::new(e, 1.0 / n as f64)).collect();
        let opts = GreenOptions { epsilon: cfg.thresholds.epsilon, kappa_cut: cfg.params.kappa_cut, ..GreenOptions::default() };
        let r = green_comparison(
            &a.profile,
            &Ensemble { distribution: a.dist, beta: a.beta },
            &Ensemble { distribution: b.dist, beta: b.beta },
            &z,
            cfg.params.functional,
            cfg.samples,
            cfg.seed,
            &opts,
        )?;
        for p in &r.points {
            let _ = writeln!(
                csv,
                "{n},{},{},{},{},{},{},{}",
                p.z.re, p.z.im, p.mean_a, p.mean_b, p.difference, p.stderr, p.reference
            );
            let sig = if p.stderr > 0.0 { p.difference.abs() / p.stderr } else if p.difference == 0.0 { 0.0 } else { f64::INFINITY };
            clauses.push(Clause::below(format!("n={n}, E={}: |difference| / stderr", p.z.re), sig, cfg.thresholds.significance));
        }
        results.push(json!(r));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn largedev(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let d = cfg.ensemble.distribution.resolve()?;
    let mut csv = csv_header("largedev", "n,case,trials,threshold,exceedances,rate,ci_low,ci_high");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let r = large_deviation_mc(&d, n, cfg.samples, cfg.params.case, cfg.params.fixture, cfg.seed);
        let case = serde_json::to_value(cfg.params.case).expect("case serializes");
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{},{},{}",
            case.as_str().unwrap_or(""),
            r.trials,
            r.threshold,
            r.exceedances,
            r.rate,
            r.ci_low,
            r.ci_high
        );
        clauses.push(Clause::below(format!("n={n}: exceedance rate"), r.rate, cfg.thresholds.max_rate));
        results.push(json!({ "n": n, "result": r }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

fn zmoments(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let mut csv = csv_header("zmoments", "n,E,eta,p,moment,bootstrap_se,ratio,ratio_dropped_logs");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let r = resolve(&cfg.ensemble, n)?;
        for z in cfg.z_points(n) {
            let t = z_average_moments(&r.profile, &r.dist, r.beta, z, cfg.samples, cfg.params.p_max, cfg.seed)?;
            for row in &t.rows {
                let _ = writeln!(
                    csv,
                    "{n},{},{},{},{},{},{},{}",
                    z.e, z.eta, row.p, row.moment, row.bootstrap_se, row.ratio, row.ratio_dropped_logs
                );
            }
            clauses.push(Clause::below(
                format!("n={n}, z={}+{}i: E|N^-1 sum Z_i|^2 / ((log N)^(3+2a) X^2)^2", z.e, z.eta),
                t.rows[0].ratio,
                cfg.thresholds.zmoment_ratio,
            ));
            results.push(json!({ "n": n, "z": [z.e, z.eta], "x_diag": t.x_diag, "rows": t.rows }));
        }
    }
    Ok(output(cfg, csv, json!(results), clauses))
}

/// Mean of 1 − K(α)² over [a, b] by Simpson's rule.
fn pair_reference(a: f64, b: f64) -> f64 {
    let m = 64;
    let h = (b - a) / m as f64;
    let f = |x: f64| 1.0 - sine_kernel(x).powi(2);
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / (b - a)
}

fn correlations(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let reference = cfg.params.reference.clone().unwrap_or_else(EnsembleSpec::gue);
    let mut csv = csv_header("correlations", "n,statistic,alpha,value,stderr,reference");
    let mut clauses = Vec::new();
    let mut results = Vec::new();
    for &n in &cfg.sizes {
        let a = resolve(&cfg.ensemble, n)?;
        let b = resolve(&reference, n)?;
        let sa: Vec<Vec<f64>> = spectra(&a, cfg.samples, cfg.seed)?.into_iter().map(|x| x.1).collect();
        let sb: Vec<Vec<f64>> = spectra(&b, cfg.samples, job_seed(cfg.seed, u64::MAX))?.into_iter().map(|x| x.1).collect();
        let kc = cfg.params.kappa_cut;
        let ga = gap_distribution(&sa.iter().map(|s| unfold(s, kc)).collect::<Vec<_>>())?;
        let gb = gap_distribution(&sb.iter().map(|s| unfold(s, kc)).collect::<Vec<_>>())?;
        let ks = ks_distance(&ga, &gb);
        let _ = writeln!(csv, "{n},ks_gaps,,{ks},,");
        clauses.push(Clause::below(format!("n={n}: KS of bulk gap CDFs vs reference"), ks, cfg.thresholds.ks_universality));
        let opts = KPointOptions {
            k: cfg.params.k,
            energy: cfg.energy,
            window: cfg.params.window.unwrap_or((n as f64).powf(-0.1)),
            bins: cfg.params.bins,
            max_offset: cfg.params.max_offset,
            test_function: None,
        };
        let est = kpoint_estimate(&sa, &opts)?;
        let mut l2 = None;
        if opts.k == 2 {
            let w = opts.max_offset / opts.bins as f64;
            let mut acc = 0.0;
            for (i, (v, e)) in est.values.iter().zip(&est.stderr).enumerate() {
                let r = pair_reference(i as f64 * w, (i + 1) as f64 * w);
                acc += (v - r).powi(2) * w;
                let _ = writeln!(csv, "{n},pair,{},{v},{e},{r}", est.bins[i][0]);
            }
            let d = acc.sqrt();
            clauses.push(Clause::below(format!("n={n}: L2 distance of pair correlation from 1 - K^2"), d, cfg.thresholds.l2_correlation));
            l2 = Some(d);
        } else {
            for ((c, v), e) in est.bins.iter().zip(&est.values).zip(&est.stderr) {
                let alpha = c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                let _ = writeln!(csv, "{n},k{},{alpha},{v},{e},", opts.k);
            }
        }
        results.push(json!({ "n": n, "ks_gaps": ks, "gaps": [ga.len(), gb.len()], "l2_pair": l2, "estimate": est }));
    }
    Ok(output(cfg, csv, json!(results), clauses))
}
