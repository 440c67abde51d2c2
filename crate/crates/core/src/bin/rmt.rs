use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rmt_core::runner::{self, ExperimentKind, RunError};

#[derive(Parser)]
#[command(name = "rmt", version, about = "Local semicircle law experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    #[command(name = "locallaw-scan")]
    LocallawScan(RunArgs),
    Rigidity(RunArgs),
    Counting(RunArgs),
    Edge(RunArgs),
    #[command(name = "dbm-gaps")]
    DbmGaps(RunArgs),
    #[command(name = "moments-match")]
    MomentsMatch(RunArgs),
    #[command(name = "green-compare")]
    GreenCompare(RunArgs),
    Largedev(RunArgs),
    Zmoments(RunArgs),
    Correlations(RunArgs),
    /// Runs whatever experiment the configuration names.
    Run(RunArgs),
    /// Aggregates manifests into a summary table.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
}

fn run_experiment(expected: Option<ExperimentKind>, args: &RunArgs) -> Result<i32, RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = runner::parse_config(&text)?;
    if let Some(k) = expected {
        if k != cfg.experiment {
            return Err(RunError::Config(format!(
                "subcommand {} does not match experiment \"{}\" in {}",
                k.tag(),
                cfg.experiment.tag(),
                args.config.display()
            )));
        }
    }
    let manifest = runner::run(&cfg, &args.out)?;
    for c in &manifest.clauses {
        let cmp = serde_json::to_value(c.comparison).expect("comparison serializes");
        println!(
            "{} {}: {} {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            cmp.as_str().unwrap_or(""),
            c.threshold
        );
    }
    println!(
        "{}: {} ({:.1} s, {} workers) -> {}",
        cfg.experiment.tag(),
        if manifest.passed { "PASS" } else { "FAIL" },
        manifest.wall_clock_seconds,
        manifest.workers,
        args.out.join(format!("{}.manifest.json", cfg.experiment.tag())).display()
    );
    Ok(manifest.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::LocallawScan(a) => run_experiment(Some(ExperimentKind::LocallawScan), a),
        Command::Rigidity(a) => run_experiment(Some(ExperimentKind::Rigidity), a),
        Command::Counting(a) => run_experiment(Some(ExperimentKind::Counting), a),
        Command::Edge(a) => run_experiment(Some(ExperimentKind::Edge), a),
        Command::DbmGaps(a) => run_experiment(Some(ExperimentKind::DbmGaps), a),
        Command::MomentsMatch(a) => run_experiment(Some(ExperimentKind::MomentsMatch), a),
        Command::GreenCompare(a) => run_experiment(Some(ExperimentKind::GreenCompare), a),
        Command::Largedev(a) => run_experiment(Some(ExperimentKind::Largedev), a),
        Command::Zmoments(a) => run_experiment(Some(ExperimentKind::Zmoments), a),
        Command::Correlations(a) => run_experiment(Some(ExperimentKind::Correlations), a),
        Command::Run(a) => run_experiment(None, a),
        Command::Report { manifests } => manifests
            .iter()
            .map(|p| runner::load_manifest(p))
            .collect::<Result<Vec<_>, _>>()
            .map(|ms| {
                let r = runner::report(&ms);
                print!("{}", r.to_table());
                if r.passed {
                    runner::EXIT_PASS
                } else {
                    runner::EXIT_ACCEPTANCE
                }
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
