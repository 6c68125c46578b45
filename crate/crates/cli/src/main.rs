//! Command-line entry point: run shipped presets or custom experiment
//! configs, validate configs, list presets, and print analysis tables from
//! persisted results.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellgame_core::analysis::{
    format_cdf_table, format_metric_table, format_ne_gap_table, format_qoe_table,
    ExperimentSummary,
};
use cellgame_core::harness::{self, ExperimentConfig};

/// Environment variable providing the default output directory root.
const OUT_ENV: &str = "CELLGAME_OUT";

#[derive(Parser)]
#[command(name = "cellgame", version, about = "Seeded small-cell game experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a config file and persist results.
    Run(RunArgs),
    /// Validate a config file without running it.
    Validate { config: PathBuf },
    /// List the shipped experiment presets.
    List,
    /// Print an analysis table from a results directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (see `cellgame list`).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Path to an experiment config JSON document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<u32>,
    /// Output directory (default: $CELLGAME_OUT/<name> or ./results/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replication fan-out (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ReportMetric {
    /// Optimum / best-NE / worst-NE / learned welfare table.
    NeGap,
    /// Satisfied-user ratio per arm.
    SatisfiedRatio,
    /// Mean user counts per QoE level.
    QoeHistogram,
    /// Convergence-iteration CDF per arm.
    ConvergenceCdf,
}

#[derive(Args)]
struct ReportArgs {
    /// Results directory written by `run`.
    dir: PathBuf,
    #[arg(long, value_enum)]
    metric: ReportMetric,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> cellgame_core::Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = ExperimentConfig::from_json(&text)?;
            cfg.validate()?;
            eprintln!("{} is valid ({} arms)", config.display(), cfg.arms.len());
            Ok(())
        }
        Command::List => {
            for (name, description) in harness::PRESETS {
                println!("{name:<6} {description}");
            }
            Ok(())
        }
        Command::Report(args) => report(args),
    }
}

fn run(args: RunArgs) -> cellgame_core::Result<()> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(name), None) => harness::preset(name)?,
        (None, Some(path)) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        _ => {
            return Err(cellgame_core::Error::config(
                "run: exactly one of --preset and --config is required",
            ))
        }
    };
    if let Some(seed) = args.seed {
        cfg.seeds.base = seed;
    }
    if let Some(reps) = args.replications {
        cfg.seeds.replications = reps;
    }
    let out_dir = args.out.unwrap_or_else(|| {
        let root = std::env::var(OUT_ENV).map(PathBuf::from).unwrap_or_else(|_| "results".into());
        root.join(&cfg.name)
    });
    let output = harness::run_experiment_to_dir(&cfg, &out_dir, args.jobs)?;
    eprintln!(
        "{}: {} arms x {} replications -> {}",
        cfg.name,
        cfg.arms.len(),
        cfg.seeds.replications,
        out_dir.display()
    );
    let failed: usize = output
        .runs
        .values()
        .map(|rs| rs.iter().filter(|r| r.error.is_some()).count())
        .sum();
    if failed > 0 {
        eprintln!("warning: {failed} run(s) failed; see runs/*.jsonl");
    }
    Ok(())
}

fn report(args: ReportArgs) -> cellgame_core::Result<()> {
    let text = std::fs::read_to_string(args.dir.join("summary.json"))?;
    let summary = ExperimentSummary::from_json(&text)?;
    let table = match args.metric {
        ReportMetric::NeGap => format_ne_gap_table(&summary, "welfare_expected_capacity_bps"),
        ReportMetric::SatisfiedRatio => format_metric_table(&summary, "satisfied_ratio"),
        ReportMetric::QoeHistogram => format_qoe_table(&summary),
        ReportMetric::ConvergenceCdf => format_cdf_table(&summary),
    };
    print!("{table}");
    Ok(())
}
