use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use toeplab::config::{LabConfig, Overrides};
use toeplab::runner::{run, Subcommand};

/// Runs one experiment (or `all`) and writes manifest, CSV, JSON and plot data.
#[derive(Parser, Debug)]
#[command(name = "toeplab", version)]
struct Cli {
    /// kernel-diag | embed-check | lp-closed | lp-boundary | expectation-cr |
    /// equi-cr | variance-cr | equi-domain | expectation-domain | all
    command: String,
    /// TOML config file (every key optional).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated k values replacing every k grid.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<f64>>,
    /// Monte Carlo trials for every statistical experiment.
    #[arg(long)]
    trials: Option<usize>,
    /// Hopf grid level of the Monte Carlo estimators.
    #[arg(long)]
    level: Option<usize>,
    /// Output directory (default: $TOEPLAB_OUT, then ./toeplab-out).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd: Subcommand = match cli.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut cfg = match &cli.config {
        Some(p) => match LabConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => LabConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        k_grid: cli.k_grid,
        trials: cli.trials,
        level: cli.level,
        out: cli.out,
        jobs: cli.jobs,
        strict: cli.strict,
    };
    if let Err(e) = cfg.apply(&overrides) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cmd, &cfg, cli.config.as_deref()) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("FAIL: see {}", o.out_dir.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
