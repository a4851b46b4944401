//! Reproducible execution: subcommand dispatch, the run manifest, and
//! report emission into one output directory.

use crate::config::LabConfig;
use crate::error::{LabError, Result};
use crate::experiments::{self, version_string, CrSampleSet, CrSampling, ExperimentReport};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TOEPLAB_OUT";

/// Output directory used when neither the config, the flag nor the
/// environment names one.
pub const DEFAULT_OUT: &str = "toeplab-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    KernelDiag,
    EmbedCheck,
    LpClosed,
    LpBoundary,
    ExpectationCr,
    EquiCr,
    VarianceCr,
    EquiDomain,
    ExpectationDomain,
    All,
}

impl Subcommand {
    pub const ALL: [Subcommand; 10] = [
        Self::KernelDiag,
        Self::EmbedCheck,
        Self::LpClosed,
        Self::LpBoundary,
        Self::ExpectationCr,
        Self::EquiCr,
        Self::VarianceCr,
        Self::EquiDomain,
        Self::ExpectationDomain,
        Self::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KernelDiag => "kernel-diag",
            Self::EmbedCheck => "embed-check",
            Self::LpClosed => "lp-closed",
            Self::LpBoundary => "lp-boundary",
            Self::ExpectationCr => "expectation-cr",
            Self::EquiCr => "equi-cr",
            Self::VarianceCr => "variance-cr",
            Self::EquiDomain => "equi-domain",
            Self::ExpectationDomain => "expectation-domain",
            Self::All => "all",
        }
    }
}

impl FromStr for Subcommand {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::UnknownSubcommand(s.to_string()))
    }
}

/// Written into the output directory before any computation starts.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub out_dir: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
    pub config: LabConfig,
}

/// Reports of a finished run with their wall-clock times.
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<(ExperimentReport, f64)>,
    pub out_dir: PathBuf,
    pub passed: bool,
}

/// Resolves the output directory: config/flag value, then `$TOEPLAB_OUT`,
/// then `toeplab-out`.
pub fn resolve_out(cfg: &LabConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()))
        .unwrap_or_else(|| DEFAULT_OUT.to_string())
        .into()
}

/// Runs the experiments behind `cmd` in memory; `on_report` sees each report
/// as soon as it exists. `all` shares one CR sample set between the
/// equidistribution and variance runs when their sampling agrees.
pub fn run_experiments<F>(
    cmd: Subcommand,
    cfg: &LabConfig,
    mut on_report: F,
) -> Result<Vec<(ExperimentReport, f64)>>
where
    F: FnMut(&ExperimentReport, f64) -> Result<()>,
{
    let mut out = Vec::new();
    let mut push = |r: ExperimentReport, t: Instant| -> Result<()> {
        let secs = t.elapsed().as_secs_f64();
        on_report(&r, secs)?;
        out.push((r, secs));
        Ok(())
    };
    let single = |c: Subcommand| -> Option<fn(&LabConfig) -> Result<ExperimentReport>> {
        match c {
            Subcommand::KernelDiag => Some(experiments::kernel_diag),
            Subcommand::EmbedCheck => Some(experiments::embed_check),
            Subcommand::LpClosed => Some(experiments::lp_closed),
            Subcommand::LpBoundary => Some(experiments::lp_boundary),
            Subcommand::ExpectationCr => Some(experiments::expectation_cr),
            Subcommand::EquiDomain => Some(experiments::equi_domain),
            Subcommand::ExpectationDomain => Some(experiments::expectation_domain),
            _ => None,
        }
    };
    let list: Vec<Subcommand> = match cmd {
        Subcommand::All => Subcommand::ALL[..9].to_vec(),
        c => vec![c],
    };
    let mut shared: Option<CrSampleSet> = None;
    for c in list {
        let t = Instant::now();
        if let Some(f) = single(c) {
            push(f(cfg)?, t)?;
            continue;
        }
        let sampling = match c {
            Subcommand::EquiCr => CrSampling::from(&cfg.equi_cr),
            _ => CrSampling::from(&cfg.variance_cr),
        };
        if shared
            .as_ref()
            .map(|s| s.sampling != sampling)
            .unwrap_or(true)
        {
            shared = Some(CrSampleSet::generate(cfg, &sampling)?);
        }
        let set = shared.as_ref().expect("sample set");
        let r = match c {
            Subcommand::EquiCr => experiments::equi_cr(cfg, set)?,
            _ => experiments::variance_cr(cfg, set)?,
        };
        push(r, t)?;
    }
    if cmd == Subcommand::All {
        let t = Instant::now();
        push(experiments::exact_values(cfg)?, t)?;
    }
    Ok(out)
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let f = std::fs::File::create(dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(f, m)?;
    Ok(())
}

/// Full run: manifest first, then every report as CSV + JSON + plot data.
pub fn run(cmd: Subcommand, cfg: &LabConfig, config_path: Option<&Path>) -> Result<RunOutcome> {
    let out_dir = resolve_out(cfg);
    std::fs::create_dir_all(&out_dir)?;
    let manifest = RunManifest {
        subcommand: cmd.name().into(),
        config_path: config_path.map(|p| p.display().to_string()),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        out_dir: out_dir.display().to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        version: version_string(),
        config: cfg.clone(),
    };
    write_manifest(&out_dir, &manifest)?;
    let plot_dir = out_dir.join("plotdata");
    let reports = run_experiments(cmd, cfg, |r, secs| {
        r.write_files(&out_dir)?;
        if r.emit_plotdata(&plot_dir)?.is_empty() {
            eprintln!("warning: {} produced no rows; no plot data written", r.id);
        }
        print_report(r, secs, cfg.strict);
        Ok(())
    })?;
    let passed = reports.iter().all(|(r, _)| r.passed(cfg.strict));
    Ok(RunOutcome {
        reports,
        out_dir,
        passed,
    })
}

/// One line per verdict plus warnings.
pub fn print_report(r: &ExperimentReport, secs: f64, strict: bool) {
    let status = if r.passed(strict) { "PASS" } else { "FAIL" };
    println!("== {} [{status}] ({secs:.1} s)", r.id);
    for v in &r.verdicts {
        println!(
            "  {} {}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    for w in &r.warnings {
        println!("  warning: {w}");
    }
}
