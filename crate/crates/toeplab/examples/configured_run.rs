//! A reproducible run driven by a TOML config: manifest, CSV/JSON reports and
//! plot data land in one output directory.

use toeplab::config::LabConfig;
use toeplab::runner::{run, Subcommand};

const CONFIG: &str = r#"
seed = 7

[cutoff]
delta1 = 0.2
delta2 = 0.8

[kernel]
k_grid = [32, 64, 128, 256]
"#;

fn main() -> toeplab::Result<()> {
    let mut cfg = LabConfig::from_toml(CONFIG)?;
    let dir = std::env::temp_dir().join("toeplab-example-run");
    cfg.out = Some(dir.display().to_string());
    let outcome = run(Subcommand::KernelDiag, &cfg, None)?;
    println!(
        "passed: {}; files in {}:",
        outcome.passed,
        outcome.out_dir.display()
    );
    let mut names: Vec<_> = std::fs::read_dir(&outcome.out_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for n in names {
        println!("  {n}");
    }
    Ok(())
}
