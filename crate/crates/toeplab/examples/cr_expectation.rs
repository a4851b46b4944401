//! Monte Carlo check of E[𝒞_f(ψ)] = ∫β_k∧ψ for random CR functions, written
//! out as CSV/JSON reports.

use toeplab::config::LabConfig;
use toeplab::experiments::expectation_cr;
use toeplab::runner::print_report;

fn main() -> toeplab::Result<()> {
    let mut cfg = LabConfig::default();
    cfg.expectation_cr.k = 24.0;
    cfg.expectation_cr.trials = 200;
    let t = std::time::Instant::now();
    let rep = expectation_cr(&cfg)?;
    print_report(&rep, t.elapsed().as_secs_f64(), false);
    let dir = std::env::temp_dir().join("toeplab-example-cr");
    std::fs::create_dir_all(&dir)?;
    rep.write_files(&dir)?;
    println!("reports written to {}", dir.display());
    Ok(())
}
