//! Random zeros inside the ball: the expectation (i/2π)∂∂̄log(1+B_k) and the
//! k⁻¹ limit concentrated on the boundary sphere.

use toeplab::config::LabConfig;
use toeplab::experiments::{equi_domain, expectation_domain};
use toeplab::runner::print_report;

fn main() -> toeplab::Result<()> {
    let mut cfg = LabConfig::default();
    cfg.expectation_domain.k = 16.0;
    cfg.expectation_domain.trials = 150;
    let t = std::time::Instant::now();
    print_report(&equi_domain(&cfg)?, t.elapsed().as_secs_f64(), false);
    let t = std::time::Instant::now();
    print_report(&expectation_domain(&cfg)?, t.elapsed().as_secs_f64(), false);
    Ok(())
}
