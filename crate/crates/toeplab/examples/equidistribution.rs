//! Equidistribution of k⁻¹[Z_f] on the sphere and the variance scaling,
//! sharing one set of draws across the k grid.

use toeplab::config::LabConfig;
use toeplab::experiments::{equi_cr, variance_cr, CrSampleSet, CrSampling};
use toeplab::runner::print_report;

fn main() -> toeplab::Result<()> {
    let mut cfg = LabConfig::default();
    cfg.equi_cr.k_grid = vec![16.0, 32.0, 64.0];
    cfg.equi_cr.trials = 150;
    cfg.variance_cr.k_grid = cfg.equi_cr.k_grid.clone();
    cfg.variance_cr.trials = cfg.equi_cr.trials;
    let t = std::time::Instant::now();
    let set = CrSampleSet::generate(&cfg, &CrSampling::from(&cfg.equi_cr))?;
    print_report(&equi_cr(&cfg, &set)?, t.elapsed().as_secs_f64(), false);
    print_report(&variance_cr(&cfg, &set)?, t.elapsed().as_secs_f64(), false);
    Ok(())
}
