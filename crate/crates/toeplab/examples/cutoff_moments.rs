//! Moments of η = χ² for the smooth bump and the indicator cutoff.

use toeplab::cutoff_moments::{moments, CutoffSpec};

fn main() -> toeplab::Result<()> {
    let specs = [
        ("bump [0.25, 0.75]", CutoffSpec::default()),
        ("indicator [0, 1]", CutoffSpec::indicator(0.0, 1.0)?),
        ("indicator [0.5, 1]", CutoffSpec::indicator(0.5, 1.0)?),
    ];
    println!(
        "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "cutoff", "tau0", "tau1", "tau2", "mv", "var"
    );
    for (name, spec) in specs {
        let m = moments(&spec, 1)?;
        println!(
            "{name:<20} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            m.tau0, m.tau1, m.tau2, m.mv, m.var
        );
    }
    Ok(())
}
