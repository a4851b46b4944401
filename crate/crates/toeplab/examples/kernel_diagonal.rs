//! Diagonal of the Toeplitz kernel η_k(T_P)(x, x) against its leading term,
//! and the Reeb component of β_k.

use std::sync::Arc;
use toeplab::cutoff_moments::{moments, CutoffSpec};
use toeplab::kernel_engine::{KernelField, Weighting};
use toeplab::model_geometry::{ContactData, SpherePoint};
use toeplab::spectral_basis::DegreeKernelTable;

fn main() -> toeplab::Result<()> {
    let cutoff = CutoffSpec::default();
    let mv = moments(&cutoff, 1)?.mv;
    let table = Arc::new(DegreeKernelTable::build(1, 256)?);
    let x = SpherePoint::hopf(0.3, 0.7, -1.1);
    let reeb = ContactData::reeb_field(&x);
    println!(
        "{:>6} {:>14} {:>14} {:>10} {:>12}",
        "k", "diag", "leading", "rel err", "2πβ(T)/k"
    );
    for k in [32.0, 64.0, 128.0, 256.0] {
        let field = KernelField::new(table.clone(), cutoff, k, Weighting::Eta)?;
        let lead = field.kernel_diag_asymptotic_ref()?;
        let beta = field.beta_k(&x)?.apply(reeb.real()).re;
        println!(
            "{k:>6} {:>14.6} {:>14.6} {:>10.3e} {:>12.6}",
            field.diag(),
            lead,
            (field.diag() / lead - 1.0).abs(),
            2.0 * std::f64::consts::PI * beta / k
        );
    }
    println!("limit of 2πβ(T)/k: mv = {mv:.6}");
    Ok(())
}
