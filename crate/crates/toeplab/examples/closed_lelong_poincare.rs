//! (Z_f, ψ) on the sphere through the regularized 𝒞_f pairing, compared with
//! direct integration over the zero set.

use toeplab::experiments::{psi_circle, psi_null};
use toeplab::zero_currents::{
    divisor_pairing_closed, zero_set_direct, CatalogFunction, RegularizationOptions, ZeroDomain,
};

fn main() -> toeplab::Result<()> {
    let opts = RegularizationOptions::default();
    for name in ["z1", "z1-0.5", "z1*z2"] {
        let f = CatalogFunction::by_name(name)?;
        for (id, psi) in [("circle", psi_circle()), ("null", psi_null())] {
            let est = divisor_pairing_closed(&f.polynomial(), &psi, &opts)?;
            let direct = zero_set_direct(f, ZeroDomain::Sphere, &psi, 64)?;
            println!(
                "f = {name:<7} ψ = {id:<6}: pairing {:>11.7} ± {:.1e}, direct {:>11.7}",
                est.value.re, est.err_est, direct.re
            );
        }
    }
    Ok(())
}
