//! (Z_u, ψ) on the ball from boundary data and the interior log term.

use num_complex::Complex64 as C64;
use toeplab::experiments::psi_area;
use toeplab::zero_currents::{
    divisor_pairing_boundary, zero_set_direct, CatalogFunction, CubatureOptions,
    RegularizationOptions, ZeroDomain,
};

fn main() -> toeplab::Result<()> {
    let opts = RegularizationOptions::default();
    let ball = CubatureOptions::ball();
    let psi = psi_area();
    for f in [
        CatalogFunction::Z1MinusC(C64::new(0.5, 0.0)),
        CatalogFunction::TwoPlusZ1,
    ] {
        let p = divisor_pairing_boundary(&f.polynomial(), &psi, &opts, &ball)?;
        let direct = zero_set_direct(f, ZeroDomain::Ball, &psi, 64)?;
        println!("u = {}", f.name());
        println!(
            "  boundary ∂u/u term  {:>12.8}",
            p.term_boundary_dlog.value.re
        );
        println!(
            "  boundary log term   {:>12.8}",
            p.term_boundary_log.value.re
        );
        println!(
            "  interior log term   {:>12.8}",
            p.term_interior_log.value.re
        );
        println!(
            "  total {:>12.8} ± {:.1e}   direct {:>12.8}",
            p.total.value.re, p.total.err_est, direct.re
        );
    }
    println!("3π/4 = {:.8}", 0.75 * std::f64::consts::PI);
    Ok(())
}
