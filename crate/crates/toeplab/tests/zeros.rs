//! Regularized zero-current pairings against direct integration over the
//! zero sets of catalog functions.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use toeplab::experiments::{psi_area, psi_circle, psi_null, psi_weighted_area};
use toeplab::model_geometry::forms::AmbientPolyForm;
use toeplab::model_geometry::quadrature::HopfRule;
use toeplab::random_ensemble::{regularity_filter, HopfGridEvaluator, Polynomial};
use toeplab::spectral_basis::MultiIndex;
use toeplab::zero_currents::{
    boundary_regularity, divisor_pairing_boundary, divisor_pairing_closed, schedule_monotone,
    zero_set_direct, CatalogFunction, CrGridPairing, CubatureOptions, RegularizationOptions,
    ZeroDomain,
};

fn poly(coeffs: &[(u32, u32, f64, f64)]) -> Polynomial {
    let terms = coeffs
        .iter()
        .map(|&(a, b, re, im)| (MultiIndex(vec![a, b]), C64::new(re, im)))
        .collect();
    Polynomial::new(2, terms).unwrap()
}

fn random_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0u32..4, 0u32..4, -1.0f64..1.0, -1.0f64..1.0), 2..6)
        .prop_map(|c| poly(&c))
}

fn test_forms() -> Vec<AmbientPolyForm> {
    let x = |i| AmbientPolyForm::coord(4, i);
    let dxw = |a, b| &AmbientPolyForm::dx(4, a) * &AmbientPolyForm::dx(4, b);
    vec![dxw(2, 3), &(&x(0) * &x(0)) * &dxw(0, 1), &x(1) * &dxw(1, 3)]
}

#[test]
fn product_zero_set_matches_direct_integral() {
    let opts = RegularizationOptions::default();
    let f = CatalogFunction::Z1Z2;
    let est = divisor_pairing_closed(&f.polynomial(), &psi_circle(), &opts).unwrap();
    let direct = zero_set_direct(f, ZeroDomain::Sphere, &psi_circle(), 64).unwrap();
    assert!((direct.re - 2.0 * PI).abs() < 1e-10);
    let tol = (0.01 * direct.norm()).max(3.0 * est.err_est);
    assert!(
        (est.value - direct).norm() <= tol,
        "{} vs {}",
        est.value,
        direct
    );
}

#[test]
fn pairing_with_exact_forms_vanishes() {
    let opts = RegularizationOptions::default();
    let g = &(&AmbientPolyForm::coord(4, 0) * &AmbientPolyForm::coord(4, 2))
        + &AmbientPolyForm::coord(4, 3);
    let f = CatalogFunction::Z1MinusC(C64::new(0.5, 0.0));
    let est = divisor_pairing_closed(&f.polynomial(), &g.d(), &opts).unwrap();
    assert!(est.value.norm() <= est.err_est.max(1e-12));
    let direct = zero_set_direct(f, ZeroDomain::Sphere, &g.d(), 64).unwrap();
    assert!(direct.norm() < 1e-10);
}

#[test]
fn null_form_pairs_to_zero_on_coordinate_circles() {
    for f in [CatalogFunction::Z1, CatalogFunction::Z2] {
        assert!(
            zero_set_direct(f, ZeroDomain::Sphere, &psi_null(), 64)
                .unwrap()
                .norm()
                < 1e-10
        );
    }
}

#[test]
fn interior_log_term_is_monotone_in_delta() {
    let opts = RegularizationOptions::default();
    let u = CatalogFunction::Z1MinusC(C64::new(0.5, 0.0)).polynomial();
    let bp = divisor_pairing_boundary(&u, &psi_weighted_area(), &opts, &CubatureOptions::ball())
        .unwrap();
    assert_eq!(bp.term_interior_log.schedule.len(), opts.deltas.len());
    assert!(schedule_monotone(&bp.term_interior_log.schedule));
}

#[test]
fn monotonicity_trap_flags_a_reversal() {
    let s = |v: &[f64]| {
        v.iter()
            .enumerate()
            .map(|(i, &x)| (10f64.powi(-(i as i32)), C64::new(x, 0.0)))
            .collect::<Vec<_>>()
    };
    assert!(schedule_monotone(&s(&[3.0, 2.0, 1.5, 1.4])));
    assert!(schedule_monotone(&s(&[1.0, 2.0, 2.0, 5.0])));
    assert!(!schedule_monotone(&s(&[3.0, 2.0, 2.5, 1.4])));
}

#[test]
fn boundary_pairing_is_linear_in_psi() {
    let opts = RegularizationOptions::default();
    let ball = CubatureOptions::ball();
    let u = CatalogFunction::Z1MinusC(C64::new(0.5, 0.0)).polynomial();
    let a = divisor_pairing_boundary(&u, &psi_area(), &opts, &ball)
        .unwrap()
        .total;
    let b = divisor_pairing_boundary(&u, &psi_weighted_area(), &opts, &ball)
        .unwrap()
        .total;
    let mix = &(&psi_area() * 2.0) + &(&psi_weighted_area() * -0.5);
    let c = divisor_pairing_boundary(&u, &mix, &opts, &ball)
        .unwrap()
        .total;
    let expect = a.value * 2.0 - b.value * 0.5;
    assert!(
        (c.value - expect).norm() <= 3.0 * (c.err_est + 2.0 * a.err_est + 0.5 * b.err_est) + 1e-9
    );
}

#[test]
fn singular_functions_are_refused() {
    let sq = poly(&[(2, 0, 1.0, 0.0)]);
    assert!(boundary_regularity(&sq, 1e-6).is_err());
    assert!(boundary_regularity(&poly(&[(1, 0, 1.0, 0.0)]), 1e-6).is_ok());
    let rule = HopfRule::new(24).unwrap();
    let ev = HopfGridEvaluator::new(rule.clone());
    let rep = regularity_filter(&sq, &ev.evaluate(&sq, 1.0).unwrap(), &rule, 1e-6);
    assert!(!rep.accepted, "{rep:?}");
    let lin = poly(&[(1, 0, 1.0, 0.0), (0, 0, -0.5, 0.0)]);
    let rep = regularity_filter(&lin, &ev.evaluate(&lin, 1.0).unwrap(), &rule, 1e-6);
    assert!(rep.accepted, "{rep:?}");
    assert!(rep.zeros_located > 0);
    assert!(CatalogFunction::by_name("sin(z1)").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_pairing_is_linear_in_psi(f in random_poly(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let fs = test_forms();
        let mix = &(&fs[0] * a) + &(&fs[2] * b);
        let g = CrGridPairing::new(HopfRule::new(24).unwrap(), &[fs[0].clone(), fs[2].clone(), mix]).unwrap();
        let v = g.pair(&f).unwrap();
        let scale = v[0].norm() + v[1].norm() + 1.0;
        prop_assert!((v[2] - (v[0] * a + v[1] * b)).norm() <= 1e-9 * scale);
    }

    #[test]
    fn grid_pairing_ignores_scaling_of_f(f in random_poly(), r in 0.1f64..10.0, t in 0.0..2.0 * PI) {
        let g = CrGridPairing::new(HopfRule::new(24).unwrap(), &test_forms()).unwrap();
        let v = g.pair(&f).unwrap();
        let w = g.pair(&f.scaled(C64::from_polar(r, t))).unwrap();
        for (p, q) in v.iter().zip(&w) {
            prop_assert!((p - q).norm() <= 1e-9 * (1.0 + p.norm()));
        }
    }

    #[test]
    fn catalog_names_round_trip(c in -0.9f64..0.9) {
        let f = CatalogFunction::Z1MinusC(C64::new(c, 0.0));
        prop_assert_eq!(CatalogFunction::by_name(&f.name()).unwrap(), f);
    }
}
