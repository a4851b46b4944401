//! Contact structure, forms and quadrature on S³.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;
use toeplab::model_geometry::forms::AmbientPolyForm;
use toeplab::model_geometry::quadrature::{HopfRule, Measure};
use toeplab::model_geometry::{to_real, ContactData, SpherePoint, TangentVector};

fn point() -> impl Strategy<Value = SpherePoint> {
    (0.01f64..0.99, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(u, a, b)| SpherePoint::hopf(u, a, b))
}

fn ambient() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4)
}

/// Projects v onto ker ξ ∩ T_x S³.
fn horizontal(x: &SpherePoint, v: &[f64]) -> TangentVector {
    let t = TangentVector::project(x.clone(), v);
    let reeb = ContactData::reeb_field(x);
    let a: f64 = t.real().iter().zip(reeb.real()).map(|(p, q)| p * q).sum();
    t.add(&reeb.scaled(-a))
}

fn small_form() -> impl Strategy<Value = AmbientPolyForm> {
    let term = (0usize..4, 0usize..4, 0usize..4, -2.0f64..2.0).prop_map(|(c, i, j, s)| {
        &(&AmbientPolyForm::coord(4, c)
            * &(&AmbientPolyForm::dx(4, i) * &AmbientPolyForm::dx(4, j)))
            * s
    });
    prop::collection::vec(term, 1..4)
        .prop_map(|ts| ts.iter().fold(AmbientPolyForm::zero(4), |a, t| &a + t))
}

proptest! {
    #[test]
    fn points_are_normalized(z in prop::collection::vec(-3.0f64..3.0, 4)) {
        prop_assume!(z.iter().map(|a| a * a).sum::<f64>() > 1e-6);
        let c = vec![C64::new(z[0], z[1]), C64::new(z[2], z[3])];
        let n = c.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let x = SpherePoint::new(c.iter().map(|a| a / n).collect()).unwrap();
        prop_assert!((x.z().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn projected_vectors_are_tangent(x in point(), v in ambient()) {
        let t = TangentVector::project(x.clone(), &v);
        let dot: f64 = t.real().iter().zip(x.real()).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() <= 1e-10);
        prop_assert!(TangentVector::new(x, t.real().to_vec()).is_ok());
    }

    #[test]
    fn reeb_field_normalizes_contact_form(x in point(), v in ambient()) {
        let t = ContactData::reeb_field(&x);
        let xi = ContactData::contact_form(&x);
        prop_assert!((xi.apply(t.real()).re - 1.0).abs() <= 1e-10);
        let w = TangentVector::project(x, &v);
        prop_assert!(ContactData::dxi(&t, &w).abs() <= 1e-10);
    }

    #[test]
    fn levi_form_is_positive(x in point(), v in ambient()) {
        let h = horizontal(&x, &v);
        prop_assume!(h.norm() > 1e-3);
        prop_assert!(ContactData::dxi(&h, &h.j()) > 0.0);
    }

    #[test]
    fn exterior_derivative_squares_to_zero(f in small_form()) {
        prop_assert!(f.d().d().is_zero());
    }

    #[test]
    fn sphere_integrals_are_unitarily_invariant(
        phi in 0.0..2.0 * PI, t in 0.0..PI / 2.0, a in 0.0..2.0 * PI, b in 0.0..2.0 * PI,
        e in prop::collection::vec((0u32..3, 0u32..3, 0u32..3, 0u32..3), 1..3),
    ) {
        // U = e^{iφ}[[p, −q̄], [q, p̄]]
        let p = C64::from_polar(t.cos(), a);
        let q = C64::from_polar(t.sin(), b);
        let ph = C64::from_polar(1.0, phi);
        let f = |z: [C64; 2]| -> C64 {
            e.iter()
                .map(|&(a1, a2, b1, b2)| z[0].powu(a1) * z[1].powu(a2) * z[0].conj().powu(b1) * z[1].conj().powu(b2))
                .sum()
        };
        let rule = HopfRule::new(16).unwrap();
        let (mut s, mut su) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (z, w) in rule.nodes() {
            let uz = [ph * (p * z[0] - q.conj() * z[1]), ph * (q * z[0] + p.conj() * z[1])];
            s += f(z) * w;
            su += f(uz) * w;
        }
        prop_assert!((s - su).norm() <= 1e-10);
    }
}

#[test]
fn quadrature_weights_sum_to_sphere_area() {
    for level in [4, 8, 16, 32] {
        let rule = HopfRule::new(level).unwrap();
        let total = rule.to_rule(Measure::RoundSphere).total();
        assert!(
            (total - 2.0 * PI * PI).abs() < 1e-11,
            "level {level}: {total}"
        );
        assert!(rule.nodes().all(|(_, w)| w > 0.0));
    }
    assert!(HopfRule::new(3).is_err());
}

#[test]
fn quadrature_error_drops_with_level() {
    // ∫|z₁|²|z₂|⁴ dσ = 2π²·1!·2!/4!
    let exact = 2.0 * PI * PI * 2.0 / 24.0;
    let err = |level: usize| {
        let r = HopfRule::new(level).unwrap();
        (r.nodes()
            .map(|(z, w)| z[0].norm_sqr() * z[1].norm_sqr().powi(2) * w)
            .sum::<f64>()
            - exact)
            .abs()
    };
    let mut prev = err(4);
    for level in [8, 16, 32] {
        let e = err(level);
        assert!(
            e <= (prev / 100.0).max(1e-12),
            "level {level}: {e:e} after {prev:e}"
        );
        prev = e;
    }
}

#[test]
fn contact_volume_agrees_with_round_measure() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x = SpherePoint::random(1, &mut rng);
        assert!((ContactData::volume_density(&x) - 1.0).abs() < 1e-12);
    }
    let r = HopfRule::new(8).unwrap().to_rule(Measure::ContactVolume);
    assert!((r.total() - 2.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn contact_form_pairs_to_volume() {
    // ∫ ξ∧dξ = 2·vol(S³) with dV_ξ = ½ ξ∧dξ.
    let xi = AmbientPolyForm::contact_xi(4);
    let top = &xi * &xi.d();
    let v = HopfRule::new(8)
        .unwrap()
        .to_rule(Measure::RoundSphere)
        .pair(&top)
        .unwrap();
    assert!((v.re - 4.0 * PI * PI).abs() < 1e-10, "{v}");
}

#[test]
fn hopf_points_lie_on_sphere() {
    let r = HopfRule::new(6).unwrap();
    for (z, _) in r.nodes() {
        let x = to_real(&z);
        assert!((x.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
