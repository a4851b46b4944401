//! Projective embedding: the angle function h^F and its Hessian.

use nalgebra::DMatrix;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use toeplab::cutoff_moments::CutoffSpec;
use toeplab::embedding_geometry::{separation_scan, Embedding, EmbeddingConfig};
use toeplab::model_geometry::SpherePoint;
use toeplab::spectral_basis::DegreeKernelTable;

fn emb(k: f64, kappa: u8) -> Embedding {
    static TABLE: OnceLock<Arc<DegreeKernelTable>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Arc::new(DegreeKernelTable::build(1, 200).unwrap()));
    let cfg = EmbeddingConfig {
        k,
        cutoff: CutoffSpec::default(),
        kappa,
    };
    Embedding::new(table.clone(), cfg).unwrap()
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (0.01f64..0.99, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(u, a, b)| SpherePoint::hopf(u, a, b))
}

/// ℋ in the frame {𝒯, e, Je} with 𝒯 scaled by 1/k and e, Je by 1/√k.
fn scaled_hessian(k: f64, x: &SpherePoint) -> DMatrix<f64> {
    let (_, h) = emb(k, 0).hessian_matrix(x);
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        1.0 / k,
        1.0 / k.sqrt(),
        1.0 / k.sqrt(),
    ]));
    &s * h * &s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn angle_function_is_bounded_and_symmetric(x in point(), y in point(), kappa in 0u8..2) {
        let e = emb(32.0, kappa);
        let h = e.h_f(&x, &y).unwrap();
        prop_assert!((-1e-14..=1.0 + 1e-12).contains(&h));
        prop_assert!((h - e.h_f(&y, &x).unwrap()).abs() <= 1e-12);
        prop_assert!((e.h_f(&x, &x).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn angle_function_is_circle_invariant(x in point(), y in point(), t in 0.0..2.0 * PI) {
        let e = emb(32.0, 0);
        let a = e.h_f(&x, &y).unwrap();
        let b = e.h_f(&x.rotate(t), &y.rotate(t)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn hessian_spectrum_is_circle_invariant_and_negative(x in point(), t in 0.0..2.0 * PI) {
        let e = emb(64.0, 0);
        let mut a = e.hessian_eigenvalues(&x);
        let mut b = e.hessian_eigenvalues(&x.rotate(t));
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
        }
        prop_assert!(a.iter().all(|v| *v < 0.0));
    }
}

#[test]
fn finite_difference_hessian_is_twice_the_hessian_form() {
    let e = emb(64.0, 0);
    for x in [
        SpherePoint::hopf(0.2, 0.1, 0.5),
        SpherePoint::hopf(0.7, 2.0, -1.0),
    ] {
        let (_, h) = e.hessian_matrix(&x);
        let (_, fd) = e.fd_hessian(&x, 5e-4).unwrap();
        let rel = (&fd - &h * 2.0).norm() / (h.norm() * 2.0);
        assert!(rel < 1e-4, "rel {rel:e}");
    }
}

#[test]
fn rescaled_hessian_settles() {
    let x = SpherePoint::hopf(0.35, 0.8, 1.9);
    let s: Vec<_> = [32.0, 64.0, 128.0, 256.0]
        .iter()
        .map(|&k| scaled_hessian(k, &x))
        .collect();
    let dev: Vec<f64> = s.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    for d in dev.windows(2) {
        assert!(d[1] <= 0.8 * d[0], "{dev:?}");
    }
}

#[test]
fn separated_pairs_have_small_angle_function() {
    for k in [64.0, 128.0] {
        let r = separation_scan(&emb(k, 0), 300, 0.5, 11).unwrap();
        assert!(r.pairs > 0);
        assert!(r.max_h <= 0.5, "k = {k}: {}", r.max_h);
        assert!(r.max_h_distinct < 1.0);
    }
}

#[test]
fn extra_constant_component_shifts_the_norm() {
    let (a, b) = (emb(32.0, 0), emb(32.0, 1));
    assert!((b.norm2() - a.norm2() - 1.0).abs() < 1e-10);
    assert!(Embedding::new(
        Arc::new(DegreeKernelTable::build(1, 40).unwrap()),
        EmbeddingConfig {
            k: 32.0,
            cutoff: CutoffSpec::default(),
            kappa: 2,
        }
    )
    .is_err());
}
