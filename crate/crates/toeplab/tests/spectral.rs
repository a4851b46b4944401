//! Monomial basis, degree kernels, Toeplitz kernels and cutoff moments.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use toeplab::cutoff_moments::{moments, mv, tau_j, CutoffSpec};
use toeplab::kernel_engine::{KernelField, Weighting};
use toeplab::model_geometry::quadrature::HopfRule;
use toeplab::model_geometry::{herm, BallPoint, SpherePoint};
use toeplab::spectral_basis::{
    monomial_norm, monomial_norm_closed, reproducing_check, BasisElement, DegreeKernelTable,
    MultiIndex,
};

fn point() -> impl Strategy<Value = SpherePoint> {
    (0.01f64..0.99, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(u, a, b)| SpherePoint::hopf(u, a, b))
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Test-side kernel Σ η(m/k)(m+1)/(2π²)⟨x,y⟩^m.
fn kernel_oracle(spec: &CutoffSpec, k: f64, s: C64) -> C64 {
    (0..=(2.0 * k) as i32)
        .map(|m| s.powi(m) * spec.eta(m as f64 / k) * (m as f64 + 1.0) / (2.0 * PI * PI))
        .sum()
}

fn field(k: f64) -> KernelField {
    static TABLE: OnceLock<Arc<DegreeKernelTable>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Arc::new(DegreeKernelTable::build(1, 256).unwrap()));
    KernelField::new(table.clone(), CutoffSpec::default(), k, Weighting::Eta).unwrap()
}

#[test]
fn monomial_norms_match_beta_oracle() {
    let rule = HopfRule::new(40).unwrap();
    for m in 0..=30u32 {
        for a in 0..=m {
            let alpha = MultiIndex(vec![a, m - a]);
            let oracle = 2.0 * PI * PI * factorial(a) * factorial(m - a) / factorial(m + 1);
            let q = monomial_norm(&alpha, &rule).unwrap();
            assert!(
                (q / oracle - 1.0).abs() < 1e-10,
                "{alpha:?}: {q} vs {oracle}"
            );
            assert!((monomial_norm_closed(&alpha) / oracle - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn basis_is_orthonormal_up_to_degree_six() {
    let rule = HopfRule::new(16).unwrap();
    let basis: Vec<BasisElement> = (0..=6)
        .flat_map(|m| MultiIndex::of_degree(2, m))
        .map(BasisElement::new)
        .collect();
    let nodes: Vec<_> = rule.nodes().collect();
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let g: C64 = nodes
                .iter()
                .map(|(z, w)| a.eval(z) * b.eval(z).conj() * w)
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((g - target).norm() < 1e-8, "gram[{i}][{j}] = {g}");
        }
    }
}

#[test]
fn degree_constants_match_closed_form() {
    let table = DegreeKernelTable::build(1, 64).unwrap();
    for m in 0..=64 {
        let c = (m as f64 + 1.0) / (2.0 * PI * PI);
        assert!((table.c(m) / c - 1.0).abs() < 1e-10);
        assert!(table.c(m) > 0.0);
    }
}

#[test]
fn degree_kernel_reproduces_band_polynomials() {
    let table = DegreeKernelTable::build(1, 12).unwrap();
    let rule = HopfRule::new(16).unwrap();
    let x = SpherePoint::hopf(0.3, 1.0, 2.0);
    for m in [0usize, 1, 5, 12] {
        let p: Vec<(MultiIndex, C64)> = MultiIndex::of_degree(2, m as u32)
            .into_iter()
            .enumerate()
            .map(|(i, a)| (a, C64::new(1.0 + i as f64, -0.5)))
            .chain([(MultiIndex(vec![1, 0]), C64::new(0.3, 0.0))])
            .collect();
        assert!(reproducing_check(&table, m, &p, x.z(), &rule) < 1e-8);
    }
}

#[test]
fn band_outside_weights_vanish() {
    let f = field(64.0);
    let band = f.band();
    for m in 0..=128usize {
        if !band.contains(&m) {
            assert_eq!(f.weight(m), 0.0, "m = {m}");
        }
    }
    assert!(band.clone().all(|m| f.weight(m) >= 0.0));
}

#[test]
fn toeplitz_kernel_reproduces_band_monomials() {
    // ∫ K(x, y) y^α dσ(y) = η(m/k) x^α for |α| = m.
    let k = 24.0;
    let f = field(k);
    let spec = CutoffSpec::default();
    let rule = HopfRule::new(24).unwrap();
    let x = SpherePoint::hopf(0.6, 0.4, -1.3);
    for m in [8u32, 12, 15] {
        let alpha = MultiIndex(vec![m / 3, m - m / 3]);
        let lhs: C64 = rule
            .nodes()
            .map(|(y, w)| f.kernel(&x, &SpherePoint::new(y.to_vec()).unwrap()) * alpha.eval(&y) * w)
            .sum();
        let rhs = alpha.eval(x.z()) * spec.eta(m as f64 / k);
        assert!((lhs - rhs).norm() < 1e-8, "m = {m}: {lhs} vs {rhs}");
    }
}

#[test]
fn log_of_kernel_grows_at_most_logarithmically() {
    // sup_{|z| ≤ 1} |log(1 + B_k)| is attained at |z| = 1 and stays below
    // (n + 1)(log k + 1).
    for k in [16.0, 32.0, 64.0, 128.0, 256.0] {
        let f = field(k);
        let sup = (0..=50)
            .map(|i| f.radial_derivs(i as f64 / 50.0)[0])
            .map(|b| (1.0 + b).ln().abs())
            .fold(0.0, f64::max);
        assert!(sup <= 2.0 * (f64::ln(k) + 1.0), "k = {k}: {sup}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_oracle_and_is_hermitian(x in point(), y in point()) {
        let f = field(48.0);
        let kxy = f.kernel(&x, &y);
        let oracle = kernel_oracle(&CutoffSpec::default(), 48.0, herm(x.z(), y.z()));
        prop_assert!((kxy - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
        prop_assert!((kxy - f.kernel(&y, &x).conj()).norm() <= 1e-10 * (1.0 + kxy.norm()));
    }

    #[test]
    fn kernel_is_circle_invariant(x in point(), y in point(), t in 0.0..2.0 * PI) {
        let f = field(48.0);
        let a = f.kernel(&x, &y);
        let b = f.kernel(&x.rotate(t), &y.rotate(t));
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn kernel_diagonal_is_positive_and_constant(x in point(), k in 8.0f64..128.0) {
        let f = field(k);
        let d = f.kernel(&x, &x);
        prop_assert!(d.re > 0.0 && d.im.abs() <= 1e-10 * d.re);
        prop_assert!((d.re - f.diag()).abs() <= 1e-10 * f.diag());
    }

    #[test]
    fn monomials_are_reeb_eigenfunctions(x in point(), t in -PI..PI, a in 0u32..8, b in 0u32..8) {
        // f(e^{iθ}x) = e^{imθ}f(x), i.e. −i𝒯 f = m f.
        let alpha = MultiIndex(vec![a, b]);
        let lhs = alpha.eval(x.rotate(t).z());
        let rhs = alpha.eval(x.z()) * C64::from_polar(1.0, (a + b) as f64 * t);
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn log_kernel_is_plurisubharmonic(s in 0.0f64..1.0, t in 0.0..2.0 * PI, u in 0.0..1.0f64, k in 16.0f64..128.0) {
        let f = field(k);
        let r = s.sqrt();
        let z = vec![C64::from_polar(r * u.sqrt(), t), C64::from_polar(r * (1.0 - u).sqrt(), 0.3)];
        prop_assume!(BallPoint::new(z.clone()).is_ok());
        let h = f.ddbar_log(&z, 1.0).unwrap();
        // smallest eigenvalue of the 2×2 Hermitian matrix
        let (a, d, b) = (h[0].re, h[3].re, h[1]);
        let lo = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        prop_assert!(lo >= -1e-10, "{lo}");
    }

    #[test]
    fn moments_scale_covariantly(d1 in 0.05f64..0.4, w in 0.1f64..0.5, s in prop::sample::select(vec![2.0f64, 3.0])) {
        let spec = CutoffSpec::smooth(d1, d1 + w).unwrap();
        for j in 0..3u32 {
            let a = tau_j(&spec.rescaled(s), j, 1).unwrap();
            let b = s.powi(j as i32 + 2) * tau_j(&spec, j, 1).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300), "j = {j}: {a} vs {b}");
        }
    }

    #[test]
    fn mean_value_lies_inside_support(d1 in 0.0f64..0.9, w in 0.05f64..1.0, smooth in any::<bool>()) {
        let spec = if smooth {
            CutoffSpec::smooth(d1.max(1e-3), d1.max(1e-3) + w)
        } else {
            CutoffSpec::indicator(d1, d1 + w)
        }
        .unwrap();
        let m = moments(&spec, 1).unwrap();
        prop_assert!(m.mv > spec.delta1 && m.mv < spec.delta2);
        prop_assert!(m.tau1 < (m.tau2 * m.tau0).sqrt());
        prop_assert!(m.var > 0.0);
    }
}

#[test]
fn indicator_mean_value() {
    let spec = CutoffSpec::indicator(0.0, 1.0).unwrap();
    assert!((mv(&spec, 1).unwrap() - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn invalid_cutoffs_are_rejected() {
    assert!(CutoffSpec::smooth(0.5, 0.5).is_err());
    assert!(CutoffSpec::smooth(0.7, 0.2).is_err());
    assert!(CutoffSpec::smooth(-0.1, 0.2).is_err());
}
