//! The Gaussian ensemble: covariance, reproducibility and parallel
//! determinism.

use num_complex::Complex64 as C64;
use std::sync::Arc;
use toeplab::config::LabConfig;
use toeplab::cutoff_moments::CutoffSpec;
use toeplab::experiments::{par_map, CrSampleSet, CrSampling};
use toeplab::kernel_engine::{KernelField, Weighting};
use toeplab::model_geometry::SpherePoint;
use toeplab::random_ensemble::{Ensemble, EnsembleConfig};
use toeplab::spectral_basis::DegreeKernelTable;

fn ensemble(k: f64, kappa: u8, seed: u64) -> Ensemble {
    Ensemble::new(EnsembleConfig {
        n: 1,
        k,
        cutoff: CutoffSpec::default(),
        kappa,
        master_seed: seed,
    })
    .unwrap()
}

#[test]
fn covariance_matches_kernel() {
    let k = 16.0;
    let table = Arc::new(DegreeKernelTable::build(1, 16).unwrap());
    let field = KernelField::new(table, CutoffSpec::default(), k, Weighting::Eta).unwrap();
    let x = SpherePoint::hopf(0.3, 0.2, 1.0);
    let y = SpherePoint::hopf(0.5, 0.4, 1.3);
    for kappa in [0u8, 1] {
        let e = ensemble(k, kappa, 99);
        let n = 4000;
        let prods: Vec<C64> = (0..n)
            .map(|t| {
                let d = e.sample(t);
                e.eval_f(&d, &x) * e.eval_f(&d, &y).conj()
            })
            .collect();
        let mean: C64 = prods.iter().sum::<C64>() / n as f64;
        let var: f64 = prods.iter().map(|p| (p - mean).norm_sqr()).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let target = field.kernel(&x, &y) + f64::from(kappa * kappa);
        assert!(
            (mean - target).norm() <= 4.0 * se,
            "κ = {kappa}: {mean} vs {target} (SE {se})"
        );
    }
}

#[test]
fn draws_depend_only_on_seed_and_trial() {
    let (a, b) = (ensemble(32.0, 1, 5), ensemble(32.0, 1, 5));
    for t in [0, 7, 1000] {
        assert_eq!(a.sample(t), b.sample(t));
    }
    assert_ne!(a.sample(3), a.sample(4));
    assert_ne!(a.sample(3), ensemble(32.0, 1, 6).sample(3));
    assert_eq!(a.sample(0).a.len(), a.len());
}

#[test]
fn parallel_map_keeps_index_order() {
    for jobs in [1, 2, 3, 8] {
        let v = par_map(jobs, 17, |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..17).map(|i| i * i).collect::<Vec<_>>());
    }
    assert!(par_map(4, 0, |i| Ok(i)).unwrap().is_empty());
}

#[test]
fn sample_sets_are_independent_of_worker_count() {
    let mut cfg = LabConfig::default();
    cfg.equi_cr.k_grid = vec![16.0, 24.0];
    cfg.equi_cr.trials = 12;
    let sampling = CrSampling::from(&cfg.equi_cr);
    let one = CrSampleSet::generate(&cfg, &sampling).unwrap();
    cfg.jobs = 3;
    let three = CrSampleSet::generate(&cfg, &sampling).unwrap();
    assert_eq!(one.values, three.values);
    assert_eq!(one.rejected, three.rejected);
}
