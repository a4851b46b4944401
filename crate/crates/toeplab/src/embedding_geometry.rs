//! The CR map F_k(x) = (κ, χ_k(λ_1) f_1(x), …), the functionals h^F and
//! ℋ^F, and the Fubini–Study quantities they control.
//!
//! Everything is computed from the kernel engine (⟨F(x), F(y)⟩ = κ² + η-kernel)
//! with exact derivatives; the explicit component vector is kept as an
//! independent code path for cross-checks.

use crate::cutoff_moments::CutoffSpec;
use crate::error::{LabError, Result};
use crate::kernel_engine::{KernelField, Weighting};
use crate::model_geometry::{herm, ContactData, SpherePoint, TangentVector};
use crate::spectral_basis::{BasisElement, DegreeKernelTable, MultiIndex};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::sync::Arc;

/// Parameters of the embedding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingConfig {
    pub k: f64,
    pub cutoff: CutoffSpec,
    /// Extra constant component κ ∈ {0, 1}.
    pub kappa: u8,
}

/// F_k together with its kernel data.
#[derive(Clone, Debug)]
pub struct Embedding {
    cfg: EmbeddingConfig,
    eta: KernelField,
    basis: Vec<(BasisElement, f64)>,
}

impl Embedding {
    pub fn new(table: Arc<DegreeKernelTable>, cfg: EmbeddingConfig) -> Result<Self> {
        if cfg.kappa > 1 {
            return Err(LabError::InvalidParameter("κ must be 0 or 1".into()));
        }
        let eta = KernelField::new(table.clone(), cfg.cutoff, cfg.k, Weighting::Eta)?;
        let mut basis = Vec::new();
        for m in eta.band() {
            let w = cfg.cutoff.chi_k(m as f64, cfg.k);
            for alpha in MultiIndex::of_degree(table.n() + 1, m as u32) {
                basis.push((BasisElement::new(alpha), w));
            }
        }
        Ok(Self { cfg, eta, basis })
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.cfg
    }

    pub fn eta_field(&self) -> &KernelField {
        &self.eta
    }

    fn kappa2(&self) -> f64 {
        let k = self.cfg.kappa as f64;
        k * k
    }

    /// Number of components N_k + κ.
    pub fn len(&self) -> usize {
        self.basis.len() + self.cfg.kappa as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Explicit component vector in graded-lex order.
    pub fn f_k(&self, x: &SpherePoint) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.len());
        if self.cfg.kappa == 1 {
            v.push(C64::new(1.0, 0.0));
        }
        for (e, w) in &self.basis {
            v.push(e.eval(x.z()) * *w);
        }
        v
    }

    /// Explicit derivative of every component along a complexified vector
    /// with holomorphic components `a`.
    pub fn df_k(&self, x: &SpherePoint, a: &[C64]) -> Vec<C64> {
        let z = x.z();
        let mut v = Vec::with_capacity(self.len());
        if self.cfg.kappa == 1 {
            v.push(C64::new(0.0, 0.0));
        }
        for (e, w) in &self.basis {
            let mut d = C64::new(0.0, 0.0);
            for j in 0..z.len() {
                let aj = e.alpha.0[j];
                if aj == 0 {
                    continue;
                }
                let mut t = C64::new(aj as f64, 0.0);
                for (l, zl) in z.iter().enumerate() {
                    let p = if l == j { aj - 1 } else { e.alpha.0[l] };
                    t *= zl.powu(p);
                }
                d += t * a[j];
            }
            v.push(d * (*w / e.norm2.sqrt()));
        }
        v
    }

    /// |F(x)|² = κ² + η_k(T_P)(x, x).
    pub fn norm2(&self) -> f64 {
        self.kappa2() + self.eta.diag()
    }

    /// ⟨F(x), F(y)⟩ = κ² + η_k(T_P)(x, y).
    pub fn inner(&self, x: &SpherePoint, y: &SpherePoint) -> C64 {
        self.eta.kernel(x, y) + self.kappa2()
    }

    /// h^F(x, y) = |⟨F(x),F(y)⟩|² / (|F(x)|²|F(y)|²).
    pub fn h_f(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        let d = self.norm2();
        if !(d > 0.0) {
            return Err(LabError::Precondition("|F| vanishes".into()));
        }
        Ok(self.inner(x, y).norm_sqr() / (d * d))
    }

    /// ⟨ZF, F⟩ at x.
    fn zf_f(&self, x: &SpherePoint, a: &[C64]) -> C64 {
        herm(a, x.z()) * self.eta.diag_sums()[1]
    }

    /// ⟨ZF, WF⟩ at x.
    fn zf_wf(&self, x: &SpherePoint, az: &[C64], aw: &[C64]) -> C64 {
        let [_, s1, s2] = self.eta.diag_sums();
        (s2 - s1) * herm(az, x.z()) * herm(x.z(), aw) + s1 * herm(az, aw)
    }

    /// ℋ^F(V, W) = Re(⟨VF,F⟩ conj⟨WF,F⟩ − ⟨VF,WF⟩|F|²)/|F|⁴.
    pub fn hess_form(&self, v: &TangentVector, w: &TangentVector) -> f64 {
        let x = v.base();
        let (av, aw) = (v.hol(), w.hol());
        let f2 = self.norm2();
        let num = self.zf_f(x, &av) * self.zf_f(x, &aw).conj() - self.zf_wf(x, &av, &aw) * f2;
        num.re / (f2 * f2)
    }

    /// Same quantity from explicit component vectors (independent path).
    pub fn hess_form_explicit(&self, v: &TangentVector, w: &TangentVector) -> f64 {
        let x = v.base();
        let f = self.f_k(x);
        let vf = self.df_k(x, &v.hol());
        let wf = self.df_k(x, &w.hol());
        let f2 = herm(&f, &f).re;
        let num = herm(&vf, &f) * herm(&wf, &f).conj() - herm(&vf, &wf) * f2;
        num.re / (f2 * f2)
    }

    /// ℋ^F in the frame {𝒯, e, Je, …} at x.
    pub fn hessian_matrix(&self, x: &SpherePoint) -> (Vec<TangentVector>, DMatrix<f64>) {
        let frame = ContactData::frame(x);
        let d = frame.len();
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = self.hess_form(&frame[a], &frame[b]);
            }
        }
        (frame, m)
    }

    /// Eigenvalues of ℋ^F in the orthonormal frame at x (ascending).
    pub fn hessian_eigenvalues(&self, x: &SpherePoint) -> Vec<f64> {
        let (_, m) = self.hessian_matrix(x);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Second derivative of t ↦ h^F(γ(t), y) at t = 0 along the unit-speed
    /// great circle γ from y in direction v: central differences at t and
    /// t/2 combined by one Richardson step.
    fn fd_second(&self, y: &SpherePoint, v: &TangentVector, step: f64) -> Result<f64> {
        let g0 = self.h_f(y, y)?;
        let d = |t: f64| -> Result<f64> {
            let gp = self.h_f(&y.geodesic(v, t), y)?;
            let gm = self.h_f(&y.geodesic(v, -t), y)?;
            Ok((gp + gm - 2.0 * g0) / (t * t))
        };
        let (coarse, fine) = (d(step)?, d(0.5 * step)?);
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Finite-difference Hessian of g_y = h^F(·, y) at its maximum x = y in
    /// the frame {𝒯, e, Je, …}; off-diagonal entries by polarization along
    /// (V ± W)/√2.
    pub fn fd_hessian(
        &self,
        y: &SpherePoint,
        step: f64,
    ) -> Result<(Vec<TangentVector>, DMatrix<f64>)> {
        let frame = ContactData::frame(y);
        let d = frame.len();
        let mut m = DMatrix::zeros(d, d);
        for a in 0..d {
            m[(a, a)] = self.fd_second(y, &frame[a], step)?;
            for b in 0..a {
                let plus = frame[a]
                    .add(&frame[b])
                    .scaled(std::f64::consts::FRAC_1_SQRT_2);
                let minus = frame[a]
                    .add(&frame[b].scaled(-1.0))
                    .scaled(std::f64::consts::FRAC_1_SQRT_2);
                let v =
                    0.5 * (self.fd_second(y, &plus, step)? - self.fd_second(y, &minus, step)?);
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        Ok((frame, m))
    }

    /// Fubini–Study distance √(1 − √h) between [F(x)] and [F(y)].
    pub fn fs_distance(&self, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
        Ok((1.0 - self.h_f(x, y)?.sqrt()).max(0.0).sqrt())
    }

    /// [F]^*ds²_FS(Z, W) = (|F|²⟨ZF,WF⟩ − ⟨ZF,F⟩⟨F,WF⟩)/|F|⁴ for complexified
    /// vectors given by their holomorphic components (sesquilinear in W).
    pub fn fs_pullback(&self, x: &SpherePoint, az: &[C64], aw: &[C64]) -> C64 {
        let f2 = self.norm2();
        (self.zf_wf(x, az, aw) * f2 - self.zf_f(x, az) * self.zf_f(x, aw).conj()) / (f2 * f2)
    }

    /// Pullback on a pair of real tangent vectors.
    pub fn fs_pullback_real(&self, v: &TangentVector, w: &TangentVector) -> C64 {
        self.fs_pullback(v.base(), &v.hol(), &w.hol())
    }
}

/// Result of a randomized separation scan.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub k: f64,
    pub delta: f64,
    pub pairs: usize,
    pub max_h: f64,
    /// Largest h over distinct pairs at any separation (must stay < 1).
    pub max_h_distinct: f64,
}

/// Samples random pairs plus Reeb-orbit and great-circle pairs at chordal
/// distance ≥ δ and reports the largest h^F among them.
pub fn separation_scan(
    emb: &Embedding,
    samples: usize,
    delta: f64,
    seed: u64,
) -> Result<SeparationReport> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut max_h: f64 = 0.0;
    let mut max_h_distinct: f64 = 0.0;
    let mut pairs = 0;
    let chord = |x: &SpherePoint, y: &SpherePoint| -> f64 {
        x.z()
            .iter()
            .zip(y.z())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    // rotation angle θ along the Reeb orbit with chord 2 sin(θ/2) = δ
    let theta_min = 2.0 * (delta / 2.0).min(1.0).asin();
    for i in 0..samples {
        let x = SpherePoint::random(1, &mut rng);
        let candidates = match i % 3 {
            0 => vec![SpherePoint::random(1, &mut rng)],
            1 => vec![x.rotate(theta_min), x.rotate(-theta_min)],
            _ => {
                let frame = ContactData::frame(&x);
                vec![
                    x.geodesic(&frame[1], theta_min),
                    x.geodesic(&frame[2], theta_min),
                ]
            }
        };
        for y in candidates {
            let h = emb.h_f(&x, &y)?;
            if chord(&x, &y) > 1e-9 {
                max_h_distinct = max_h_distinct.max(h);
            }
            if chord(&x, &y) >= delta * (1.0 - 1e-12) {
                max_h = max_h.max(h);
                pairs += 1;
            }
        }
    }
    Ok(SeparationReport {
        k: emb.config().k,
        delta,
        pairs,
        max_h,
        max_h_distinct,
    })
}
