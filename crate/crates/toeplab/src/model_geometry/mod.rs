//! The model CR manifold: the unit sphere S^{2n+1} ⊂ C^{n+1}, its contact
//! data, the unit ball it bounds, polynomial differential forms, and the
//! quadrature rules used to integrate over all of them.

pub mod forms;
pub mod quadrature;

use crate::error::{LabError, Result};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use forms::{AmbientPolyForm, FormValue};
pub use quadrature::{
    ball_quadrature, curve_quadrature, sphere_quadrature, BallRule, Chart, HopfRule, Measure,
    MonteCarloFallback, QuadratureRule,
};

/// Tolerance for the unit-modulus invariant of sphere points.
pub const SPHERE_TOL: f64 = 1e-12;
/// Tolerance for tangency of tangent vectors.
pub const TANGENT_TOL: f64 = 1e-10;

/// Hermitian pairing ⟨a, b⟩ = Σ a_j conj(b_j).
#[inline]
pub fn herm(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Real coordinates (x_0, x_1, …) of a complex vector, z_j = x_{2j} + i x_{2j+1}.
pub fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// Complex vector from interleaved real coordinates.
pub fn to_complex(r: &[f64]) -> Vec<C64> {
    r.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// A point of the unit sphere in C^{n+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    z: Vec<C64>,
}

impl SpherePoint {
    /// Normalizes `z`; fails on (numerically) zero vectors.
    pub fn new(z: Vec<C64>) -> Result<Self> {
        let r = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(r > 1e-300) || !r.is_finite() {
            return Err(LabError::InvalidParameter(
                "cannot normalize a zero or non-finite vector onto the sphere".into(),
            ));
        }
        Ok(Self {
            z: z.into_iter().map(|c| c / r).collect(),
        })
    }

    pub fn from_real(r: &[f64]) -> Result<Self> {
        if r.len() % 2 != 0 || r.len() < 4 {
            return Err(LabError::InvalidParameter(
                "real coordinates must have even length ≥ 4".into(),
            ));
        }
        Self::new(to_complex(r))
    }

    /// Hopf coordinates on S^3 with u = cos²φ:
    /// z = (√u e^{iθ₁}, √(1−u) e^{iθ₂}).
    pub fn hopf(u: f64, theta1: f64, theta2: f64) -> Self {
        let a = u.clamp(0.0, 1.0).sqrt();
        let b = (1.0 - u).clamp(0.0, 1.0).sqrt();
        Self {
            z: vec![C64::from_polar(a, theta1), C64::from_polar(b, theta2)],
        }
    }

    /// Uniformly distributed point (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let z: Vec<C64> = (0..=n)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(p) = Self::new(z) {
                return p;
            }
        }
    }

    /// The CR dimension n (the sphere is S^{2n+1}).
    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn real(&self) -> Vec<f64> {
        to_real(&self.z)
    }

    /// The diagonal S¹ action z ↦ e^{iθ} z.
    pub fn rotate(&self, theta: f64) -> Self {
        let p = C64::from_polar(1.0, theta);
        Self {
            z: self.z.iter().map(|c| c * p).collect(),
        }
    }

    /// Unit-speed great-circle motion: cos(t) x + sin(t) v̂ for a unit tangent v̂.
    pub fn geodesic(&self, v: &TangentVector, t: f64) -> Self {
        let vh = v.hol();
        let nv = vh.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let z = self
            .z
            .iter()
            .zip(&vh)
            .map(|(a, b)| a * t.cos() + b * (t.sin() / nv))
            .collect();
        Self::new(z).expect("geodesic stays on the sphere")
    }
}

/// A point of the closed unit ball in C^{n+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct BallPoint {
    z: Vec<C64>,
    boundary: bool,
}

impl BallPoint {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        if r2.sqrt() > 1.0 + SPHERE_TOL || !r2.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "ball point has modulus {} > 1",
                r2.sqrt()
            )));
        }
        Ok(Self {
            z,
            boundary: (r2.sqrt() - 1.0).abs() <= SPHERE_TOL,
        })
    }

    pub fn from_sphere(x: &SpherePoint, radius: f64) -> Result<Self> {
        Self::new(x.z.iter().map(|c| c * radius).collect())
    }

    pub fn z(&self) -> &[C64] {
        &self.z
    }

    pub fn is_boundary(&self) -> bool {
        self.boundary
    }

    pub fn norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A real tangent vector to the sphere at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    v: Vec<f64>,
}

impl TangentVector {
    /// Fails unless Re⟨v, z⟩ = 0 within tolerance.
    pub fn new(base: SpherePoint, v: Vec<f64>) -> Result<Self> {
        if v.len() != 2 * base.z.len() {
            return Err(LabError::InvalidParameter(
                "tangent vector length mismatch".into(),
            ));
        }
        let x = base.real();
        let dot: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
        let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        if dot.abs() > TANGENT_TOL * scale {
            return Err(LabError::InvalidParameter(format!(
                "vector is not tangent to the sphere (Re⟨v,z⟩ = {dot:e})"
            )));
        }
        Ok(Self { base, v })
    }

    /// Projects an arbitrary ambient vector onto the tangent space.
    pub fn project(base: SpherePoint, v: &[f64]) -> Self {
        let x = base.real();
        let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        let v = v.iter().zip(&x).map(|(a, b)| a - dot * b).collect();
        Self { base, v }
    }

    pub fn from_hol(base: SpherePoint, v: &[C64]) -> Result<Self> {
        Self::new(base, to_real(v))
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn real(&self) -> &[f64] {
        &self.v
    }

    /// Holomorphic components dz_j(V) = v_{2j} + i v_{2j+1}.
    pub fn hol(&self) -> Vec<C64> {
        to_complex(&self.v)
    }

    /// The complex structure J (multiplication by i on C^{n+1}); preserves
    /// the contact distribution.
    pub fn j(&self) -> Self {
        let h: Vec<C64> = self.hol().iter().map(|c| c * C64::i()).collect();
        Self {
            base: self.base.clone(),
            v: to_real(&h),
        }
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            v: self.v.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            base: self.base.clone(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        }
    }
}

/// A complex-valued covector on the ambient real space, acting on real
/// vectors by Σ c_i v_i.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector(pub Vec<C64>);

impl Covector {
    /// Σ_j a_j dz_j.
    pub fn from_dz(a: &[C64]) -> Self {
        Self(a.iter().flat_map(|c| [*c, c * C64::i()]).collect())
    }

    pub fn apply(&self, v: &[f64]) -> C64 {
        self.0.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    pub fn to_form(&self) -> FormValue {
        FormValue::from_covector(&self.0)
    }
}

/// Contact data of the unit sphere: ξ = Im⟨·, z⟩, Reeb field 𝒯 = iz,
/// dξ = −2 Im⟨·,·⟩, and the contact volume (1/2)ξ∧dξ on S^3.
pub struct ContactData;

impl ContactData {
    /// The contact form ξ_x as an ambient covector.
    pub fn contact_form(x: &SpherePoint) -> Covector {
        Covector(
            x.z.iter()
                .flat_map(|c| [C64::new(-c.im, 0.0), C64::new(c.re, 0.0)])
                .collect(),
        )
    }

    /// The Reeb field 𝒯_x = i x.
    pub fn reeb_field(x: &SpherePoint) -> TangentVector {
        let h: Vec<C64> = x.z.iter().map(|c| c * C64::i()).collect();
        TangentVector {
            base: x.clone(),
            v: to_real(&h),
        }
    }

    /// dξ(V, W) = −2 Im⟨v, w⟩ (the restriction of i Σ dz_j ∧ dz̄_j).
    pub fn dxi(v: &TangentVector, w: &TangentVector) -> f64 {
        -2.0 * herm(&v.hol(), &w.hol()).im
    }

    /// dξ on complexified vectors given by their holomorphic and
    /// antiholomorphic components: i Σ (dz_j(Z) dz̄_j(W) − dz_j(W) dz̄_j(Z)).
    pub fn dxi_complex(z_hol: &[C64], z_ahol: &[C64], w_hol: &[C64], w_ahol: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..z_hol.len() {
            s += z_hol[j] * w_ahol[j] - w_hol[j] * z_ahol[j];
        }
        s * C64::i()
    }

    /// Density of the contact volume dV_ξ = (2^{-n}/n!) ξ∧(dξ)^n with respect
    /// to the round measure (identically 1 on the unit sphere; computed
    /// from the forms so that the identity is checked, not assumed).
    pub fn volume_density(x: &SpherePoint) -> f64 {
        let dim = 2 * x.z.len();
        let n = x.n();
        let xi = AmbientPolyForm::contact_xi(dim);
        let dxi = xi.d();
        let mut top = xi.clone();
        for _ in 0..n {
            top = &top * &dxi;
        }
        let norm = 2f64.powi(-(n as i32)) / (1..=n).map(|j| j as f64).product::<f64>();
        (top.eval(&x.real()).sphere_density(&x.real()) * norm).re
    }

    /// An orthonormal real frame {𝒯, e₁, Je₁, …} of T_x S^{2n+1}, built by
    /// Gram–Schmidt on the complex tangent space; deterministic given x.
    pub fn frame(x: &SpherePoint) -> Vec<TangentVector> {
        let nc = x.z.len();
        let mut frame = vec![Self::reeb_field(x)];
        let mut hol_basis: Vec<Vec<C64>> = vec![x.z.clone()];
        for j in 0..nc {
            let mut e = vec![C64::new(0.0, 0.0); nc];
            e[j] = C64::new(1.0, 0.0);
            for b in &hol_basis {
                let p = herm(&e, b);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= p * bi;
                }
            }
            let r = e.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if r < 1e-8 {
                continue;
            }
            let e: Vec<C64> = e.iter().map(|c| c / r).collect();
            hol_basis.push(e.clone());
            let t = TangentVector {
                base: x.clone(),
                v: to_real(&e),
            };
            frame.push(t.clone());
            frame.push(t.j());
            if frame.len() == 2 * nc - 1 {
                break;
            }
        }
        frame
    }
}
