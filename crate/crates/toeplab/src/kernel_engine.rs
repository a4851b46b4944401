//! Exact evaluation of the functional-calculus kernels χ_k(T_P)(x, y) on the
//! sphere, their analytic derivatives, the ball function B_k^η, the one-form
//! β_k, and i∂∂̄ log(c + B_k^η).
//!
//! Every kernel is Φ(⟨x, y⟩) with Φ(s) = Σ_m w_m c_m s^m over the finite
//! active band of degrees, so all derivatives are term-wise and exact.

use crate::cutoff_moments::{chi_moment, tau_j, CutoffSpec};
use crate::error::{LabError, Result};
use crate::model_geometry::{herm, BallPoint, Covector, SpherePoint};
use crate::numerics::{ComplexSum, NeumaierSum};
use crate::spectral_basis::DegreeKernelTable;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Which power of the cutoff weights the spectral sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// w_m = χ(m/k): the kernel of χ_k(T_P).
    Chi,
    /// w_m = χ(m/k)² = η(m/k): the kernel of η_k(T_P).
    Eta,
}

/// A real-bilinear form on ambient real vectors with complex values.
#[derive(Clone, Debug, PartialEq)]
pub struct Bicovector {
    dim: usize,
    m: Vec<C64>,
}

impl Bicovector {
    pub fn apply(&self, v: &[f64], w: &[f64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..self.dim {
            for b in 0..self.dim {
                s += self.m[a * self.dim + b] * v[a] * w[b];
            }
        }
        s
    }
}

/// Holomorphic components of the real basis vector e_a.
fn basis_hol(nc: usize, a: usize) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); nc];
    h[a / 2] = if a % 2 == 0 {
        C64::new(1.0, 0.0)
    } else {
        C64::i()
    };
    h
}

/// Degree-resolved spectral data and cutoff weights for one value of k.
#[derive(Clone, Debug)]
pub struct KernelField {
    table: Arc<DegreeKernelTable>,
    cutoff: CutoffSpec,
    k: f64,
    weighting: Weighting,
    m_lo: usize,
    /// a_m = w_m c_m for m = m_lo, m_lo + 1, …
    coef: Vec<f64>,
    /// w_m on the band.
    weights: Vec<f64>,
    sums: [f64; 3],
}

impl KernelField {
    pub fn new(
        table: Arc<DegreeKernelTable>,
        cutoff: CutoffSpec,
        k: f64,
        weighting: Weighting,
    ) -> Result<Self> {
        cutoff.validate()?;
        if !(k > 0.0) {
            return Err(LabError::InvalidParameter("k must be positive".into()));
        }
        let hi = (cutoff.delta2 * k).floor() as usize;
        if hi > table.max_degree() {
            return Err(LabError::InvalidParameter(format!(
                "degree table stops at {} but the band reaches {hi}",
                table.max_degree()
            )));
        }
        let lo = (cutoff.delta1 * k).ceil().max(0.0) as usize;
        let w = |m: usize| {
            let c = cutoff.chi_k(m as f64, k);
            match weighting {
                Weighting::Chi => c,
                Weighting::Eta => c * c,
            }
        };
        let active: Vec<usize> = (lo..=hi).filter(|&m| w(m) > 0.0).collect();
        let (m_lo, m_hi) = match (active.first(), active.last()) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                return Err(LabError::InvalidParameter(format!(
                    "no active degrees for k = {k} in ({}, {})",
                    cutoff.delta1, cutoff.delta2
                )))
            }
        };
        let weights: Vec<f64> = (m_lo..=m_hi).map(w).collect();
        let coef: Vec<f64> = (m_lo..=m_hi)
            .zip(&weights)
            .map(|(m, w)| w * table.c(m))
            .collect();
        let mut s = [NeumaierSum::new(); 3];
        for (i, a) in coef.iter().enumerate() {
            let m = (m_lo + i) as f64;
            s[0].add(*a);
            s[1].add(m * a);
            s[2].add(m * m * a);
        }
        Ok(Self {
            table,
            cutoff,
            k,
            weighting,
            m_lo,
            coef,
            weights,
            sums: [s[0].value(), s[1].value(), s[2].value()],
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn table(&self) -> &Arc<DegreeKernelTable> {
        &self.table
    }

    /// Active degrees (inclusive range).
    pub fn band(&self) -> std::ops::RangeInclusive<usize> {
        self.m_lo..=(self.m_lo + self.coef.len() - 1)
    }

    /// Cutoff weight w_m (zero outside the band).
    pub fn weight(&self, m: usize) -> f64 {
        if self.band().contains(&m) {
            self.weights[m - self.m_lo]
        } else {
            0.0
        }
    }

    /// (S₀, S₁, S₂) = Σ m^j w_m c_m.
    pub fn diag_sums(&self) -> [f64; 3] {
        self.sums
    }

    /// (Φ(s), Φ'(s), Φ''(s)) summed in ascending degree with compensation.
    pub fn phi_derivs(&self, s: C64) -> [C64; 3] {
        let mut acc = [ComplexSum::new(); 3];
        let lo = self.m_lo;
        // s^{lo-2}, s^{lo-1}, s^{lo} computed directly, then stepped upward.
        let mut p = if lo == 0 {
            C64::new(1.0, 0.0)
        } else {
            s.powu(lo as u32)
        };
        let mut pm1 = if lo >= 1 {
            s.powu(lo as u32 - 1)
        } else {
            C64::new(0.0, 0.0)
        };
        let mut pm2 = if lo >= 2 {
            s.powu(lo as u32 - 2)
        } else {
            C64::new(0.0, 0.0)
        };
        for (i, a) in self.coef.iter().enumerate() {
            let m = (lo + i) as f64;
            acc[0].add(p * *a);
            if m >= 1.0 {
                acc[1].add(pm1 * (m * a));
            }
            if m >= 2.0 {
                acc[2].add(pm2 * (m * (m - 1.0) * a));
            }
            pm2 = pm1;
            pm1 = p;
            p *= s;
        }
        [acc[0].value(), acc[1].value(), acc[2].value()]
    }

    /// χ_k(T_P)(x, y) (or η_k) = Σ w_m c_m ⟨x, y⟩^m.
    pub fn kernel(&self, x: &SpherePoint, y: &SpherePoint) -> C64 {
        self.phi_derivs(herm(x.z(), y.z()))[0]
    }

    /// Kernel on the diagonal (independent of x on the sphere).
    pub fn diag(&self) -> f64 {
        self.sums[0]
    }

    /// Leading term k^{n+1}(2π^{n+1})^{-1} ∫ t^n w(t) dt of the diagonal.
    pub fn kernel_diag_asymptotic_ref(&self) -> Result<f64> {
        let n = self.n();
        let integral = match self.weighting {
            Weighting::Eta => tau_j(&self.cutoff, 0, n)?,
            Weighting::Chi => chi_moment(&self.cutoff, n as i32),
        };
        Ok(self.k.powi(n as i32 + 1) / (2.0 * PI.powi(n as i32 + 1)) * integral)
    }

    /// d_x K(x, y)|_{y=x} = Φ'(1) Σ_j x̄_j dz_j.
    pub fn grad_diag(&self, x: &SpherePoint) -> Covector {
        let d1 = self.sums[1];
        let a: Vec<C64> = x.z().iter().map(|c| c.conj() * d1).collect();
        Covector::from_dz(&a)
    }

    /// d_x K(x, y) at a fixed y: Φ'(⟨x,y⟩) Σ_j ȳ_j dz_j.
    pub fn grad_x(&self, x: &SpherePoint, y: &SpherePoint) -> Covector {
        let d1 = self.phi_derivs(herm(x.z(), y.z()))[1];
        let a: Vec<C64> = y.z().iter().map(|c| c.conj() * d1).collect();
        Covector::from_dz(&a)
    }

    /// Sesquilinear mixed derivative Z_x W̄_y K(x, y) for complexified
    /// vectors given by their holomorphic components:
    /// Φ''(s)⟨a_Z, y⟩⟨x, a_W⟩ + Φ'(s)⟨a_Z, a_W⟩ with s = ⟨x, y⟩.
    pub fn mixed(&self, x: &[C64], y: &[C64], az: &[C64], aw: &[C64]) -> C64 {
        let d = self.phi_derivs(herm(x, y));
        d[2] * herm(az, y) * herm(x, aw) + d[1] * herm(az, aw)
    }

    /// The mixed second derivative on the diagonal as a real-bilinear form
    /// V ⊗ W ↦ V_x W̄_y K(x, y)|_{y=x}.
    pub fn gradgrad_diag(&self, x: &SpherePoint) -> Bicovector {
        let nc = x.z().len();
        let dim = 2 * nc;
        let mut m = vec![C64::new(0.0, 0.0); dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                let (va, wb) = (basis_hol(nc, a), basis_hol(nc, b));
                m[a * dim + b] =
                    (self.sums[2] - self.sums[1]) * herm(&va, x.z()) * herm(x.z(), &wb)
                        + self.sums[1] * herm(&va, &wb);
            }
        }
        Bicovector { dim, m }
    }

    /// (b(s), b'(s), b''(s)) for the radial profile B(z) = b(|z|²).
    pub fn radial_derivs(&self, s: f64) -> [f64; 3] {
        let d = self.phi_derivs(C64::new(s, 0.0));
        [d[0].re, d[1].re, d[2].re]
    }

    /// B_k(z) = Σ w_m c_m |z|^{2m} at a ball point.
    pub fn b_eta(&self, z: &BallPoint) -> f64 {
        self.radial_derivs(z.norm_sqr())[0]
    }

    /// β_k(x) = d_x K(x, y)|_{y=x} / (2πi K(x, x)).
    pub fn beta_k(&self, x: &SpherePoint) -> Result<Covector> {
        let d = self.diag();
        if !(d > 0.0) {
            return Err(LabError::Precondition("vanishing kernel diagonal".into()));
        }
        let g = self.grad_diag(x);
        let scale = C64::new(0.0, 2.0 * PI * d);
        Ok(Covector(g.0.iter().map(|c| c / scale).collect()))
    }

    /// Hermitian matrix H_{jl} = ∂_j ∂̄_l log(c + B(z)), so that
    /// i∂∂̄ log(c + B) = i Σ H_{jl} dz_j ∧ dz̄_l. Row-major N×N.
    pub fn ddbar_log(&self, z: &[C64], c: f64) -> Result<Vec<C64>> {
        if !(c > 0.0) {
            return Err(LabError::InvalidParameter("ddbar_log needs c > 0".into()));
        }
        let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let [b, b1, b2] = self.radial_derivs(s);
        let g1 = b1 / (c + b);
        let g2 = b2 / (c + b) - g1 * g1;
        let nc = z.len();
        let mut h = vec![C64::new(0.0, 0.0); nc * nc];
        for j in 0..nc {
            for l in 0..nc {
                let mut v = z[j].conj() * z[l] * g2;
                if j == l {
                    v += g1;
                }
                h[j * nc + l] = v;
            }
        }
        Ok(h)
    }

    /// Radial profile of log(c + B) and its first two s-derivatives.
    pub fn log_profile(&self, s: f64, c: f64) -> [f64; 3] {
        let [b, b1, b2] = self.radial_derivs(s);
        let g1 = b1 / (c + b);
        [(c + b).ln(), g1, b2 / (c + b) - g1 * g1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_derivatives_match_finite_differences() {
        let table = Arc::new(DegreeKernelTable::build(1, 40).unwrap());
        let f = KernelField::new(table, CutoffSpec::default(), 32.0, Weighting::Eta).unwrap();
        let s = C64::new(0.3, 0.4);
        let h = 1e-5;
        let d = f.phi_derivs(s);
        let dp = f.phi_derivs(s + h);
        let dm = f.phi_derivs(s - h);
        assert!(((dp[0] - dm[0]) / (2.0 * h) - d[1]).norm() < 1e-6 * d[1].norm());
        assert!(((dp[1] - dm[1]) / (2.0 * h) - d[2]).norm() < 1e-6 * d[2].norm());
    }
}
