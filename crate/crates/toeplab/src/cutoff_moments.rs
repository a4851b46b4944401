//! Cutoff functions χ, η = χ², their semiclassical rescalings, and the
//! moments τ_j(η) = ∫ t^{n+j} η(t) dt with the derived mean and variance.

use crate::error::{LabError, Result};
use crate::numerics::adaptive_integrate;
use serde::{Deserialize, Serialize};

/// Shape of the cutoff profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffShape {
    /// exp(−s/(1−v²)) with v the affine image of (δ₁, δ₂) on (−1, 1).
    SmoothBump,
    /// The indicator of [δ₁, δ₂]; only for exact-value sanity checks.
    Indicator,
}

/// A cutoff χ supported in [δ₁, δ₂].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffSpec {
    pub delta1: f64,
    pub delta2: f64,
    pub shape: CutoffShape,
    /// Bump sharpness s (peak value exp(−s)); ignored by the indicator.
    pub sharpness: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            delta1: 0.25,
            delta2: 0.75,
            shape: CutoffShape::SmoothBump,
            sharpness: 1.0,
        }
    }
}

impl CutoffSpec {
    pub fn new(delta1: f64, delta2: f64, shape: CutoffShape, sharpness: f64) -> Result<Self> {
        let spec = Self {
            delta1,
            delta2,
            shape,
            sharpness,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn smooth(delta1: f64, delta2: f64) -> Result<Self> {
        Self::new(delta1, delta2, CutoffShape::SmoothBump, 1.0)
    }

    pub fn indicator(delta1: f64, delta2: f64) -> Result<Self> {
        Self::new(delta1, delta2, CutoffShape::Indicator, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_lower = match self.shape {
            CutoffShape::SmoothBump => self.delta1 > 0.0,
            CutoffShape::Indicator => self.delta1 >= 0.0,
        };
        if !(ok_lower && self.delta1 < self.delta2 && self.delta2.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "cutoff support ({}, {}) must satisfy 0 < δ₁ < δ₂ < ∞",
                self.delta1, self.delta2
            )));
        }
        if self.shape == CutoffShape::SmoothBump && !(self.sharpness > 0.0) {
            return Err(LabError::InvalidParameter(
                "bump sharpness must be positive".into(),
            ));
        }
        Ok(())
    }

    /// χ(t).
    pub fn chi(&self, t: f64) -> f64 {
        match self.shape {
            CutoffShape::Indicator => {
                if t >= self.delta1 && t <= self.delta2 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffShape::SmoothBump => {
                if t <= self.delta1 || t >= self.delta2 {
                    return 0.0;
                }
                let v = (2.0 * t - self.delta1 - self.delta2) / (self.delta2 - self.delta1);
                let d = 1.0 - v * v;
                if d <= 0.0 {
                    0.0
                } else {
                    (-self.sharpness / d).exp()
                }
            }
        }
    }

    /// χ_k(t) = χ(t/k).
    pub fn chi_k(&self, t: f64, k: f64) -> f64 {
        self.chi(t / k)
    }

    /// η(t) = χ(t)².
    pub fn eta(&self, t: f64) -> f64 {
        let c = self.chi(t);
        c * c
    }

    /// Peak value of the profile.
    pub fn peak(&self) -> f64 {
        self.chi(0.5 * (self.delta1 + self.delta2))
    }

    /// The same profile rescaled to t ↦ χ(t/s).
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            delta1: self.delta1 * s,
            delta2: self.delta2 * s,
            ..*self
        }
    }
}

/// τ_j(η) = ∫ t^{n+j} η(t) dt, adaptive quadrature to 1e−12 (absolute,
/// relative to the peak scale).
pub fn tau_j(spec: &CutoffSpec, j: u32, n: usize) -> Result<f64> {
    spec.validate()?;
    let p = (n as i32) + j as i32;
    let (a, b) = (spec.delta1, spec.delta2);
    let value = match spec.shape {
        CutoffShape::Indicator => (b.powi(p + 1) - a.powi(p + 1)) / (p as f64 + 1.0),
        CutoffShape::SmoothBump => {
            let f = |t: f64| t.powi(p) * spec.eta(t);
            let (v, _) = adaptive_integrate(f, a, b, 1e-14, 20_000);
            v
        }
    };
    if !value.is_finite() {
        return Err(LabError::InvalidParameter(
            "non-finite moment integrand".into(),
        ));
    }
    Ok(value)
}

/// The moment data (τ₀, τ₁, τ₂, mv, var) of η = χ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub mv: f64,
    pub var: f64,
}

pub fn moments(spec: &CutoffSpec, n: usize) -> Result<Moments> {
    let tau0 = tau_j(spec, 0, n)?;
    if tau0 <= 0.0 {
        return Err(LabError::InvalidParameter("τ₀(η) vanishes".into()));
    }
    let tau1 = tau_j(spec, 1, n)?;
    let tau2 = tau_j(spec, 2, n)?;
    let mv = tau1 / tau0;
    Ok(Moments {
        tau0,
        tau1,
        tau2,
        mv,
        var: tau2 / tau0 - mv * mv,
    })
}

/// mv(η) = τ₁/τ₀.
pub fn mv(spec: &CutoffSpec, n: usize) -> Result<f64> {
    Ok(moments(spec, n)?.mv)
}

/// var(η) = τ₂/τ₀ − mv².
pub fn var(spec: &CutoffSpec, n: usize) -> Result<f64> {
    Ok(moments(spec, n)?.var)
}

/// ∫ t^p χ(t) dt for the χ-weighted (rather than η-weighted) moments.
pub fn chi_moment(spec: &CutoffSpec, p: i32) -> f64 {
    match spec.shape {
        CutoffShape::Indicator => {
            (spec.delta2.powi(p + 1) - spec.delta1.powi(p + 1)) / (p as f64 + 1.0)
        }
        CutoffShape::SmoothBump => {
            adaptive_integrate(
                |t| t.powi(p) * spec.chi(t),
                spec.delta1,
                spec.delta2,
                1e-14,
                20_000,
            )
            .0
        }
    }
}
