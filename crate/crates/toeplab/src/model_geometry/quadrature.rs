//! Quadrature on S^3, the unit ball in C^2, and parameterized zero-set charts.
//!
//! The sphere rule is a Hopf product rule: with z = (√u e^{iθ₁}, √(1−u) e^{iθ₂})
//! the round measure is dσ = ½ du dθ₁ dθ₂, so Gauss–Legendre in u and the
//! trapezoid rule in both angles integrate z^α z̄^β exactly whenever
//! |α|+|β| < 2·level.

use super::forms::{AmbientPolyForm, FormValue};
use super::{to_real, ContactData, SpherePoint};
use crate::error::{LabError, Result};
use crate::numerics::{gauss_legendre_on, ComplexSum};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::f64::consts::PI;

/// Target measure of a quadrature rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Round (Riemannian) measure σ of the unit sphere.
    RoundSphere,
    /// Contact volume dV_ξ = (2^{-n}/n!) ξ∧(dξ)^n.
    ContactVolume,
    /// Lebesgue measure of the unit ball.
    BallLebesgue,
    /// Parameter measure of an oriented curve (weights pair with 1-forms).
    Curve,
    /// Parameter measure of an oriented surface (weights pair with 2-forms).
    Surface,
}

/// Monte Carlo fallback for spheres where no product rule is provided.
#[derive(Clone, Copy, Debug)]
pub struct MonteCarloFallback {
    pub samples: usize,
    pub seed: u64,
}

/// Hopf product rule on S^3 (structured, used directly by fast evaluators).
#[derive(Clone, Debug)]
pub struct HopfRule {
    pub u: Vec<f64>,
    pub wu: Vec<f64>,
    pub n_theta: usize,
}

impl HopfRule {
    /// `level` Gauss–Legendre nodes in u and 2·level trapezoid nodes per angle.
    pub fn new(level: usize) -> Result<Self> {
        if level < 4 {
            return Err(LabError::InvalidParameter(format!(
                "sphere quadrature level must be ≥ 4 (got {level})"
            )));
        }
        Ok(Self::with_sizes(level, 2 * level))
    }

    /// Explicit node counts (u nodes, angle nodes per angle).
    pub fn with_sizes(n_u: usize, n_theta: usize) -> Self {
        let (u, wu) = gauss_legendre_on(n_u, 0.0, 1.0);
        Self { u, wu, n_theta }
    }

    pub fn len(&self) -> usize {
        self.u.len() * self.n_theta * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angle of trapezoid node p.
    pub fn theta(&self, p: usize) -> f64 {
        2.0 * PI * p as f64 / self.n_theta as f64
    }

    /// Round-measure weight of node (iu, ·, ·).
    pub fn weight(&self, iu: usize) -> f64 {
        let h = 2.0 * PI / self.n_theta as f64;
        0.5 * self.wu[iu] * h * h
    }

    /// Node (iu, p, q) as complex coordinates.
    pub fn point(&self, iu: usize, p: usize, q: usize) -> [C64; 2] {
        let a = self.u[iu].sqrt();
        let b = (1.0 - self.u[iu]).sqrt();
        [
            C64::from_polar(a, self.theta(p)),
            C64::from_polar(b, self.theta(q)),
        ]
    }

    /// Nodes in fixed (iu, p, q) order with their round-measure weights.
    pub fn nodes(&self) -> impl Iterator<Item = ([C64; 2], f64)> + '_ {
        let nt = self.n_theta;
        (0..self.u.len()).flat_map(move |iu| {
            let w = self.weight(iu);
            (0..nt).flat_map(move |p| (0..nt).map(move |q| (self.point(iu, p, q), w)))
        })
    }

    pub fn to_rule(&self, measure: Measure) -> QuadratureRule {
        let mut nodes = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        let mut ratio = Vec::with_capacity(self.len());
        for (z, w) in self.nodes() {
            let x = to_real(&z);
            let r = match measure {
                Measure::ContactVolume => {
                    ContactData::volume_density(&SpherePoint::new(z.to_vec()).expect("unit node"))
                }
                _ => 1.0,
            };
            nodes.push(x);
            weights.push(w * r);
            ratio.push(r);
        }
        QuadratureRule {
            measure,
            dim: 4,
            nodes,
            weights,
            ratio,
            frames: Vec::new(),
        }
    }
}

/// Product rule on the unit ball of C^2: radial nodes in s = |z|² times a
/// Hopf rule. dV = ¼ s ds du dθ₁ dθ₂.
#[derive(Clone, Debug)]
pub struct BallRule {
    /// Radial nodes in s = |z|².
    pub s: Vec<f64>,
    /// Radial weights including the Jacobian ½ s.
    pub ws: Vec<f64>,
    pub sphere: HopfRule,
}

impl BallRule {
    pub fn new(level: usize) -> Result<Self> {
        if level < 2 {
            return Err(LabError::InvalidParameter(format!(
                "ball quadrature level must be ≥ 2 (got {level})"
            )));
        }
        Ok(Self::with_panels(
            &[0.0, 1.0],
            level,
            HopfRule::with_sizes(level.max(2), 2 * level.max(2)),
        ))
    }

    /// Composite Gauss–Legendre in s over the given panel edges.
    pub fn with_panels(edges: &[f64], per_panel: usize, sphere: HopfRule) -> Self {
        let mut s = Vec::new();
        let mut ws = Vec::new();
        for w in edges.windows(2) {
            let (x, wt) = gauss_legendre_on(per_panel, w[0], w[1]);
            for (xi, wi) in x.into_iter().zip(wt) {
                s.push(xi);
                ws.push(0.5 * xi * wi);
            }
        }
        Self { s, ws, sphere }
    }

    /// Radial panels refined toward the boundary for functions that vary on
    /// the scale 1/k in s near |z| = 1.
    pub fn boundary_layer(k: f64, per_panel: usize, sphere: HopfRule) -> Self {
        let width = 1.0 / (2.0 * k);
        let layer = (60.0 / k).min(1.0);
        let mut edges = vec![0.0];
        // geometric panels on the inner region
        let inner = 1.0 - layer;
        if inner > 0.0 {
            let mut e = 0.5 * inner;
            let mut stack = vec![inner];
            while e > 1e-3 {
                stack.push(e);
                e *= 0.5;
            }
            stack.reverse();
            edges.extend(stack);
        }
        let start = *edges.last().expect("edges");
        let n = ((1.0 - start) / width).ceil() as usize;
        for i in 1..=n {
            edges.push(start + (1.0 - start) * i as f64 / n as f64);
        }
        Self::with_panels(&edges, per_panel, sphere)
    }

    pub fn len(&self) -> usize {
        self.s.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in fixed (radial, iu, p, q) order with Lebesgue weights.
    pub fn nodes(&self) -> impl Iterator<Item = ([C64; 2], f64)> + '_ {
        self.s.iter().zip(&self.ws).flat_map(move |(s, ws)| {
            let r = s.sqrt();
            self.sphere
                .nodes()
                .map(move |(z, w)| ([z[0] * r, z[1] * r], w * ws))
        })
    }

    pub fn to_rule(&self) -> QuadratureRule {
        let mut nodes = Vec::with_capacity(self.len());
        let mut weights = Vec::with_capacity(self.len());
        for (z, w) in self.nodes() {
            nodes.push(to_real(&z));
            weights.push(w);
        }
        let ratio = vec![1.0; nodes.len()];
        QuadratureRule {
            measure: Measure::BallLebesgue,
            dim: 4,
            nodes,
            weights,
            ratio,
            frames: Vec::new(),
        }
    }
}

/// Parameterized zero-set charts in C^2 (complex lines intersected with the
/// sphere or ball), oriented by the complex orientation.
#[derive(Clone, Copy, Debug)]
pub enum Chart {
    /// {z_fixed = value, |z_other| = radius}, positively oriented circle.
    Circle {
        fixed: usize,
        value: C64,
        radius: f64,
    },
    /// {z_fixed = value, |z_other| ≤ radius} with the complex orientation.
    Disc {
        fixed: usize,
        value: C64,
        radius: f64,
    },
}

/// A generic node/weight list with optional oriented tangent frames.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub measure: Measure,
    /// Ambient real dimension.
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Density of the target measure relative to the measure used for
    /// pairing top-degree forms (identically 1 except for ContactVolume).
    pub ratio: Vec<f64>,
    /// Oriented tangent frames (curve and surface rules only).
    pub frames: Vec<Vec<Vec<f64>>>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Total mass Σ w.
    pub fn total(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .collect::<crate::numerics::NeumaierSum>()
            .value()
    }

    /// ∫ f against the target measure, summed in node order.
    pub fn integrate<F: Fn(&[f64]) -> C64>(&self, f: F) -> C64 {
        let mut s = ComplexSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(f(x) * *w);
        }
        s.value()
    }

    /// Pairing of a form of the matching degree with the rule's domain.
    pub fn pair(&self, form: &AmbientPolyForm) -> Result<C64> {
        let expected = match self.measure {
            Measure::RoundSphere | Measure::ContactVolume => self.dim - 1,
            Measure::BallLebesgue => self.dim,
            Measure::Curve => 1,
            Measure::Surface => 2,
        };
        form.expect_degree(expected)?;
        let mut s = ComplexSum::new();
        for (i, x) in self.nodes.iter().enumerate() {
            let v: FormValue = form.eval(x);
            let dens = match self.measure {
                Measure::RoundSphere | Measure::ContactVolume => {
                    v.sphere_density(x) / self.ratio[i]
                }
                Measure::BallLebesgue => v.volume_density(),
                Measure::Curve | Measure::Surface => {
                    let fr: Vec<&[f64]> = self.frames[i].iter().map(|f| f.as_slice()).collect();
                    v.on_vectors(&fr)
                }
            };
            s.add(dens * self.weights[i]);
        }
        Ok(s.value())
    }
}

/// Pairing of `form` with the domain of `rule` (free-function form).
pub fn form_pair(form: &AmbientPolyForm, rule: &QuadratureRule) -> Result<C64> {
    rule.pair(form)
}

/// Total round-measure mass of S^{2n+1}: 2π^{n+1}/n!.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32 + 1) / (1..=n).map(|j| j as f64).product::<f64>()
}

/// Quadrature on S^{2n+1}. Deterministic Hopf product rule for n = 1;
/// for n ≥ 2 only with an explicit Monte Carlo fallback (equal weights).
pub fn sphere_quadrature(
    n: usize,
    level: usize,
    measure: Measure,
    fallback: Option<MonteCarloFallback>,
) -> Result<QuadratureRule> {
    if !matches!(measure, Measure::RoundSphere | Measure::ContactVolume) {
        return Err(LabError::InvalidParameter(
            "sphere rule needs a sphere measure".into(),
        ));
    }
    if n == 1 {
        return Ok(HopfRule::new(level)?.to_rule(measure));
    }
    let fb = fallback.ok_or(LabError::UnsupportedDimension(n))?;
    if fb.samples == 0 {
        return Err(LabError::InvalidParameter(
            "Monte Carlo fallback needs samples".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(fb.seed);
    let w = sphere_area(n) / fb.samples as f64;
    let mut nodes = Vec::with_capacity(fb.samples);
    let mut weights = Vec::with_capacity(fb.samples);
    let mut ratio = Vec::with_capacity(fb.samples);
    for _ in 0..fb.samples {
        let x = SpherePoint::random(n, &mut rng);
        let r = match measure {
            Measure::ContactVolume => ContactData::volume_density(&x),
            _ => 1.0,
        };
        nodes.push(x.real());
        weights.push(w * r);
        ratio.push(r);
    }
    Ok(QuadratureRule {
        measure,
        dim: 2 * (n + 1),
        nodes,
        weights,
        ratio,
        frames: Vec::new(),
    })
}

/// Product radial × Hopf rule on the unit ball of C^2.
pub fn ball_quadrature(level: usize) -> Result<QuadratureRule> {
    Ok(BallRule::new(level)?.to_rule())
}

/// Trapezoid (circle) or polar Gauss–Legendre × trapezoid (disc) rule on a
/// chart of a complex line in C^2.
pub fn curve_quadrature(chart: Chart, level: usize) -> Result<QuadratureRule> {
    if level < 2 {
        return Err(LabError::InvalidParameter(format!(
            "chart quadrature level must be ≥ 2 (got {level})"
        )));
    }
    let place = |fixed: usize, value: C64, other: C64| -> [C64; 2] {
        if fixed == 0 {
            [value, other]
        } else {
            [other, value]
        }
    };
    let embed_vec = |fixed: usize, d: C64| -> Vec<f64> {
        let z = C64::new(0.0, 0.0);
        to_real(&place(fixed, z, d))
    };
    match chart {
        Chart::Circle {
            fixed,
            value,
            radius,
        } => {
            check_fixed(fixed)?;
            let m = 8 * level;
            let h = 2.0 * PI / m as f64;
            let mut rule = QuadratureRule {
                measure: Measure::Curve,
                dim: 4,
                nodes: Vec::new(),
                weights: Vec::new(),
                ratio: Vec::new(),
                frames: Vec::new(),
            };
            for j in 0..m {
                let t = h * j as f64;
                let e = C64::from_polar(1.0, t);
                rule.nodes.push(to_real(&place(fixed, value, e * radius)));
                rule.frames
                    .push(vec![embed_vec(fixed, e * C64::i() * radius)]);
                rule.weights.push(h);
                rule.ratio.push(1.0);
            }
            Ok(rule)
        }
        Chart::Disc {
            fixed,
            value,
            radius,
        } => {
            check_fixed(fixed)?;
            let (rho, wr) = gauss_legendre_on(level, 0.0, radius);
            let m = 4 * level;
            let h = 2.0 * PI / m as f64;
            let mut rule = QuadratureRule {
                measure: Measure::Surface,
                dim: 4,
                nodes: Vec::new(),
                weights: Vec::new(),
                ratio: Vec::new(),
                frames: Vec::new(),
            };
            for (r, w) in rho.iter().zip(&wr) {
                for j in 0..m {
                    let t = h * j as f64;
                    let e = C64::from_polar(1.0, t);
                    rule.nodes.push(to_real(&place(fixed, value, e * *r)));
                    rule.frames.push(vec![
                        embed_vec(fixed, e),
                        embed_vec(fixed, e * C64::i() * *r),
                    ]);
                    rule.weights.push(w * h);
                    rule.ratio.push(1.0);
                }
            }
            Ok(rule)
        }
    }
}

fn check_fixed(fixed: usize) -> Result<()> {
    if fixed > 1 {
        return Err(LabError::InvalidParameter(
            "charts are defined in C^2 only".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_mass_and_beta_integral() {
        let r = sphere_quadrature(1, 16, Measure::RoundSphere, None).unwrap();
        assert!((r.total() - 2.0 * PI * PI).abs() < 1e-12);
        let v = r.integrate(|x| C64::new(x[0] * x[0] + x[1] * x[1], 0.0));
        assert!((v.re - PI * PI).abs() < 1e-10);
    }

    #[test]
    fn ball_volume() {
        let r = ball_quadrature(16).unwrap();
        assert!((r.total() - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn disc_area() {
        let r = curve_quadrature(
            Chart::Disc {
                fixed: 0,
                value: C64::new(0.5, 0.0),
                radius: 0.75f64.sqrt(),
            },
            16,
        )
        .unwrap();
        let psi =
            &(&AmbientPolyForm::dz(4, 1) * &AmbientPolyForm::dzbar(4, 1)) * C64::new(0.0, 0.5);
        let a = r.pair(&psi).unwrap();
        assert!((a.re - 0.75 * PI).abs() < 1e-10, "{a}");
    }
}
