//! Pairings of test forms with zero sets: the current 𝒞_f(ψ), the closed
//! Lelong–Poincaré pairing (Z_f, ψ) = 𝒞_f(dψ) on the sphere, the three-term
//! boundary formula on the ball, direct zero-set integration for a catalog of
//! explicit functions, and fixed-node grid pairings for Monte Carlo.

use crate::error::{LabError, Result};
use crate::model_geometry::forms::AmbientPolyForm;
use crate::model_geometry::{
    curve_quadrature, to_real, BallRule, Chart, FormValue, HopfRule, SpherePoint,
};
use crate::numerics::{gauss_legendre_on, neville_to_zero, ComplexSum};
use crate::random_ensemble::{
    regularity_filter, GridSamples, HolomorphicFunction, HopfGridEvaluator, Polynomial,
};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Controls for the globally adaptive tensor Gauss–Legendre cubature.
#[derive(Clone, Debug, PartialEq)]
pub struct CubatureOptions {
    /// Gauss–Legendre order per dimension.
    pub order: usize,
    pub tol_rel: f64,
    pub tol_abs: f64,
    pub max_cells: usize,
    /// Initial number of equal cells per dimension.
    pub base: Vec<usize>,
}

impl CubatureOptions {
    pub fn sphere() -> Self {
        Self {
            order: 5,
            tol_rel: 1e-7,
            tol_abs: 1e-10,
            max_cells: 40_000,
            base: vec![4, 8, 8],
        }
    }

    pub fn ball() -> Self {
        Self {
            order: 4,
            tol_rel: 1e-6,
            tol_abs: 1e-9,
            max_cells: 6_000,
            base: vec![2, 2, 4, 4],
        }
    }
}

/// A rectangular cell with its estimates.
#[derive(Clone, Debug)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: C64,
    err: f64,
    split_dim: usize,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive cubature.
#[derive(Clone, Debug)]
pub struct CubatureResult {
    pub value: C64,
    pub err: f64,
    pub cells: usize,
    pub converged: bool,
    /// Final partition (reusable as the starting partition of a harder run).
    pub partition: Vec<(Vec<f64>, Vec<f64>)>,
}

struct TensorRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn tensor_sum<F: Fn(&[f64]) -> C64>(f: &F, rule: &TensorRule, lo: &[f64], hi: &[f64]) -> C64 {
    let d = lo.len();
    let p = rule.x.len();
    let total = p.pow(d as u32);
    let mut s = ComplexSum::new();
    let mut pt = vec![0.0; d];
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    for idx in 0..total {
        let mut r = idx;
        let mut w = vol;
        for j in 0..d {
            let i = r % p;
            r /= p;
            pt[j] = lo[j] + (hi[j] - lo[j]) * rule.x[i];
            w *= rule.w[i];
        }
        s.add(f(&pt) * w);
    }
    s.value()
}

fn assess<F: Fn(&[f64]) -> C64>(f: &F, rule: &TensorRule, lo: Vec<f64>, hi: Vec<f64>) -> Cell {
    let q = tensor_sum(f, rule, &lo, &hi);
    let mut best = (0, -1.0, q);
    let mut total_err = 0.0;
    for d in 0..lo.len() {
        let mid = 0.5 * (lo[d] + hi[d]);
        let (mut h1, mut l2) = (hi.clone(), lo.clone());
        h1[d] = mid;
        l2[d] = mid;
        let halves = tensor_sum(f, rule, &lo, &h1) + tensor_sum(f, rule, &l2, &hi);
        let e = (halves - q).norm();
        total_err += e;
        if e > best.1 {
            best = (d, e, halves);
        }
    }
    Cell {
        lo,
        hi,
        value: best.2,
        err: total_err,
        split_dim: best.0,
    }
}

/// Globally adaptive cubature of `f` over the box [lo, hi] starting from a
/// given partition. The cell with the largest error is bisected along the
/// dimension whose halving changes its estimate most.
pub fn adaptive_cubature_from<F: Fn(&[f64]) -> C64>(
    f: &F,
    partition: Vec<(Vec<f64>, Vec<f64>)>,
    opts: &CubatureOptions,
) -> CubatureResult {
    let (x, w) = gauss_legendre_on(opts.order, 0.0, 1.0);
    let rule = TensorRule { x, w };
    let mut heap = BinaryHeap::new();
    let mut err_sum = 0.0;
    for (lo, hi) in partition {
        let c = assess(f, &rule, lo, hi);
        err_sum += c.err;
        heap.push(c);
    }
    let target = |v: C64| opts.tol_abs.max(opts.tol_rel * v.norm());
    let mut converged = false;
    loop {
        let value: C64 = heap.iter().map(|c| c.value).sum();
        if err_sum <= target(value) {
            converged = true;
            break;
        }
        if heap.len() >= opts.max_cells {
            break;
        }
        let Some(c) = heap.pop() else { break };
        err_sum -= c.err;
        let d = c.split_dim;
        let mid = 0.5 * (c.lo[d] + c.hi[d]);
        let (mut h1, mut l2) = (c.hi.clone(), c.lo.clone());
        h1[d] = mid;
        l2[d] = mid;
        let a = assess(f, &rule, c.lo, h1);
        let b = assess(f, &rule, l2, c.hi);
        err_sum += a.err + b.err;
        heap.push(a);
        heap.push(b);
        if err_sum < 0.0 {
            err_sum = heap.iter().map(|c| c.err).sum();
        }
    }
    // Deterministic final reduction in lexicographic cell order.
    let mut cells = heap.into_vec();
    cells.sort_by(|a, b| {
        a.lo.iter()
            .zip(&b.lo)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let mut s = ComplexSum::new();
    let mut e = 0.0;
    for c in &cells {
        s.add(c.value);
        e += c.err;
    }
    CubatureResult {
        value: s.value(),
        err: e,
        cells: cells.len(),
        converged,
        partition: cells.into_iter().map(|c| (c.lo, c.hi)).collect(),
    }
}

/// Uniform starting partition of [lo, hi] with `base[d]` cells per dimension.
pub fn uniform_partition(lo: &[f64], hi: &[f64], base: &[usize]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    let total: usize = base.iter().product();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut r = idx;
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        for j in 0..d {
            let i = r % base[j];
            r /= base[j];
            let h = (hi[j] - lo[j]) / base[j] as f64;
            a[j] = lo[j] + h * i as f64;
            b[j] = a[j] + h;
        }
        out.push((a, b));
    }
    out
}

pub fn adaptive_cubature<F: Fn(&[f64]) -> C64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    opts: &CubatureOptions,
) -> CubatureResult {
    adaptive_cubature_from(f, uniform_partition(lo, hi, &opts.base), opts)
}

/// Regularization schedule and cubature controls for singular pairings.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationOptions {
    /// δ values (relative to the mean square of the function), decreasing.
    pub deltas: Vec<f64>,
    pub cubature: CubatureOptions,
    /// Threshold of the regularity filter.
    pub regularity_threshold: f64,
}

impl Default for RegularizationOptions {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            cubature: CubatureOptions::sphere(),
            regularity_threshold: 1e-6,
        }
    }
}

/// A regularized pairing extrapolated to δ → 0.
#[derive(Clone, Debug, Serialize)]
pub struct PairingEstimate {
    pub value: C64,
    /// Extrapolation discrepancy plus the summed cubature error estimates.
    pub err_est: f64,
    /// (δ, regularized value) along the schedule.
    pub schedule: Vec<(f64, C64)>,
    pub cells: usize,
    pub converged: bool,
}

impl PairingEstimate {
    fn exact(value: C64, err: f64, cells: usize, converged: bool) -> Self {
        Self {
            value,
            err_est: err,
            schedule: Vec::new(),
            cells,
            converged,
        }
    }

    /// Fails if the error estimate exceeds `tol`.
    pub fn require(&self, tol: f64) -> Result<C64> {
        if self.err_est > tol {
            return Err(LabError::Extrapolation {
                residual: self.err_est,
                tol,
            });
        }
        Ok(self.value)
    }
}

/// Hopf box (u, θ₁, θ₂) ∈ [0,1]×[0,2π]² with dσ = ½ du dθ₁ dθ₂.
fn hopf_box() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, 0.0, 0.0], vec![1.0, TWO_PI, TWO_PI])
}

/// Ball box (s, u, θ₁, θ₂) with s = |z|² and dV = ¼ s ds du dθ₁ dθ₂.
fn ball_box() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, 0.0, 0.0, 0.0], vec![1.0, 1.0, TWO_PI, TWO_PI])
}

fn hopf_real(p: &[f64]) -> Vec<f64> {
    SpherePoint::hopf(p[0], p[1], p[2]).real()
}

fn ball_real(p: &[f64]) -> Vec<f64> {
    let r = p[0].sqrt();
    hopf_real(&p[1..]).into_iter().map(|v| v * r).collect()
}

fn complex_of(x: &[f64]) -> [C64; 2] {
    [C64::new(x[0], x[1]), C64::new(x[2], x[3])]
}

/// Mean of |f|² over the sphere (scale for δ).
fn mean_square<F: HolomorphicFunction>(f: &F) -> f64 {
    let rule = HopfRule::with_sizes(12, 24);
    let mut s = 0.0;
    let mut w = 0.0;
    for (z, wt) in rule.nodes() {
        s += f.value(&z).norm_sqr() * wt;
        w += wt;
    }
    (s / w).max(f64::MIN_POSITIVE)
}

fn check_two_vars<F: HolomorphicFunction>(f: &F) -> Result<()> {
    if f.n_vars() != 2 {
        return Err(LabError::UnsupportedDimension(f.n_vars() - 1));
    }
    Ok(())
}

/// True when the real parts along a δ schedule move in one direction.
/// For log(|f|²+δ) against a sign-definite density this must hold, so a
/// violation flags a cubature or bookkeeping error.
pub fn schedule_monotone(schedule: &[(f64, C64)]) -> bool {
    let steps: Vec<f64> = schedule.windows(2).map(|w| w[1].1.re - w[0].1.re).collect();
    steps.iter().all(|d| *d >= 0.0) || steps.iter().all(|d| *d <= 0.0)
}

/// Runs a regularized family over the schedule, reusing each partition as
/// the start of the next (smaller-δ) run, and extrapolates in √δ.
fn regularized_family<G>(
    integrand: G,
    lo: &[f64],
    hi: &[f64],
    opts: &RegularizationOptions,
    cub: &CubatureOptions,
) -> PairingEstimate
where
    G: Fn(&[f64], f64) -> C64,
{
    let mut partition = uniform_partition(lo, hi, &cub.base);
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut cub_err: f64 = 0.0;
    let mut cells = 0;
    let mut converged = true;
    let mut schedule = Vec::new();
    for &delta in &opts.deltas {
        let r = adaptive_cubature_from(&|p: &[f64]| integrand(p, delta), partition, cub);
        partition = r.partition;
        cub_err = cub_err.max(r.err);
        cells = cells.max(r.cells);
        converged &= r.converged;
        ts.push(delta.sqrt());
        ys.push(r.value);
        schedule.push((delta, r.value));
    }
    let (value, ex_err) = neville_to_zero(&ts, &ys);
    // Transversal zeros make the regularization error behave like δ·log δ,
    // which the √δ extrapolant does not model; the distance to the
    // least-regularized sample keeps the error bar honest.
    let tail = ys.last().map_or(0.0, |y| (value - y).norm());
    PairingEstimate {
        value,
        err_est: ex_err.max(tail) + cub_err,
        schedule,
        cells,
        converged,
    }
}

/// 𝒞_f(ψ) = (1/2πi)∫_{S³} df/f ∧ ψ for a 2-form ψ, via the regularization
/// f̄/(|f|²+δ) and Richardson extrapolation in √δ.
pub fn c_f<F: HolomorphicFunction>(
    f: &F,
    psi: &AmbientPolyForm,
    opts: &RegularizationOptions,
) -> Result<PairingEstimate> {
    check_two_vars(f)?;
    psi.expect_degree(2)?;
    let scale = mean_square(f);
    let (lo, hi) = hopf_box();
    let integrand = |p: &[f64], delta: f64| -> C64 {
        let x = hopf_real(p);
        let z = complex_of(&x);
        let (v, g) = f.value_grad(&z);
        let w = FormValue::from_dz(&g)
            .wedge(&psi.eval(&x))
            .sphere_density(&x);
        w * v.conj() / (v.norm_sqr() + delta * scale) * 0.5
    };
    let mut est = regularized_family(integrand, &lo, &hi, opts, &opts.cubature);
    let k = C64::new(0.0, TWO_PI).inv();
    est.value *= k;
    est.err_est /= TWO_PI;
    for s in est.schedule.iter_mut() {
        s.1 *= k;
    }
    Ok(est)
}

/// (Z_f, ψ) = 𝒞_f(dψ) for a 1-form ψ on the sphere.
pub fn divisor_pairing_closed<F: HolomorphicFunction>(
    f: &F,
    psi: &AmbientPolyForm,
    opts: &RegularizationOptions,
) -> Result<PairingEstimate> {
    psi.expect_degree(1)?;
    c_f(f, &psi.d(), opts)
}

/// Regularity of u with respect to the boundary sphere, checked on a Hopf
/// grid of boundary values.
pub fn boundary_regularity(u: &Polynomial, threshold: f64) -> Result<()> {
    let level = (u.degree() as usize + 8).max(16);
    let rule = HopfRule::with_sizes(level, 2 * level);
    let eval = HopfGridEvaluator::new(rule.clone());
    let samples = eval.evaluate(u, 1.0)?;
    let rep = regularity_filter(u, &samples, &rule, threshold);
    if rep.accepted {
        Ok(())
    } else {
        Err(LabError::Regularity(rep.reason.unwrap_or_default()))
    }
}

/// The three boundary-formula terms, reported separately.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryPairing {
    pub total: PairingEstimate,
    /// −∫_{bD} ∂u/(2u) ∧ ψ.
    pub term_boundary_dlog: PairingEstimate,
    /// −∫_{bD} log|u| ∂̄ψ.
    pub term_boundary_log: PairingEstimate,
    /// ∫_D log|u| ∂∂̄ψ.
    pub term_interior_log: PairingEstimate,
}

/// (Z_u, ψ) for holomorphic u on the ball and a (1,1)-form ψ:
/// (i/π)[−∫_{bD} ∂u/(2u)∧ψ − ∫_{bD} log|u| ∂̄ψ + ∫_D log|u| ∂∂̄ψ].
pub fn divisor_pairing_boundary(
    u: &Polynomial,
    psi: &AmbientPolyForm,
    opts: &RegularizationOptions,
    ball_cubature: &CubatureOptions,
) -> Result<BoundaryPairing> {
    check_two_vars(u)?;
    psi.expect_degree(2)?;
    if u.is_zero() {
        return Err(LabError::Regularity("u vanishes identically".into()));
    }
    boundary_regularity(u, opts.regularity_threshold)?;
    let scale = mean_square(u);
    let dbar = psi.delbar();
    let ddbar = dbar.del();
    let (slo, shi) = hopf_box();

    let t1 = {
        let f = |p: &[f64], delta: f64| -> C64 {
            let x = hopf_real(p);
            let (v, g) = u.value_grad(&complex_of(&x));
            let w = FormValue::from_dz(&g)
                .wedge(&psi.eval(&x))
                .sphere_density(&x);
            -w * v.conj() / (v.norm_sqr() + delta * scale) * 0.25
        };
        regularized_family(f, &slo, &shi, opts, &opts.cubature)
    };
    let t2 = if dbar.is_zero() {
        PairingEstimate::exact(C64::new(0.0, 0.0), 0.0, 0, true)
    } else {
        let f = |p: &[f64], delta: f64| -> C64 {
            let x = hopf_real(p);
            let v = u.value(&complex_of(&x));
            -dbar.eval(&x).sphere_density(&x) * (0.5 * (v.norm_sqr() + delta * scale).ln()) * 0.5
        };
        regularized_family(f, &slo, &shi, opts, &opts.cubature)
    };
    let t3 = if ddbar.is_zero() {
        PairingEstimate::exact(C64::new(0.0, 0.0), 0.0, 0, true)
    } else {
        let (blo, bhi) = ball_box();
        let f = |p: &[f64], delta: f64| -> C64 {
            let x = ball_real(p);
            let v = u.value(&complex_of(&x));
            ddbar.eval(&x).volume_density()
                * (0.5 * (v.norm_sqr() + delta * scale).ln())
                * (0.25 * p[0])
        };
        regularized_family(f, &blo, &bhi, opts, ball_cubature)
    };
    let pref = C64::new(0.0, 1.0 / PI);
    let total = PairingEstimate {
        value: (t1.value + t2.value + t3.value) * pref,
        err_est: (t1.err_est + t2.err_est + t3.err_est) / PI,
        schedule: t1
            .schedule
            .iter()
            .enumerate()
            .map(|(i, (d, v))| {
                let a = t2.schedule.get(i).map_or(C64::new(0.0, 0.0), |s| s.1);
                let b = t3.schedule.get(i).map_or(C64::new(0.0, 0.0), |s| s.1);
                (*d, (v + a + b) * pref)
            })
            .collect(),
        cells: t1.cells + t2.cells + t3.cells,
        converged: t1.converged && t2.converged && t3.converged,
    };
    Ok(BoundaryPairing {
        total,
        term_boundary_dlog: t1,
        term_boundary_log: t2,
        term_interior_log: t3,
    })
}

/// Functions whose zero sets are known explicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogFunction {
    Z1,
    Z2,
    /// z₁ − c.
    Z1MinusC(C64),
    Z1Z2,
    /// 2 + z₁ (no zeros on the closed ball).
    TwoPlusZ1,
}

impl CatalogFunction {
    /// Looks up `z1`, `z2`, `z1*z2`, `2+z1`, `z1-<c>` (real c).
    pub fn by_name(name: &str) -> Result<Self> {
        let s: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "z1" => Ok(Self::Z1),
            "z2" => Ok(Self::Z2),
            "z1*z2" | "z1z2" => Ok(Self::Z1Z2),
            "2+z1" => Ok(Self::TwoPlusZ1),
            _ => s
                .strip_prefix("z1-")
                .and_then(|c| c.parse::<f64>().ok())
                .map(|c| Self::Z1MinusC(C64::new(c, 0.0)))
                .ok_or_else(|| LabError::CatalogMiss(name.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Z1 => "z1".into(),
            Self::Z2 => "z2".into(),
            Self::Z1MinusC(c) => format!("z1-{}", c.re),
            Self::Z1Z2 => "z1*z2".into(),
            Self::TwoPlusZ1 => "2+z1".into(),
        }
    }

    pub fn polynomial(&self) -> Polynomial {
        let z1 = Polynomial::coordinate(2, 0);
        let z2 = Polynomial::coordinate(2, 1);
        match self {
            Self::Z1 => z1,
            Self::Z2 => z2,
            Self::Z1MinusC(c) => z1.add(&Polynomial::constant(2, -c)),
            Self::Z1Z2 => z1.mul(&z2),
            Self::TwoPlusZ1 => z1.add(&Polynomial::constant(2, C64::new(2.0, 0.0))),
        }
    }

    /// Components of the zero set as complex lines {z_fixed = value}.
    fn components(&self) -> Vec<(usize, C64)> {
        let zero = C64::new(0.0, 0.0);
        match self {
            Self::Z1 => vec![(0, zero)],
            Self::Z2 => vec![(1, zero)],
            Self::Z1MinusC(c) => vec![(0, *c)],
            Self::Z1Z2 => vec![(0, zero), (1, zero)],
            Self::TwoPlusZ1 => vec![],
        }
    }
}

/// Where a zero set is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroDomain {
    /// {f = 0} ∩ S³ (curves; ψ a 1-form).
    Sphere,
    /// {f = 0} ∩ D (discs; ψ a 2-form).
    Ball,
}

/// ∫_{{f=0}} ψ by direct parameterization of the catalog zero set.
pub fn zero_set_direct(
    f: CatalogFunction,
    domain: ZeroDomain,
    psi: &AmbientPolyForm,
    level: usize,
) -> Result<C64> {
    let mut s = C64::new(0.0, 0.0);
    for (fixed, value) in f.components() {
        let r2 = 1.0 - value.norm_sqr();
        if r2 <= 0.0 {
            continue;
        }
        let radius = r2.sqrt();
        let chart = match domain {
            ZeroDomain::Sphere => Chart::Circle {
                fixed,
                value,
                radius,
            },
            ZeroDomain::Ball => Chart::Disc {
                fixed,
                value,
                radius,
            },
        };
        s += curve_quadrature(chart, level)?.pair(psi)?;
    }
    Ok(s)
}

/// JSON record of one pairing.
#[derive(Clone, Debug, Serialize)]
pub struct PairingRecord {
    pub function: String,
    pub psi_id: String,
    pub value_re: f64,
    pub value_im: f64,
    pub err_est: f64,
    pub method: String,
}

impl PairingRecord {
    pub fn new(function: &str, psi_id: &str, value: C64, err_est: f64, method: &str) -> Self {
        Self {
            function: function.into(),
            psi_id: psi_id.into(),
            value_re: value.re,
            value_im: value.im,
            err_est,
            method: method.into(),
        }
    }
}

/// Fixed-node pairings on a Hopf grid: for a 2-form ψ the node weights
/// P_j = w·dens(dx_{2j}∧ψ) + i·w·dens(dx_{2j+1}∧ψ), so that
/// Σ_nodes (Σ_j ∂_j f P_j)/f approximates ∫ df/f∧ψ.
#[derive(Clone, Debug)]
pub struct CrGridPairing {
    evaluator: HopfGridEvaluator,
    weights: Vec<[Vec<C64>; 2]>,
}

/// Node weights of Σ_j g_j dz_j ∧ ω for a form ω on the sphere grid.
fn dz_weights(rule: &HopfRule, omega: &AmbientPolyForm) -> [Vec<C64>; 2] {
    let mut p = [
        Vec::with_capacity(rule.len()),
        Vec::with_capacity(rule.len()),
    ];
    for (z, w) in rule.nodes() {
        let x = to_real(&z);
        let ov = omega.eval(&x);
        for (j, pj) in p.iter_mut().enumerate() {
            let mut e = [C64::new(0.0, 0.0); 2];
            e[j] = C64::new(1.0, 0.0);
            pj.push(FormValue::from_dz(&e).wedge(&ov).sphere_density(&x) * w);
        }
    }
    p
}

impl CrGridPairing {
    pub fn new(rule: HopfRule, forms: &[AmbientPolyForm]) -> Result<Self> {
        for f in forms {
            f.expect_degree(2)?;
        }
        let weights = forms.iter().map(|f| dz_weights(&rule, f)).collect();
        Ok(Self {
            evaluator: HopfGridEvaluator::new(rule),
            weights,
        })
    }

    pub fn evaluator(&self) -> &HopfGridEvaluator {
        &self.evaluator
    }

    pub fn n_forms(&self) -> usize {
        self.weights.len()
    }

    /// Grid values of 𝒞_f(ψ_i) from precomputed samples.
    pub fn pair_samples(&self, s: &GridSamples) -> Vec<C64> {
        let k = C64::new(0.0, TWO_PI).inv();
        let r: Vec<[C64; 2]> = (0..s.f.len())
            .map(|i| {
                let inv = s.f[i].inv();
                [s.g[0][i] * inv, s.g[1][i] * inv]
            })
            .collect();
        self.weights
            .iter()
            .map(|[p1, p2]| {
                let mut acc = ComplexSum::new();
                for (i, ri) in r.iter().enumerate() {
                    acc.add(ri[0] * p1[i] + ri[1] * p2[i]);
                }
                acc.value() * k
            })
            .collect()
    }

    /// Grid values of ∫ α∧ψ_i for a (1,0)-form α = Σ a_j(z) dz_j.
    pub fn pair_one_form<A: Fn(&[C64; 2]) -> [C64; 2]>(&self, alpha: A) -> Vec<C64> {
        let coeffs: Vec<[C64; 2]> = self
            .evaluator
            .rule()
            .nodes()
            .map(|(z, _)| alpha(&z))
            .collect();
        self.weights
            .iter()
            .map(|[p1, p2]| {
                let mut acc = ComplexSum::new();
                for (i, a) in coeffs.iter().enumerate() {
                    acc.add(a[0] * p1[i] + a[1] * p2[i]);
                }
                acc.value()
            })
            .collect()
    }

    pub fn pair(&self, f: &Polynomial) -> Result<Vec<C64>> {
        Ok(self.pair_samples(&self.evaluator.evaluate(f, 1.0)?))
    }
}

/// Fixed-node version of the boundary formula on grids of the sphere and
/// the ball, for (1,1)-forms ψ.
#[derive(Clone, Debug)]
pub struct DomainGridPairing {
    sphere: HopfGridEvaluator,
    ball: BallRule,
    ball_evaluators: Vec<HopfGridEvaluator>,
    forms: Vec<DomainWeights>,
}

#[derive(Clone, Debug)]
struct DomainWeights {
    /// dz_j ∧ ψ on the sphere.
    p: [Vec<C64>; 2],
    /// ∂̄ψ on the sphere (None if ∂̄ψ = 0).
    q: Option<Vec<C64>>,
    /// ∂∂̄ψ on the ball (None if zero).
    r: Option<Vec<C64>>,
}

/// Separate sums of one grid evaluation of the boundary formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainGridValue {
    /// Σ (∂u/(2u))∧ψ.
    pub dlog: C64,
    /// Σ log|u| ∂̄ψ on the sphere.
    pub blog: C64,
    /// Σ log|u| ∂∂̄ψ on the ball.
    pub ilog: C64,
}

impl DomainGridValue {
    /// (i/π)(−dlog − blog + ilog).
    pub fn total(&self) -> C64 {
        C64::new(0.0, 1.0 / PI) * (-self.dlog - self.blog + self.ilog)
    }
}

impl DomainGridPairing {
    pub fn new(sphere: HopfRule, ball: BallRule, forms: &[AmbientPolyForm]) -> Result<Self> {
        let mut out = Vec::new();
        for psi in forms {
            psi.expect_degree(2)?;
            let p = dz_weights(&sphere, psi);
            let dbar = psi.delbar();
            let ddbar = dbar.del();
            let q = (!dbar.is_zero()).then(|| {
                sphere
                    .nodes()
                    .map(|(z, w)| {
                        let x = to_real(&z);
                        dbar.eval(&x).sphere_density(&x) * w
                    })
                    .collect()
            });
            let r = (!ddbar.is_zero()).then(|| {
                ball.nodes()
                    .map(|(z, w)| ddbar.eval(&to_real(&z)).volume_density() * w)
                    .collect()
            });
            out.push(DomainWeights { p, q, r });
        }
        let ball_evaluators = if out.iter().any(|f| f.r.is_some()) {
            vec![HopfGridEvaluator::new(ball.sphere.clone())]
        } else {
            Vec::new()
        };
        Ok(Self {
            sphere: HopfGridEvaluator::new(sphere),
            ball,
            ball_evaluators,
            forms: out,
        })
    }

    pub fn sphere_rule(&self) -> &HopfRule {
        self.sphere.rule()
    }

    pub fn sphere_evaluator(&self) -> &HopfGridEvaluator {
        &self.sphere
    }

    pub fn n_forms(&self) -> usize {
        self.forms.len()
    }

    /// Evaluates the grid formula for every form with a pointwise model of
    /// (∂u/u components, log|u|) on sphere and ball nodes.
    fn combine<D, L, B>(&self, dlog: D, log_sphere: L, log_ball: B) -> Vec<DomainGridValue>
    where
        D: Fn(usize) -> [C64; 2],
        L: Fn(usize) -> f64,
        B: Fn() -> Vec<f64>,
    {
        let ns = self.sphere.rule().len();
        let need_q = self.forms.iter().any(|f| f.q.is_some());
        let ls: Vec<f64> = if need_q {
            (0..ns).map(&log_sphere).collect()
        } else {
            Vec::new()
        };
        let need_r = self.forms.iter().any(|f| f.r.is_some());
        let lb = if need_r { log_ball() } else { Vec::new() };
        let d: Vec<[C64; 2]> = (0..ns).map(dlog).collect();
        self.forms
            .iter()
            .map(|fw| {
                let mut a = ComplexSum::new();
                for (i, di) in d.iter().enumerate() {
                    a.add((di[0] * fw.p[0][i] + di[1] * fw.p[1][i]) * 0.5);
                }
                let mut b = ComplexSum::new();
                if let Some(q) = &fw.q {
                    for (qi, l) in q.iter().zip(&ls) {
                        b.add(qi * *l);
                    }
                }
                let mut c = ComplexSum::new();
                if let Some(r) = &fw.r {
                    for (ri, l) in r.iter().zip(&lb) {
                        c.add(ri * *l);
                    }
                }
                DomainGridValue {
                    dlog: a.value(),
                    blog: b.value(),
                    ilog: c.value(),
                }
            })
            .collect()
    }

    /// Grid boundary formula for a holomorphic polynomial u.
    pub fn pair(&self, u: &Polynomial) -> Result<Vec<DomainGridValue>> {
        let s = self.sphere.evaluate(u, 1.0)?;
        self.pair_with_samples(u, &s)
    }

    /// Same as [`pair`](Self::pair) with precomputed boundary samples.
    pub fn pair_with_samples(
        &self,
        u: &Polynomial,
        s: &GridSamples,
    ) -> Result<Vec<DomainGridValue>> {
        let mut ball_logs = Vec::new();
        if let Some(ev) = self.ball_evaluators.first() {
            for &si in &self.ball.s {
                let vals = ev.evaluate_values(u, si.sqrt())?;
                ball_logs.extend(vals.iter().map(|v| v.norm().ln()));
            }
        }
        Ok(self.combine(
            |i| [s.g[0][i] / s.f[i], s.g[1][i] / s.f[i]],
            |i| s.f[i].norm().ln(),
            || ball_logs.clone(),
        ))
    }

    /// Grid boundary formula for a smooth model: ∂-coefficients of a
    /// function Λ playing the role of log|u|, given on sphere and ball nodes
    /// as closures of z.
    pub fn pair_smooth<D, L>(&self, dlog: D, log: L) -> Vec<DomainGridValue>
    where
        D: Fn(&[C64; 2]) -> [C64; 2],
        L: Fn(&[C64; 2]) -> f64,
    {
        let sphere_nodes: Vec<[C64; 2]> = self.sphere.rule().nodes().map(|(z, _)| z).collect();
        self.combine(
            |i| dlog(&sphere_nodes[i]),
            |i| log(&sphere_nodes[i]),
            || self.ball.nodes().map(|(z, _)| log(&z)).collect(),
        )
    }
}
