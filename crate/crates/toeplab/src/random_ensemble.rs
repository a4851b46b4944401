//! Gaussian ensembles of random CR functions f = Σ a_α χ_k(|α|) e_α (κ = 0)
//! and random holomorphic functions u = a₀ + Σ a_α χ_k(|α|) e_α (κ = 1),
//! with exact polynomial evaluation and an FFT evaluator on Hopf grids.

use crate::cutoff_moments::CutoffSpec;
use crate::error::{LabError, Result};
use crate::model_geometry::{
    BallPoint, ContactData, Covector, HopfRule, SpherePoint, TangentVector,
};
use crate::spectral_basis::{monomial_norm_closed, MultiIndex};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use sha2::{Digest, Sha256};
use std::sync::Arc;

/// Anything holomorphic on a neighbourhood of the closed ball.
pub trait HolomorphicFunction {
    /// Number of complex variables.
    fn n_vars(&self) -> usize;
    /// (f(z), (∂f/∂z_j)_j).
    fn value_grad(&self, z: &[C64]) -> (C64, Vec<C64>);

    fn value(&self, z: &[C64]) -> C64 {
        self.value_grad(z).0
    }
}

/// A polynomial Σ b_α z^α in n + 1 variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n_vars: usize,
    terms: Vec<(MultiIndex, C64)>,
}

impl Polynomial {
    pub fn new(n_vars: usize, terms: Vec<(MultiIndex, C64)>) -> Result<Self> {
        if terms.iter().any(|(a, _)| a.0.len() != n_vars) {
            return Err(LabError::InvalidParameter(
                "multi-index length mismatch".into(),
            ));
        }
        Ok(Self { n_vars, terms })
    }

    /// The coordinate function z_j.
    pub fn coordinate(n_vars: usize, j: usize) -> Self {
        let mut a = vec![0; n_vars];
        a[j] = 1;
        Self {
            n_vars,
            terms: vec![(MultiIndex(a), C64::new(1.0, 0.0))],
        }
    }

    pub fn constant(n_vars: usize, c: C64) -> Self {
        Self {
            n_vars,
            terms: vec![(MultiIndex(vec![0; n_vars]), c)],
        }
    }

    pub fn terms(&self) -> &[(MultiIndex, C64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(a, _)| a.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == C64::new(0.0, 0.0))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self {
            n_vars: self.n_vars,
            terms,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                let e = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                terms.push((MultiIndex(e), c * d));
            }
        }
        Self {
            n_vars: self.n_vars,
            terms,
        }
    }
}

impl Polynomial {
    /// Two-variable fast path: one pass over the terms, shared partial products.
    fn value_grad2(&self, z1: C64, z2: C64) -> (C64, Vec<C64>) {
        let (mut t1, mut t2) = (0usize, 0usize);
        for (a, _) in &self.terms {
            t1 = t1.max(a.0[0] as usize);
            t2 = t2.max(a.0[1] as usize);
        }
        let powers = |z: C64, top: usize| {
            let mut t = Vec::with_capacity(top + 1);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..=top {
                t.push(p);
                p *= z;
            }
            t
        };
        let (p1, p2) = (powers(z1, t1), powers(z2, t2));
        let zero = C64::new(0.0, 0.0);
        let (mut v, mut g1, mut g2) = (zero, zero, zero);
        for (a, c) in &self.terms {
            let (i, j) = (a.0[0] as usize, a.0[1] as usize);
            let cj = c * p2[j];
            v += cj * p1[i];
            if i > 0 {
                g1 += cj * p1[i - 1] * i as f64;
            }
            if j > 0 {
                g2 += c * p1[i] * p2[j - 1] * j as f64;
            }
        }
        (v, vec![g1, g2])
    }
}

impl HolomorphicFunction for Polynomial {
    fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn value_grad(&self, z: &[C64]) -> (C64, Vec<C64>) {
        let nv = self.n_vars;
        if nv == 2 {
            return self.value_grad2(z[0], z[1]);
        }
        // Power tables z_l^p for p up to the largest exponent of each variable.
        let pw: Vec<Vec<C64>> = (0..nv)
            .map(|l| {
                let top = self.terms.iter().map(|(a, _)| a.0[l]).max().unwrap_or(0) as usize;
                let mut t = Vec::with_capacity(top + 1);
                let mut p = C64::new(1.0, 0.0);
                for _ in 0..=top {
                    t.push(p);
                    p *= z[l];
                }
                t
            })
            .collect();
        let mut v = C64::new(0.0, 0.0);
        let mut g = vec![C64::new(0.0, 0.0); nv];
        for (a, c) in &self.terms {
            let mono = (0..nv).fold(*c, |acc, l| acc * pw[l][a.0[l] as usize]);
            v += mono;
            for j in 0..nv {
                let aj = a.0[j] as usize;
                if aj == 0 {
                    continue;
                }
                let mut t = *c * aj as f64 * pw[j][aj - 1];
                for (l, pl) in pw.iter().enumerate() {
                    if l != j {
                        t *= pl[a.0[l] as usize];
                    }
                }
                g[j] += t;
            }
        }
        (v, g)
    }
}

/// Parameters of the Gaussian ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub k: f64,
    pub cutoff: CutoffSpec,
    pub kappa: u8,
    pub master_seed: u64,
}

/// One coefficient vector (a₀ first when κ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDraw {
    pub a: Vec<C64>,
    pub master_seed: u64,
    pub trial: u64,
}

/// The ensemble (A_k, μ_k) restricted to its active band.
#[derive(Clone, Debug)]
pub struct Ensemble {
    cfg: EnsembleConfig,
    /// (α, χ_k(|α|)/‖z^α‖) in graded-lex order.
    basis: Vec<(MultiIndex, f64)>,
}

/// Per-trial RNG: ChaCha20 keyed by SHA-256(master seed ‖ trial index).
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(trial.to_le_bytes());
    let seed: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(seed)
}

/// A standard complex Gaussian (E|a|² = 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

impl Ensemble {
    pub fn new(cfg: EnsembleConfig) -> Result<Self> {
        cfg.cutoff.validate()?;
        if cfg.kappa > 1 {
            return Err(LabError::InvalidParameter("κ must be 0 or 1".into()));
        }
        if !(cfg.k > 0.0) {
            return Err(LabError::InvalidParameter("k must be positive".into()));
        }
        let lo = (cfg.cutoff.delta1 * cfg.k).ceil().max(0.0) as u32;
        let hi = (cfg.cutoff.delta2 * cfg.k).floor() as u32;
        let mut basis = Vec::new();
        for m in lo..=hi {
            let w = cfg.cutoff.chi_k(m as f64, cfg.k);
            if w == 0.0 {
                continue;
            }
            for alpha in MultiIndex::of_degree(cfg.n + 1, m) {
                let c = w / monomial_norm_closed(&alpha).sqrt();
                basis.push((alpha, c));
            }
        }
        if basis.is_empty() {
            return Err(LabError::InvalidParameter(format!(
                "empty ensemble at k = {}",
                cfg.k
            )));
        }
        Ok(Self { cfg, basis })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.cfg
    }

    /// N_k + κ.
    pub fn len(&self) -> usize {
        self.basis.len() + self.cfg.kappa as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Deterministic draw for (master seed, trial).
    pub fn sample(&self, trial: u64) -> GaussianDraw {
        let mut rng = trial_rng(self.cfg.master_seed, trial);
        GaussianDraw {
            a: (0..self.len())
                .map(|_| complex_gaussian(&mut rng))
                .collect(),
            master_seed: self.cfg.master_seed,
            trial,
        }
    }

    /// A draw with explicit coefficients (for manual test functions).
    pub fn manual(&self, a: Vec<C64>) -> Result<GaussianDraw> {
        if a.len() != self.len() {
            return Err(LabError::InvalidParameter(format!(
                "draw length {} ≠ ensemble size {}",
                a.len(),
                self.len()
            )));
        }
        Ok(GaussianDraw {
            a,
            master_seed: self.cfg.master_seed,
            trial: u64::MAX,
        })
    }

    /// The random function of a draw as an explicit polynomial.
    pub fn function(&self, draw: &GaussianDraw) -> Polynomial {
        let nv = self.cfg.n + 1;
        let off = self.cfg.kappa as usize;
        let mut terms = Vec::with_capacity(self.len());
        if off == 1 {
            terms.push((MultiIndex(vec![0; nv]), draw.a[0]));
        }
        for ((alpha, c), a) in self.basis.iter().zip(&draw.a[off..]) {
            terms.push((alpha.clone(), a * *c));
        }
        Polynomial { n_vars: nv, terms }
    }

    pub fn eval_f(&self, draw: &GaussianDraw, x: &SpherePoint) -> C64 {
        self.function(draw).value(x.z())
    }

    /// df at a sphere point as an ambient covector Σ ∂_j f dz_j.
    pub fn eval_df(&self, draw: &GaussianDraw, x: &SpherePoint) -> Covector {
        Covector::from_dz(&self.function(draw).value_grad(x.z()).1)
    }

    /// (1,0)-part ∂u at a ball point (holomorphic components).
    pub fn eval_partial(&self, draw: &GaussianDraw, z: &BallPoint) -> Vec<C64> {
        self.function(draw).value_grad(z.z()).1
    }
}

/// Values of f, ∂₁f, ∂₂f on a Hopf grid (optionally scaled to radius ρ).
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub n_u: usize,
    pub n_theta: usize,
    pub f: Vec<C64>,
    pub g: [Vec<C64>; 2],
}

impl GridSamples {
    /// Flat index of node (iu, p, q).
    pub fn index(&self, iu: usize, p: usize, q: usize) -> usize {
        (iu * self.n_theta + p) * self.n_theta + q
    }
}

/// Evaluates polynomials in two variables on all nodes of a Hopf grid by
/// one 2-D inverse FFT per latitude node. Exponents are folded modulo the
/// angular resolution, which is exact at the nodes.
#[derive(Clone)]
pub struct HopfGridEvaluator {
    rule: HopfRule,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for HopfGridEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HopfGridEvaluator")
            .field("n_u", &self.rule.u.len())
            .field("n_theta", &self.rule.n_theta)
            .finish()
    }
}

impl HopfGridEvaluator {
    pub fn new(rule: HopfRule) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(rule.n_theta);
        Self { rule, fft }
    }

    pub fn rule(&self) -> &HopfRule {
        &self.rule
    }

    fn transform(&self, buf: &mut [C64], scratch: &mut [C64]) {
        let n = self.rule.n_theta;
        self.fft.process(buf);
        transpose(buf, scratch, n);
        self.fft.process(scratch);
        transpose(scratch, buf, n);
    }

    /// f, ∂₁f, ∂₂f at the grid points scaled to |z| = ρ.
    pub fn evaluate(&self, poly: &Polynomial, radius: f64) -> Result<GridSamples> {
        self.evaluate_impl(poly, radius, true)
    }

    /// Only the values f at the grid points scaled to |z| = ρ.
    pub fn evaluate_values(&self, poly: &Polynomial, radius: f64) -> Result<Vec<C64>> {
        Ok(self.evaluate_impl(poly, radius, false)?.f)
    }

    fn evaluate_impl(
        &self,
        poly: &Polynomial,
        radius: f64,
        derivatives: bool,
    ) -> Result<GridSamples> {
        if poly.n_vars() != 2 {
            return Err(LabError::UnsupportedDimension(poly.n_vars() - 1));
        }
        let n = self.rule.n_theta;
        let n_u = self.rule.u.len();
        let deg = poly.degree() as usize;
        let nn = n * n;
        let mut out = GridSamples {
            n_u,
            n_theta: n,
            f: vec![C64::new(0.0, 0.0); n_u * nn],
            g: if derivatives {
                [
                    vec![C64::new(0.0, 0.0); n_u * nn],
                    vec![C64::new(0.0, 0.0); n_u * nn],
                ]
            } else {
                [Vec::new(), Vec::new()]
            },
        };
        let mut bufs = [
            vec![C64::new(0.0, 0.0); nn],
            vec![C64::new(0.0, 0.0); nn],
            vec![C64::new(0.0, 0.0); nn],
        ];
        let mut scratch = vec![C64::new(0.0, 0.0); nn];
        let mut p1 = vec![0.0; deg + 1];
        let mut p2 = vec![0.0; deg + 1];
        let mut pr = vec![0.0; deg + 1];
        pr[0] = 1.0;
        for i in 1..=deg {
            pr[i] = pr[i - 1] * radius;
        }
        // Per term: exponents and the folded bins of f, ∂₁f, ∂₂f.
        let slots: Vec<(usize, usize, [usize; 3], C64)> = poly
            .terms()
            .iter()
            .map(|(alpha, c)| {
                let (a1, a2) = (alpha.0[0] as usize, alpha.0[1] as usize);
                let bins = [
                    (a1 % n) * n + a2 % n,
                    ((a1 + n - 1) % n) * n + a2 % n,
                    (a1 % n) * n + (a2 + n - 1) % n,
                ];
                (a1, a2, bins, *c)
            })
            .collect();
        for iu in 0..n_u {
            let (r1, r2) = (self.rule.u[iu].sqrt(), (1.0 - self.rule.u[iu]).sqrt());
            p1[0] = 1.0;
            p2[0] = 1.0;
            for i in 1..=deg {
                p1[i] = p1[i - 1] * r1;
                p2[i] = p2[i - 1] * r2;
            }
            for b in bufs.iter_mut() {
                b.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            }
            for &(a1, a2, bins, c) in &slots {
                let m = a1 + a2;
                bufs[0][bins[0]] += c * (pr[m] * p1[a1] * p2[a2]);
                if !derivatives {
                    continue;
                }
                if a1 > 0 {
                    bufs[1][bins[1]] += c * (a1 as f64 * pr[m - 1] * p1[a1 - 1] * p2[a2]);
                }
                if a2 > 0 {
                    bufs[2][bins[2]] += c * (a2 as f64 * pr[m - 1] * p1[a1] * p2[a2 - 1]);
                }
            }
            let used = if derivatives { 3 } else { 1 };
            for (which, b) in bufs.iter_mut().enumerate().take(used) {
                self.transform(b, &mut scratch);
                let dst = match which {
                    0 => &mut out.f,
                    1 => &mut out.g[0],
                    _ => &mut out.g[1],
                };
                dst[iu * nn..(iu + 1) * nn].copy_from_slice(b);
            }
        }
        Ok(out)
    }
}

fn transpose(src: &[C64], dst: &mut [C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

/// Outcome of the regularity scan of one function.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub accepted: bool,
    /// min over located zeros of σ_min(df|_{TX}) / max_grid |∂f| (∞ if no zeros).
    pub margin: f64,
    pub zeros_located: usize,
    pub reason: Option<String>,
}

/// Rejects functions that vanish identically or whose zero set on the sphere
/// contains (numerically) critical points of f|_X.
///
/// Candidates are the local minima of |f| on the grid; each is projected onto
/// {f = 0} by Gauss–Newton in the tangent frame, where the conditioning of
/// the real 2×3 Jacobian is recorded.
pub fn regularity_filter<F: HolomorphicFunction>(
    f: &F,
    samples: &GridSamples,
    rule: &HopfRule,
    threshold: f64,
) -> RegularityReport {
    let gmax = samples.g[0]
        .iter()
        .zip(&samples.g[1])
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .fold(0.0, f64::max);
    let fmax = samples.f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(gmax > 0.0) && !(fmax > 0.0) {
        return RegularityReport {
            accepted: false,
            margin: 0.0,
            zeros_located: 0,
            reason: Some("function vanishes identically".into()),
        };
    }
    let (nu, nt) = (samples.n_u, samples.n_theta);
    let mag: Vec<f64> = samples.f.iter().map(|v| v.norm_sqr()).collect();
    let mut candidates = Vec::new();
    for iu in 0..nu {
        for p in 0..nt {
            for q in 0..nt {
                let v = mag[samples.index(iu, p, q)];
                let mut is_min = true;
                'nb: for du in -1i64..=1 {
                    let ju = iu as i64 + du;
                    if ju < 0 || ju >= nu as i64 {
                        continue;
                    }
                    for dp in -1i64..=1 {
                        for dq in -1i64..=1 {
                            if du == 0 && dp == 0 && dq == 0 {
                                continue;
                            }
                            let pp = (p as i64 + dp).rem_euclid(nt as i64) as usize;
                            let qq = (q as i64 + dq).rem_euclid(nt as i64) as usize;
                            if mag[samples.index(ju as usize, pp, qq)] < v {
                                is_min = false;
                                break 'nb;
                            }
                        }
                    }
                }
                if is_min {
                    candidates.push((v, iu, p, q));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut margin = f64::INFINITY;
    let mut located = 0;
    for &(_, iu, p, q) in candidates.iter().take(256) {
        let x0 = SpherePoint::hopf(rule.u[iu], rule.theta(p), rule.theta(q));
        if let Some(s) = project_to_zero(f, x0) {
            located += 1;
            margin = margin.min(s / gmax);
        }
    }
    let accepted = margin >= threshold;
    RegularityReport {
        accepted,
        margin,
        zeros_located: located,
        reason: (!accepted).then(|| format!("zero-set margin {margin:e} below {threshold:e}")),
    }
}

/// Gauss–Newton projection onto {f = 0} ∩ S³; returns σ_min of the real
/// Jacobian of f|_X at the located zero.
fn project_to_zero<F: HolomorphicFunction>(f: &F, mut x: SpherePoint) -> Option<f64> {
    for _ in 0..60 {
        let (v, g) = f.value_grad(x.z());
        let frame = ContactData::frame(&x);
        let cols: Vec<C64> = frame
            .iter()
            .map(|t| g.iter().zip(t.hol()).map(|(a, b)| a * b).sum())
            .collect();
        let sigma = sigma_min_2x3(&cols);
        if v.norm() < 1e-13 * (1.0 + cols.iter().map(|c| c.norm()).sum::<f64>()) {
            return Some(sigma);
        }
        // J: rows (Re, Im), columns the frame; minimal-norm step −Jᵀ(JJᵀ)⁻¹ f.
        let (a, b, c) = jjt(&cols);
        let det = a * c - b * b;
        if !(det.abs() > 1e-300) {
            return None;
        }
        let (r0, r1) = (v.re, v.im);
        let y0 = (c * r0 - b * r1) / det;
        let y1 = (-b * r0 + a * r1) / det;
        let mut step = vec![0.0; 4];
        let mut len2 = 0.0;
        for (t, col) in frame.iter().zip(&cols) {
            let s = -(col.re * y0 + col.im * y1);
            len2 += s * s;
            for (d, tv) in step.iter_mut().zip(t.real()) {
                *d += s * tv;
            }
        }
        if len2.sqrt() > 0.5 {
            return None;
        }
        let r: Vec<f64> = x.real().iter().zip(&step).map(|(a, b)| a + b).collect();
        x = SpherePoint::from_real(&r).ok()?;
    }
    None
}

/// Entries (a, b, c) of the symmetric 2×2 matrix JJᵀ for J with columns
/// (Re c_i, Im c_i).
fn jjt(cols: &[C64]) -> (f64, f64, f64) {
    let a = cols.iter().map(|c| c.re * c.re).sum::<f64>();
    let b = cols.iter().map(|c| c.re * c.im).sum::<f64>();
    let c = cols.iter().map(|c| c.im * c.im).sum::<f64>();
    (a, b, c)
}

fn sigma_min_2x3(cols: &[C64]) -> f64 {
    let (a, b, c) = jjt(cols);
    let tr = a + c;
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    (0.5 * (tr - disc)).max(0.0).sqrt()
}

/// df(V) for a tangent vector (used by tests and the filter diagnostics).
pub fn df_along<F: HolomorphicFunction>(f: &F, v: &TangentVector) -> C64 {
    let g = f.value_grad(v.base().z()).1;
    g.iter().zip(v.hol()).map(|(a, b)| a * b).sum()
}
