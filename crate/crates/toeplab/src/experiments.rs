//! Experiments over k grids and Monte Carlo ensembles. Each one is a pure
//! function of the configuration and returns per-k rows plus verdicts that
//! follow from the rows by the documented tolerance policy.

use crate::config::{derive_seed, grid_level, CrGridSection, LabConfig, VarianceCrSection};
use crate::cutoff_moments::{moments, CutoffSpec, Moments};
use crate::embedding_geometry::{separation_scan, Embedding, EmbeddingConfig};
use crate::error::{LabError, Result};
use crate::kernel_engine::{KernelField, Weighting};
use crate::model_geometry::forms::{AmbientPolyForm, FormValue};
use crate::model_geometry::quadrature::Measure;
use crate::model_geometry::{to_real, BallRule, ContactData, HopfRule, SpherePoint};
use crate::numerics::{loglog_slope, mean_and_se, sample_variance, ComplexSum};
use crate::random_ensemble::{
    regularity_filter, Ensemble, EnsembleConfig, HolomorphicFunction, Polynomial,
};
use crate::spectral_basis::{monomial_norm, monomial_norm_closed, DegreeKernelTable, MultiIndex};
use crate::zero_currents::{
    divisor_pairing_boundary, divisor_pairing_closed, schedule_monotone, zero_set_direct,
    BoundaryPairing, CatalogFunction, CrGridPairing, CubatureOptions, DomainGridPairing,
    PairingEstimate, RegularizationOptions, ZeroDomain,
};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

/// Column order of every report CSV.
pub const ROW_HEADER: [&str; 8] = [
    "k",
    "quantity",
    "value",
    "reference",
    "abs_err",
    "rel_err",
    "observed_order",
    "std_err",
];

/// Column order of the plot-data CSVs.
pub const PLOT_HEADER: [&str; 4] = ["k", "value", "reference", "error"];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One measured quantity at one k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub k: f64,
    pub quantity: String,
    pub value: f64,
    pub reference: f64,
    pub abs_err: f64,
    /// |value − reference|/|reference| (equal to abs_err when the reference is 0).
    pub rel_err: f64,
    /// Local order −Δlog(err)/Δlog(k) against the previous row of the same quantity.
    pub observed_order: Option<f64>,
    /// Monte Carlo standard error, or the error estimate of a deterministic value.
    pub std_err: Option<f64>,
}

impl ReportRow {
    pub fn new(k: f64, quantity: impl Into<String>, value: f64, reference: f64) -> Self {
        let abs_err = (value - reference).abs();
        let rel_err = if reference.abs() > 1e-12 {
            abs_err / reference.abs()
        } else {
            abs_err
        };
        Self {
            k,
            quantity: quantity.into(),
            value,
            reference,
            abs_err,
            rel_err,
            observed_order: None,
            std_err: None,
        }
    }

    pub fn with_std_err(mut self, se: f64) -> Self {
        self.std_err = Some(se);
        self
    }
}

/// A named pass/fail decision with a human-readable justification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

/// Crate version plus `git describe` of the source tree when available.
pub fn version_string() -> String {
    static V: OnceLock<String> = OnceLock::new();
    V.get_or_init(|| {
        let describe = std::process::Command::new("git")
            .args(["describe", "--always", "--dirty", "--tags"])
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .ok()
            .filter(|o| o.status.success())
            .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
            .unwrap_or_else(|| "unknown".into());
        format!("toeplab {} ({describe})", env!("CARGO_PKG_VERSION"))
    })
    .clone()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub rows: Vec<ReportRow>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    id: &'a str,
    passed: bool,
    verdicts: &'a [Verdict],
    warnings: &'a [String],
    provenance: &'a Provenance,
}

#[derive(Serialize)]
struct PlotRow {
    k: f64,
    value: f64,
    reference: f64,
    error: f64,
}

impl ExperimentReport {
    pub fn new(id: &str, cfg: &LabConfig) -> Self {
        Self {
            id: id.into(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            provenance: Provenance {
                seed: cfg.seed,
                config_hash: cfg.hash(),
                version: version_string(),
            },
        }
    }

    /// Appends rows of one quantity, filling the local observed orders.
    fn push_series(&mut self, mut rows: Vec<ReportRow>) {
        for i in 1..rows.len() {
            let (a, b) = (&rows[i - 1], &rows[i]);
            if a.abs_err > 0.0 && b.abs_err > 0.0 {
                let o = -(b.abs_err / a.abs_err).ln() / (b.k / a.k).ln();
                rows[i].observed_order = Some(o);
            }
        }
        self.rows.extend(rows);
    }

    fn verdict(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict::new(name, passed, detail));
    }

    /// All verdicts passed (and, if `strict`, no warnings were raised).
    pub fn passed(&self, strict: bool) -> bool {
        self.verdicts.iter().all(|v| v.passed) && (!strict || self.warnings.is_empty())
    }

    pub fn verdict_named(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record(ROW_HEADER)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        let j = JsonReport {
            id: &self.id,
            passed: self.passed(false),
            verdicts: &self.verdicts,
            warnings: &self.warnings,
            provenance: &self.provenance,
        };
        serde_json::to_writer_pretty(out, &j)?;
        Ok(())
    }

    /// Writes `<id>.csv` and `<id>.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(dir.join(format!("{}.csv", self.id)))?)?;
        let mut f = std::fs::File::create(dir.join(format!("{}.json", self.id)))?;
        self.write_json(&mut f)?;
        std::io::Write::write_all(&mut f, b"\n")?;
        Ok(())
    }

    /// One CSV per quantity (k, value, reference, error) under `dir`;
    /// returns the written paths. An empty report writes nothing.
    pub fn emit_plotdata(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut quantities: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !quantities.contains(&r.quantity.as_str()) {
                quantities.push(&r.quantity);
            }
        }
        let mut paths = Vec::new();
        if quantities.is_empty() {
            return Ok(paths);
        }
        std::fs::create_dir_all(dir)?;
        for q in quantities {
            let safe: String = q
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            let path = dir.join(format!("{}__{safe}.csv", self.id));
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(&path)?;
            w.write_record(PLOT_HEADER)?;
            for r in self.rows.iter().filter(|r| r.quantity == q) {
                w.serialize(PlotRow {
                    k: r.k,
                    value: r.value,
                    reference: r.reference,
                    error: r.abs_err,
                })?;
            }
            w.flush()?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Maps `f` over `0..n` on `jobs` scoped threads; results keep index order,
/// so reductions are independent of the worker count.
pub fn par_map<T, F>(jobs: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return (0..n).map(&f).collect();
    }
    let chunk = n.div_ceil(jobs);
    let f = &f;
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let lo = (j * chunk).min(n);
                let hi = ((j + 1) * chunk).min(n);
                s.spawn(move || (lo..hi).map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn table_for(k_max: f64, cutoff: &CutoffSpec) -> Result<Arc<DegreeKernelTable>> {
    let deg = (cutoff.delta2 * k_max).ceil() as usize + 2;
    Ok(Arc::new(DegreeKernelTable::build(1, deg)?))
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn fmt_list(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", v.join(", "))
}

fn in_band(x: f64, band: [f64; 2]) -> bool {
    x >= band[0] && x <= band[1]
}

// ---------------------------------------------------------------------------
// Test forms

/// x_a dx_b − x_b dx_a.
fn rotation_form(a: usize, b: usize) -> AmbientPolyForm {
    &(&AmbientPolyForm::coord(4, a) * &AmbientPolyForm::dx(4, b))
        - &(&AmbientPolyForm::coord(4, b) * &AmbientPolyForm::dx(4, a))
}

fn dx_wedge(a: usize, b: usize) -> AmbientPolyForm {
    &AmbientPolyForm::dx(4, a) * &AmbientPolyForm::dx(4, b)
}

/// The circle form ψ₁ = x₂dx₃ − x₃dx₂ (dθ₂ on the circle {z₁ = 0}).
pub fn psi_circle() -> AmbientPolyForm {
    rotation_form(2, 3)
}

/// Re(z₂dz₁ − z₁dz₂): its limit pairing vanishes.
pub fn psi_null() -> AmbientPolyForm {
    let w = &(&AmbientPolyForm::z(4, 1) * &AmbientPolyForm::dz(4, 0))
        - &(&AmbientPolyForm::z(4, 0) * &AmbientPolyForm::dz(4, 1));
    &(&w + &w.conj()) * 0.5
}

/// (i/2) dz₂ ∧ dz̄₂ = dx₂ ∧ dx₃.
pub fn psi_area() -> AmbientPolyForm {
    &(&AmbientPolyForm::dz(4, 1) * &AmbientPolyForm::dzbar(4, 1)) * C64::new(0.0, 0.5)
}

/// (i/2)|z₁|² dz₂ ∧ dz̄₂: all three boundary-formula terms are nonzero.
pub fn psi_weighted_area() -> AmbientPolyForm {
    let r2 = &(&AmbientPolyForm::coord(4, 0) * &AmbientPolyForm::coord(4, 0))
        + &(&AmbientPolyForm::coord(4, 1) * &AmbientPolyForm::coord(4, 1));
    &r2 * &psi_area()
}

/// (i/2)|z₂|² dz₁ ∧ dz̄₁ (wedges to zero with ∂(z₁ − c)).
pub fn psi_tangential() -> AmbientPolyForm {
    let r2 = &(&AmbientPolyForm::coord(4, 2) * &AmbientPolyForm::coord(4, 2))
        + &(&AmbientPolyForm::coord(4, 3) * &AmbientPolyForm::coord(4, 3));
    &r2 * &(&(&AmbientPolyForm::dz(4, 0) * &AmbientPolyForm::dzbar(4, 0)) * C64::new(0.0, 0.5))
}

/// Non-closed 2-forms for the CR expectation check.
pub fn expectation_forms() -> Vec<(String, AmbientPolyForm)> {
    let x = |i| AmbientPolyForm::coord(4, i);
    let b = &(&(&x(0) * &x(0)) * &dx_wedge(0, 1)) + &(&x(1) * &dx_wedge(1, 3));
    let c = &(&(&x(3) * &x(3)) * &dx_wedge(0, 1)) + &(&(&x(0) * &x(2)) * &dx_wedge(1, 3));
    vec![
        ("dx2^dx3".into(), dx_wedge(2, 3)),
        ("x0^2dx0^dx1+x1dx1^dx3".into(), b),
        ("x3^2dx0^dx1+x0x2dx1^dx3".into(), c),
    ]
}

/// ∫_{S³} ω for a 3-form by a Hopf product rule.
fn sphere_integral(omega: &AmbientPolyForm, level: usize) -> Result<C64> {
    HopfRule::new(level)?
        .to_rule(Measure::RoundSphere)
        .pair(omega)
}

// ---------------------------------------------------------------------------
// Kernel diagonal

/// Leading diagonal asymptotics of η_k(T_P) and the Reeb component of β_k.
pub fn kernel_diag(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("kernel-diag", cfg);
    let ks = &cfg.kernel.k_grid;
    let table = table_for(max_of(ks), &cfg.cutoff)?;
    let Moments { mv, .. } = moments(&cfg.cutoff, 1)?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, "kernel-diag"));
    let (mut diag_rows, mut beta_rows, mut const_rows) = (Vec::new(), Vec::new(), Vec::new());
    let (mut e1, mut e2) = (Vec::new(), Vec::new());
    let mut max_im: f64 = 0.0;
    for &k in ks {
        let field = KernelField::new(table.clone(), cfg.cutoff, k, Weighting::Eta)?;
        let ratio = field.diag() / field.kernel_diag_asymptotic_ref()?;
        diag_rows.push(ReportRow::new(k, "diag_ratio", ratio, 1.0));
        e1.push((ratio - 1.0).abs());
        let x = SpherePoint::random(1, &mut rng);
        let b = field.beta_k(&x)?.apply(ContactData::reeb_field(&x).real());
        max_im = max_im.max(b.im.abs());
        let v = 2.0 * PI * b.re / k;
        beta_rows.push(ReportRow::new(k, "beta_reeb_scaled", v, mv));
        e2.push((v - mv).abs());
        const_rows.push(ReportRow::new(
            k,
            "beta_reeb_err_times_k",
            (v - mv).abs() * k,
            f64::NAN,
        ));
    }
    rep.push_series(diag_rows);
    rep.push_series(beta_rows);
    rep.rows.extend(const_rows);
    // dV_ξ = c·ξ∧dξ with c = 2^{-n}/n!; recorded so that the other
    // normalization of the contact volume can be recovered.
    rep.rows
        .push(ReportRow::new(0.0, "contact_volume_constant", 0.5, 0.5));
    let x = SpherePoint::random(1, &mut rng);
    rep.rows.push(ReportRow::new(
        0.0,
        "contact_volume_density",
        ContactData::volume_density(&x),
        1.0,
    ));

    let order = if ks.len() >= 2 {
        -loglog_slope(ks, &e1)
    } else {
        f64::NAN
    };
    let decreasing = e1.windows(2).all(|w| w[1] < w[0]);
    rep.verdict(
        "diag-leading-order",
        decreasing && in_band(order, [0.6, 1.4]),
        format!(
            "|ratio − 1| = {} decreasing: {decreasing}; fitted order {order:.3} (band [0.6, 1.4])",
            fmt_list(&e1)
        ),
    );
    let ratios: Vec<f64> = e2.windows(2).map(|w| w[1] / w[0]).collect();
    let ok =
        !ratios.is_empty() && ratios.iter().all(|r| in_band(*r, [0.35, 0.7])) && max_im < 1e-12;
    let c_fit = e2.iter().zip(ks).map(|(e, k)| e * k).sum::<f64>() / ks.len() as f64;
    rep.verdict(
        "beta-reeb-rate",
        ok,
        format!(
            "|2πβ_k(𝒯)/k − mv| = {}; successive ratios {} (band [0.35, 0.7]); fitted C ≈ {c_fit:.4}; max |Im β(𝒯)| = {max_im:.1e}",
            fmt_list(&e2),
            fmt_list(&ratios)
        ),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Embedding geometry

/// Fubini–Study expansion, the Hessian identity, negative definiteness and
/// separation of F_k.
pub fn embed_check(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("embed-check", cfg);
    let e = &cfg.embedding;
    let k_max = max_of(&e.k_grid)
        .max(e.hessian_k)
        .max(max_of(&e.definite_k_grid));
    let table = table_for(k_max, &cfg.cutoff)?;
    let m = moments(&cfg.cutoff, 1)?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, "embed-check"));
    let emb_at = |k: f64| {
        Embedding::new(
            table.clone(),
            EmbeddingConfig {
                k,
                cutoff: cfg.cutoff,
                kappa: e.kappa,
            },
        )
    };

    // Fubini–Study pullback along 𝒯 and on T^{1,0}.
    let (mut reeb_rows, mut contact_rows, mut reeb_err) = (Vec::new(), Vec::new(), Vec::new());
    let mut contact_rel = f64::NAN;
    for &k in &e.k_grid {
        let emb = emb_at(k)?;
        let x = SpherePoint::random(1, &mut rng);
        let t = ContactData::reeb_field(&x);
        let a = emb.fs_pullback_real(&t, &t).re / (k * k);
        reeb_rows.push(ReportRow::new(k, "fs_reeb_over_k2", a, m.var));
        reeb_err.push((a - m.var).abs());
        let z = x.z();
        let hol = [-z[1].conj(), z[0].conj()];
        let ahol: Vec<C64> = hol.iter().map(|c| c.conj()).collect();
        let zero = [C64::new(0.0, 0.0); 2];
        let p = emb.fs_pullback(&x, &hol, &hol) / k;
        let target = C64::new(0.0, -m.mv) * ContactData::dxi_complex(&hol, &zero, &zero, &ahol);
        contact_rel = (p - target).norm() / target.norm();
        contact_rows.push(ReportRow::new(k, "fs_contact_over_k", p.re, target.re));
    }
    rep.push_series(reeb_rows);
    rep.push_series(contact_rows);
    let order = if e.k_grid.len() >= 2 {
        -loglog_slope(&e.k_grid, &reeb_err)
    } else {
        f64::NAN
    };
    let decreasing = reeb_err.windows(2).all(|w| w[1] < w[0]);
    rep.verdict(
        "fs-reeb-order",
        decreasing && in_band(order, [0.6, 1.4]),
        format!(
            "|k⁻²[F]*ds²(𝒯,𝒯) − var| = {} decreasing: {decreasing}; fitted order {order:.3}",
            fmt_list(&reeb_err)
        ),
    );
    rep.verdict(
        "fs-contact-limit",
        contact_rel <= e.contact_tol,
        format!(
            "k⁻¹[F]*ds²(Z,Z̄) vs −i·mv·dξ(Z,Z̄) at k = {}: relative error {contact_rel:.3e} (tol {})",
            max_of(&e.k_grid),
            e.contact_tol
        ),
    );

    // Hessian identity against finite differences of g_y = h^F(·, y).
    let emb = emb_at(e.hessian_k)?;
    let (mut max_rel, mut max_explicit): (f64, f64) = (0.0, 0.0);
    let mut ratios = Vec::new();
    for _ in 0..e.hessian_points {
        let y = SpherePoint::random(1, &mut rng);
        let (frame, h) = emb.hessian_matrix(&y);
        let (_, fd) = emb.fd_hessian(&y, e.fd_step)?;
        let two_h = &h * 2.0;
        max_rel = max_rel.max((&fd - &two_h).norm() / two_h.norm());
        ratios.push(fd.dot(&h) / h.dot(&h));
        for a in 0..frame.len() {
            for b in 0..frame.len() {
                let d = (emb.hess_form_explicit(&frame[a], &frame[b]) - h[(a, b)]).abs();
                max_explicit = max_explicit.max(d / h.norm());
            }
        }
    }
    let (ratio_mean, ratio_se) = mean_and_se(&ratios);
    rep.rows.push(ReportRow::new(
        e.hessian_k,
        "hessian_fd_rel_err",
        max_rel,
        0.0,
    ));
    rep.rows.push(
        ReportRow::new(e.hessian_k, "hessian_fd_over_form", ratio_mean, 2.0).with_std_err(ratio_se),
    );
    rep.rows.push(ReportRow::new(
        e.hessian_k,
        "hessian_explicit_rel_diff",
        max_explicit,
        0.0,
    ));
    rep.verdict(
        "hessian-identity",
        max_rel <= e.hessian_tol && max_explicit <= 1e-10,
        format!(
            "max ‖FD − 2ℋ^F‖/‖2ℋ^F‖ over {} points = {max_rel:.3e} (tol {:.0e}); mean FD/ℋ^F ratio {ratio_mean:.8}; kernel vs explicit path {max_explicit:.1e}",
            e.hessian_points, e.hessian_tol
        ),
    );

    // Negative definiteness and separation.
    let (mut eig_ok, mut sep_ok) = (true, true);
    let mut details = Vec::new();
    for &k in &e.definite_k_grid {
        let emb = emb_at(k)?;
        let mut top = f64::NEG_INFINITY;
        for _ in 0..e.definite_points {
            let x = SpherePoint::random(1, &mut rng);
            top = top.max(*emb.hessian_eigenvalues(&x).last().expect("eigenvalues"));
        }
        let sep = separation_scan(
            &emb,
            e.separation_samples,
            e.separation_delta,
            derive_seed(cfg.seed, &format!("separation-{k}")),
        )?;
        eig_ok &= top < 0.0;
        sep_ok &= sep.max_h <= e.separation_bound && sep.max_h_distinct < 1.0;
        rep.rows
            .push(ReportRow::new(k, "hessian_max_eigenvalue", top, 0.0));
        rep.rows.push(ReportRow::new(
            k,
            "separation_max_h",
            sep.max_h,
            e.separation_bound,
        ));
        details.push(format!(
            "k = {k}: top eigenvalue {top:.4e}, max h over {} δ-separated pairs {:.4e}",
            sep.pairs, sep.max_h
        ));
    }
    rep.verdict("hessian-negative", eig_ok, details.join("; "));
    rep.verdict(
        "separation",
        sep_ok,
        format!(
            "max h at δ = {} must stay ≤ {}",
            e.separation_delta, e.separation_bound
        ),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Lelong–Poincaré oracles

fn sphere_options(cfg: &LabConfig) -> RegularizationOptions {
    let z = &cfg.zeros;
    RegularizationOptions {
        deltas: z.deltas.clone(),
        cubature: CubatureOptions {
            tol_rel: z.sphere_tol_rel,
            max_cells: z.sphere_max_cells,
            ..CubatureOptions::sphere()
        },
        regularity_threshold: z.regularity_threshold,
    }
}

fn ball_options(cfg: &LabConfig) -> CubatureOptions {
    CubatureOptions {
        tol_rel: cfg.zeros.ball_tol_rel,
        max_cells: cfg.zeros.ball_max_cells,
        ..CubatureOptions::ball()
    }
}

fn estimate_row(quantity: &str, est: &PairingEstimate, reference: f64) -> ReportRow {
    ReportRow::new(0.0, quantity, est.value.re, reference).with_std_err(est.err_est)
}

/// (Z_f, ψ) = 𝒞_f(dψ) on S³ against parameterized zero circles.
pub fn lp_closed(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("lp-closed", cfg);
    let opts = sphere_options(cfg);
    let tol = cfg.zeros.oracle_tol;
    let level = cfg.zeros.curve_level;
    let cases = [
        (CatalogFunction::Z1, psi_circle(), "closed-circle-oracle"),
        (
            CatalogFunction::Z2,
            rotation_form(0, 1),
            "closed-swap-symmetry",
        ),
        (
            CatalogFunction::Z1MinusC(C64::new(0.5, 0.0)),
            psi_circle(),
            "closed-shifted-circle",
        ),
    ];
    for (f, psi, name) in cases {
        let est = divisor_pairing_closed(&f.polynomial(), &psi, &opts)?;
        let direct = zero_set_direct(f, ZeroDomain::Sphere, &psi, level)?;
        let err = (est.value - direct).norm();
        rep.rows.push(estimate_row(
            &format!("{}_pairing", f.name()),
            &est,
            direct.re,
        ));
        if !est.converged {
            rep.warnings
                .push(format!("{}: cubature hit its cell cap", f.name()));
        }
        let passed = err + est.err_est <= tol * direct.norm();
        rep.verdict(
            name,
            passed,
            format!(
                "f = {}: regularized {:.8} ± {:.1e}, direct {:.8}; |diff| + err = {:.2e} ≤ {tol}·|direct|",
                f.name(),
                est.value.re,
                est.err_est,
                direct.re,
                err + est.err_est
            ),
        );
    }
    let circle = zero_set_direct(
        CatalogFunction::Z1,
        ZeroDomain::Sphere,
        &psi_circle(),
        level,
    )?;
    rep.verdict(
        "circle-direct-value",
        (circle.re - 2.0 * PI).abs() < 1e-10 && circle.im.abs() < 1e-10,
        format!("direct circle integral {:.12} vs 2π", circle.re),
    );
    // An exact 1-form dφ pairs to zero because d(dφ) = 0.
    let phi = &(&AmbientPolyForm::coord(4, 0) * &AmbientPolyForm::coord(4, 2))
        + &(&(&AmbientPolyForm::coord(4, 1) * &AmbientPolyForm::coord(4, 1))
            * &AmbientPolyForm::coord(4, 3));
    let exact = divisor_pairing_closed(&CatalogFunction::Z1.polynomial(), &phi.d(), &opts)?;
    rep.rows.push(estimate_row("z1_exact_form", &exact, 0.0));
    rep.verdict(
        "closed-exact-form",
        exact.value.norm() <= 3.0 * exact.err_est + 1e-12,
        format!("(Z_z1, dφ) = {:.3e}", exact.value.norm()),
    );
    Ok(rep)
}

/// One boundary-formula pairing with its disc oracle; records the three
/// terms and the total, and returns (total, Σ|terms|, direct value).
fn boundary_case(
    rep: &mut ExperimentReport,
    opts: &RegularizationOptions,
    ball: &CubatureOptions,
    level: usize,
    f: CatalogFunction,
    psi: &AmbientPolyForm,
    label: &str,
) -> Result<(BoundaryPairing, f64, C64)> {
    let bp = divisor_pairing_boundary(&f.polynomial(), psi, opts, ball)?;
    let direct = zero_set_direct(f, ZeroDomain::Ball, psi, level)?;
    let scale = bp.term_boundary_dlog.value.norm()
        + bp.term_boundary_log.value.norm()
        + bp.term_interior_log.value.norm();
    for (name, t) in [
        ("dlog", &bp.term_boundary_dlog),
        ("boundary_log", &bp.term_boundary_log),
        ("interior_log", &bp.term_interior_log),
    ] {
        rep.rows.push(estimate_row(
            &format!("{}_{label}_term_{name}", f.name()),
            t,
            f64::NAN,
        ));
    }
    rep.rows.push(estimate_row(
        &format!("{}_{label}", f.name()),
        &bp.total,
        direct.re,
    ));
    if !bp.total.converged {
        rep.warnings.push(format!(
            "{} with {label}: cubature hit its cell cap",
            f.name()
        ));
    }
    Ok((bp, scale, direct))
}

/// The three-term boundary formula on the ball against disc oracles.
pub fn lp_boundary(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("lp-boundary", cfg);
    let opts = sphere_options(cfg);
    let ball = ball_options(cfg);
    let tol = cfg.zeros.oracle_tol;
    let half = CatalogFunction::Z1MinusC(C64::new(0.5, 0.0));
    let level = cfg.zeros.curve_level;

    let (bp, _, direct) = boundary_case(&mut rep, &opts, &ball, level, half, &psi_area(), "area")?;
    let est = &bp.total;
    let target = 0.75 * PI;
    let err = (est.value - target).norm();
    rep.verdict(
        "boundary-disc-oracle",
        err + est.err_est <= tol * target && (direct.re - target).abs() < 1e-10,
        format!(
            "u = z1 − 1/2, ψ = (i/2)dz₂∧dz̄₂: {:.8} ± {:.1e} vs 3π/4 = {target:.8} (direct {:.8})",
            est.value.re, est.err_est, direct.re
        ),
    );

    let (bp, _, direct) = boundary_case(
        &mut rep,
        &opts,
        &ball,
        level,
        half,
        &psi_weighted_area(),
        "weighted_area",
    )?;
    // ∂∂̄ψ has constant sign here, so the interior log integral must move
    // monotonically along the δ schedule.
    let interior = &bp.term_interior_log.schedule;
    rep.verdict(
        "boundary-log-monotone",
        schedule_monotone(interior),
        format!(
            "interior log term along δ: {}",
            fmt_list(&interior.iter().map(|(_, v)| v.re).collect::<Vec<_>>())
        ),
    );
    let est = &bp.total;
    let err = (est.value - direct).norm();
    rep.verdict(
        "boundary-three-term",
        err + est.err_est <= tol * direct.norm(),
        format!(
            "u = z1 − 1/2, ψ = (i/2)|z₁|²dz₂∧dz̄₂: {:.8} ± {:.1e} vs disc integral {:.8}",
            est.value.re, est.err_est, direct.re
        ),
    );

    let (bp, scale, _) = boundary_case(
        &mut rep,
        &opts,
        &ball,
        level,
        CatalogFunction::TwoPlusZ1,
        &psi_weighted_area(),
        "weighted_area",
    )?;
    let est = &bp.total;
    let budget = 3.0 * est.err_est + 1e-9 * scale;
    rep.verdict(
        "boundary-nowhere-zero",
        est.value.norm() <= budget,
        format!(
            "u = 2 + z1: |pairing| = {:.3e} ≤ budget {budget:.3e} (terms sum to {scale:.4})",
            est.value.norm()
        ),
    );

    let (bp, scale, _) = boundary_case(
        &mut rep,
        &opts,
        &ball,
        level,
        half,
        &psi_tangential(),
        "tangential",
    )?;
    let est = &bp.total;
    let budget = 3.0 * est.err_est + 1e-9 * scale;
    rep.verdict(
        "boundary-tangential-form",
        est.value.norm() <= budget,
        format!(
            "ψ∧∂u ≡ 0: |pairing| = {:.3e} ≤ budget {budget:.3e}",
            est.value.norm()
        ),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------
// CR expectation

/// The complex mean with its combined standard error.
fn complex_mean(vals: &[C64]) -> (C64, f64, f64, f64) {
    let re: Vec<f64> = vals.iter().map(|v| v.re).collect();
    let im: Vec<f64> = vals.iter().map(|v| v.im).collect();
    let (mr, sr) = mean_and_se(&re);
    let (mi, si) = mean_and_se(&im);
    (C64::new(mr, mi), (sr * sr + si * si).sqrt(), sr, si)
}

/// Mean over draws of the grid 𝒞_f(ψ) against ∫ β_k ∧ ψ.
pub fn expectation_cr(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("expectation-cr", cfg);
    let c = &cfg.expectation_cr;
    let k = c.k;
    let forms = expectation_forms();
    let psis: Vec<AmbientPolyForm> = forms.iter().map(|(_, f)| f.clone()).collect();
    let level = c.level.unwrap_or_else(|| grid_level(k, cfg.cutoff.delta2));
    let grid = CrGridPairing::new(HopfRule::new(level)?, &psis)?;
    let ens = Ensemble::new(EnsembleConfig {
        n: 1,
        k,
        cutoff: cfg.cutoff,
        kappa: c.kappa,
        master_seed: derive_seed(cfg.seed, "expectation-cr"),
    })?;
    let thr = cfg.zeros.regularity_threshold;
    let draws = par_map(cfg.jobs, c.trials, |t| {
        let poly = ens.function(&ens.sample(t as u64));
        let s = grid.evaluator().evaluate(&poly, 1.0)?;
        let r = regularity_filter(&poly, &s, grid.evaluator().rule(), thr);
        Ok(r.accepted.then(|| grid.pair_samples(&s)))
    })?;
    let rejected = draws.iter().filter(|d| d.is_none()).count();
    let accepted: Vec<&Vec<C64>> = draws.iter().flatten().collect();
    let reject_frac = rejected as f64 / c.trials as f64;

    // Reference ∫ β_k∧ψ with β_k = d_x K/(2πi(κ² + K)) on the diagonal.
    let table = table_for(k, &cfg.cutoff)?;
    let field = KernelField::new(table, cfg.cutoff, k, Weighting::Eta)?;
    let [s0, s1, _] = field.diag_sums();
    let kappa2 = (c.kappa as f64).powi(2);
    let damp = s0 / (kappa2 + s0);
    let rule = HopfRule::new(c.reference_level)?.to_rule(Measure::RoundSphere);
    let xi = AmbientPolyForm::contact_xi(4);
    let xi_scale = s1 / (2.0 * PI * (kappa2 + s0));
    let beta_grid = grid.pair_one_form(|z| {
        let g = C64::new(0.0, 2.0 * PI * (kappa2 + s0)).inv() * s1;
        [z[0].conj() * g, z[1].conj() * g]
    });
    let mut two_path: f64 = 0.0;
    for (i, (id, psi)) in forms.iter().enumerate() {
        let kernel_path = rule.integrate(|x| {
            let p = SpherePoint::from_real(x).expect("unit node");
            let b = field.beta_k(&p).expect("positive diagonal");
            b.to_form().wedge(&psi.eval(x)).sphere_density(x) * damp
        });
        let symbolic_path = rule.pair(&(&(&xi * xi_scale) * psi))?;
        two_path = two_path.max((kernel_path - symbolic_path).norm() / kernel_path.norm().max(1.0));
        let reference = kernel_path;
        let budget = (beta_grid[i] - reference).norm();
        let vals: Vec<C64> = accepted.iter().map(|v| v[i]).collect();
        let (mean, se, se_re, se_im) = complex_mean(&vals);
        let dev = (mean - reference).norm();
        let ok = dev <= 3.0 * se + budget;
        rep.rows
            .push(ReportRow::new(k, format!("{id}_re"), mean.re, reference.re).with_std_err(se_re));
        rep.rows
            .push(ReportRow::new(k, format!("{id}_im"), mean.im, reference.im).with_std_err(se_im));
        rep.verdict(
            format!("expectation-cr:{id}"),
            ok,
            format!(
                "mean {:.6}{:+.6}i over {} draws vs ∫β_k∧ψ = {:.6}; |diff| {dev:.3e} ≤ 3·SE {:.3e} + grid budget {budget:.1e}",
                mean.re,
                mean.im,
                vals.len(),
                reference.re,
                3.0 * se
            ),
        );
    }
    rep.verdict(
        "beta-two-paths",
        two_path <= 1e-10,
        format!("kernel-engine β_k vs symbolic (S₁/2πS₀)ξ pairing: max relative difference {two_path:.2e}"),
    );
    rep.rows
        .push(ReportRow::new(k, "reject_fraction", reject_frac, 0.0));
    rep.verdict(
        "cr-rejects",
        reject_frac <= c.max_reject,
        format!(
            "{rejected} of {} draws rejected by the regularity filter",
            c.trials
        ),
    );
    if rejected > 0 {
        rep.warnings.push(format!(
            "{rejected} draws rejected by the regularity filter"
        ));
    }
    // Scale invariance of df/f on a few draws.
    let mut scale_dev: f64 = 0.0;
    for t in 0..5u64 {
        let poly = ens.function(&ens.sample(t));
        let a = grid.pair(&poly)?;
        let b = grid.pair(&poly.scaled(C64::new(2.0, 0.0)))?;
        for (x, y) in a.iter().zip(&b) {
            scale_dev = scale_dev.max((x - y).norm() / x.norm().max(1e-300));
        }
    }
    rep.verdict(
        "scale-invariance",
        scale_dev <= 1e-10,
        format!("max relative change of 𝒞_f(ψ) under f ↦ 2f: {scale_dev:.1e}"),
    );
    Ok(rep)
}

// ---------------------------------------------------------------------------
// CR sample set (equidistribution and variance)

/// A test 1-form with its limit and C¹ norm.
#[derive(Clone, Debug)]
pub struct TestForm {
    pub id: String,
    pub psi: AmbientPolyForm,
    /// (mv/2π)∫ dξ∧ψ.
    pub limit: f64,
    pub c1_norm: f64,
}

/// Sampling parameters shared by the equidistribution and variance runs.
#[derive(Clone, Debug, PartialEq)]
pub struct CrSampling {
    pub k_grid: Vec<f64>,
    pub trials: usize,
    pub level: Option<usize>,
}

impl From<&CrGridSection> for CrSampling {
    fn from(s: &CrGridSection) -> Self {
        Self {
            k_grid: s.k_grid.clone(),
            trials: s.trials,
            level: s.level,
        }
    }
}

impl From<&VarianceCrSection> for CrSampling {
    fn from(s: &VarianceCrSection) -> Self {
        Self {
            k_grid: s.k_grid.clone(),
            trials: s.trials,
            level: s.level,
        }
    }
}

/// Re (Z_f, ψ) for accepted draws of the κ = 0 ensemble, per k and form.
#[derive(Clone, Debug)]
pub struct CrSampleSet {
    pub sampling: CrSampling,
    pub levels: Vec<usize>,
    pub forms: Vec<TestForm>,
    /// values[k index][form index][accepted draw].
    pub values: Vec<Vec<Vec<f64>>>,
    pub rejected: Vec<usize>,
    /// Exact expectation of the grid estimator, per k and form.
    pub expected: Vec<Vec<f64>>,
}

pub fn equidistribution_forms(cutoff: &CutoffSpec) -> Result<Vec<TestForm>> {
    let mv = moments(cutoff, 1)?.mv;
    let dxi = AmbientPolyForm::contact_xi(4).d();
    let nodes: Vec<Vec<f64>> = HopfRule::new(8)?
        .nodes()
        .map(|(z, _)| to_real(&z))
        .collect();
    [("psi_circle", psi_circle()), ("psi_null", psi_null())]
        .into_iter()
        .map(|(id, psi)| {
            let limit = mv / (2.0 * PI) * sphere_integral(&(&dxi * &psi), 16)?.re;
            Ok(TestForm {
                id: id.into(),
                c1_norm: psi.c_norm(1, &nodes),
                psi,
                limit: if limit.abs() < 1e-12 { 0.0 } else { limit },
            })
        })
        .collect()
}

impl CrSampleSet {
    pub fn generate(cfg: &LabConfig, sampling: &CrSampling) -> Result<Self> {
        let forms = equidistribution_forms(&cfg.cutoff)?;
        let dpsi: Vec<AmbientPolyForm> = forms.iter().map(|f| f.psi.d()).collect();
        let table = table_for(max_of(&sampling.k_grid), &cfg.cutoff)?;
        let thr = cfg.zeros.regularity_threshold;
        let (mut levels, mut values, mut rejected, mut expected) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for &k in &sampling.k_grid {
            let level = sampling
                .level
                .unwrap_or_else(|| grid_level(k, cfg.cutoff.delta2));
            let grid = CrGridPairing::new(HopfRule::new(level)?, &dpsi)?;
            let ens = Ensemble::new(EnsembleConfig {
                n: 1,
                k,
                cutoff: cfg.cutoff,
                kappa: 0,
                master_seed: derive_seed(cfg.seed, &format!("cr-samples-{k}")),
            })?;
            let draws = par_map(cfg.jobs, sampling.trials, |t| {
                let poly = ens.function(&ens.sample(t as u64));
                let s = grid.evaluator().evaluate(&poly, 1.0)?;
                let r = regularity_filter(&poly, &s, grid.evaluator().rule(), thr);
                Ok(r.accepted.then(|| grid.pair_samples(&s)))
            })?;
            let mut per_form = vec![Vec::with_capacity(sampling.trials); forms.len()];
            for d in draws.iter().flatten() {
                for (i, v) in d.iter().enumerate() {
                    per_form[i].push(v.re);
                }
            }
            rejected.push(draws.iter().filter(|d| d.is_none()).count());
            values.push(per_form);
            let field = KernelField::new(table.clone(), cfg.cutoff, k, Weighting::Eta)?;
            let [s0, s1, _] = field.diag_sums();
            let g = C64::new(0.0, 2.0 * PI * s0).inv() * s1;
            expected.push(
                grid.pair_one_form(|z| [z[0].conj() * g, z[1].conj() * g])
                    .iter()
                    .map(|v| v.re)
                    .collect(),
            );
            levels.push(level);
        }
        Ok(Self {
            sampling: sampling.clone(),
            levels,
            forms,
            values,
            rejected,
            expected,
        })
    }
}

/// Convergence of k⁻¹ mean pairings and the tail-frequency proxy.
pub fn equi_cr(cfg: &LabConfig, set: &CrSampleSet) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("equi-cr", cfg);
    let ks = &set.sampling.k_grid;
    let band = cfg.equi_cr.order_band;
    for (fi, form) in set.forms.iter().enumerate() {
        let (mut mean_rows, mut tail_rows) = (Vec::new(), Vec::new());
        let (mut gaps, mut mc_gaps, mut consistent) = (Vec::new(), Vec::new(), true);
        let mut c_fit = f64::NAN;
        let mut tail_ok = true;
        let mut tail_detail = Vec::new();
        for (ki, &k) in ks.iter().enumerate() {
            let scaled: Vec<f64> = set.values[ki][fi].iter().map(|v| v / k).collect();
            let n = scaled.len() as f64;
            let (mean, se) = mean_and_se(&scaled);
            mean_rows.push(
                ReportRow::new(k, format!("{}_mean_over_k", form.id), mean, form.limit)
                    .with_std_err(se),
            );
            gaps.push((set.expected[ki][fi] / k - form.limit).abs());
            mc_gaps.push((mean - form.limit).abs());
            consistent &= (mean - set.expected[ki][fi] / k).abs() <= 3.0 * se + 1e-12;
            let thr = form.c1_norm / k.sqrt();
            let freq = scaled
                .iter()
                .filter(|v| (*v - form.limit).abs() >= thr)
                .count() as f64
                / n;
            if ki == 0 {
                c_fit = freq * k.sqrt();
            }
            let bound = c_fit / k.sqrt() + 3.0 * (freq.max(1.0 / n) / n).sqrt();
            tail_ok &= freq <= bound;
            tail_rows.push(ReportRow::new(
                k,
                format!("{}_tail_frequency", form.id),
                freq,
                c_fit / k.sqrt(),
            ));
            tail_detail.push(format!("k = {k}: {freq:.4} (≤ {bound:.4})"));
        }
        rep.push_series(mean_rows);
        rep.rows.extend(tail_rows);
        rep.verdict(
            format!("equi-cr-mean:{}", form.id),
            consistent,
            "per-k means agree with the exact grid expectation within 3 SE".to_string(),
        );
        if form.limit != 0.0 {
            let order = -loglog_slope(ks, &gaps);
            rep.verdict(
                format!("equi-cr-order:{}", form.id),
                in_band(order, band),
                format!(
                    "|k⁻¹ E − limit {:.6}| = {}; fitted order {order:.3} (band [{}, {}]); Monte Carlo gaps {}",
                    form.limit,
                    fmt_list(&gaps),
                    band[0],
                    band[1],
                    fmt_list(&mc_gaps)
                ),
            );
        } else {
            let (last, se) = mean_and_se(&set.values[ks.len() - 1][fi]);
            let k = ks[ks.len() - 1];
            rep.verdict(
                format!("equi-cr-null:{}", form.id),
                (last / k).abs() <= 3.0 * se / k + 1e-12,
                format!(
                    "limit 0; k⁻¹ mean at k = {k}: {:.3e} (3·SE {:.3e})",
                    last / k,
                    3.0 * se / k
                ),
            );
        }
        rep.verdict(
            format!("tail-proxy:{}", form.id),
            tail_ok,
            format!(
                "frequency of |k⁻¹(Z_f,ψ) − limit| ≥ ‖ψ‖_C¹/√k with ‖ψ‖_C¹ = {:.3}, fitted C = {c_fit:.4}: {}",
                form.c1_norm,
                tail_detail.join(", ")
            ),
        );
    }
    let rejected: usize = set.rejected.iter().sum();
    if rejected > 0 {
        rep.warnings.push(format!(
            "{rejected} draws rejected by the regularity filter"
        ));
    }
    Ok(rep)
}

/// Var_k (Z_f, ψ) against the k^{3/2} and k² scales.
pub fn variance_cr(cfg: &LabConfig, set: &CrSampleSet) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("variance-cr", cfg);
    let v = &cfg.variance_cr;
    let ks = &set.sampling.k_grid;
    if set.values.iter().flatten().any(|vals| vals.len() < 2) {
        return Err(LabError::Precondition(
            "the variance needs at least two accepted draws per k".into(),
        ));
    }
    for (fi, form) in set.forms.iter().enumerate() {
        let mut r32 = Vec::new();
        let mut r2 = Vec::new();
        let mut kept = Vec::new();
        for (ki, &k) in ks.iter().enumerate() {
            let vals = &set.values[ki][fi];
            let var = sample_variance(vals);
            let se = var * (2.0 / (vals.len() as f64 - 1.0)).sqrt();
            rep.rows.push(
                ReportRow::new(k, format!("{}_variance", form.id), var, f64::NAN).with_std_err(se),
            );
            rep.rows.push(
                ReportRow::new(
                    k,
                    format!("{}_variance_over_k1.5", form.id),
                    var / k.powf(1.5),
                    f64::NAN,
                )
                .with_std_err(se / k.powf(1.5)),
            );
            rep.rows.push(
                ReportRow::new(
                    k,
                    format!("{}_variance_over_k2", form.id),
                    var / (k * k),
                    0.0,
                )
                .with_std_err(se / (k * k)),
            );
            if k >= v.k0 {
                r32.push(var / k.powf(1.5));
                r2.push(var / (k * k));
                kept.push(k);
            }
        }
        let band_ok = r32.windows(2).all(|w| w[1] <= v.noise_band * w[0]);
        rep.verdict(
            format!("variance-k1.5-band:{}", form.id),
            band_ok && !r32.is_empty(),
            format!(
                "Var/k^1.5 for k ≥ {} = {} (each ≤ {}× the previous)",
                v.k0,
                fmt_list(&r32),
                v.noise_band
            ),
        );
        let slope = if kept.len() >= 2 {
            loglog_slope(&kept, &r2)
        } else {
            f64::NAN
        };
        rep.verdict(
            format!("variance-k2-decay:{}", form.id),
            slope <= v.max_slope_k2,
            format!(
                "Var/k² = {}; log-log slope {slope:.3} (≤ {})",
                fmt_list(&r2),
                v.max_slope_k2
            ),
        );
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Domain experiments

/// ∫_D i∂∂̄log(c + B_k) ∧ ψ by a ball rule refined toward the boundary.
fn ddbar_log_pairing(
    field: &KernelField,
    c: f64,
    psi: &AmbientPolyForm,
    rule: &BallRule,
) -> Result<C64> {
    let mut acc = ComplexSum::new();
    for (z, w) in rule.nodes() {
        let h = field.ddbar_log(&z, c)?;
        let x = to_real(&z);
        let v = FormValue::from_hermitian_11(&h, 2)
            .wedge(&psi.eval(&x))
            .volume_density();
        acc.add(v * w);
    }
    Ok(acc.value())
}

/// Deterministic convergence of k⁻¹ i∂∂̄log(c + B_k) to mv·ξ on the boundary.
pub fn equi_domain(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("equi-domain", cfg);
    let d = &cfg.equi_domain;
    let ks = &d.k_grid;
    let table = table_for(max_of(ks), &cfg.cutoff)?;
    let mv = moments(&cfg.cutoff, 1)?.mv;
    let psi = psi_area();
    let limit = mv * sphere_integral(&(&AmbientPolyForm::contact_xi(4) * &psi), 16)?.re;
    let mut rows = Vec::new();
    let mut scaled = Vec::new();
    for &k in ks {
        let field = KernelField::new(table.clone(), cfg.cutoff, k, Weighting::Eta)?;
        let rule = BallRule::boundary_layer(k, d.per_panel, HopfRule::with_sizes(8, 4));
        let v = ddbar_log_pairing(&field, d.c, &psi, &rule)?.re / k;
        rows.push(ReportRow::new(k, "ddbar_log_pairing_over_k", v, limit));
        scaled.push((v - limit).abs() * k / (k.ln() + 1.0));
    }
    rep.push_series(rows);
    let c_fit = scaled[0];
    for (k, s) in ks.iter().zip(&scaled) {
        rep.rows.push(ReportRow::new(
            *k,
            "err_times_k_over_log_k_plus_1",
            *s,
            c_fit,
        ));
    }
    let ok = scaled.iter().all(|s| *s <= d.rate_factor * c_fit);
    rep.verdict(
        "equi-domain-rate",
        ok,
        format!(
            "err·k/(log k + 1) = {} with C fitted at k = {} ({c_fit:.4}); bound {}·C; limit mv·∫ξ∧ψ = {limit:.6}",
            fmt_list(&scaled),
            ks[0],
            d.rate_factor
        ),
    );
    Ok(rep)
}

/// Mean over draws of the grid (Z_u, ψ) for the κ = 1 ball ensemble against
/// (i/2π)∫ ∂∂̄log(1 + B_k) ∧ ψ.
pub fn expectation_domain(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("expectation-domain", cfg);
    let c = &cfg.expectation_domain;
    let k = c.k;
    let forms = [
        ("psi_area", psi_area()),
        ("psi_weighted_area", psi_weighted_area()),
    ];
    let psis: Vec<AmbientPolyForm> = forms.iter().map(|(_, f)| f.clone()).collect();
    let level = c.level.unwrap_or_else(|| grid_level(k, cfg.cutoff.delta2));
    let mut edges = vec![0.0];
    for j in 1..c.ball_panels {
        edges.push(1.0 - 0.5f64.powi(j as i32));
    }
    edges.push(1.0);
    let ball = BallRule::with_panels(&edges, c.ball_per_panel, HopfRule::new(c.ball_level)?);
    let grid = DomainGridPairing::new(HopfRule::new(level)?, ball, &psis)?;
    let ens = Ensemble::new(EnsembleConfig {
        n: 1,
        k,
        cutoff: cfg.cutoff,
        kappa: 1,
        master_seed: derive_seed(cfg.seed, "expectation-domain"),
    })?;
    let thr = cfg.zeros.regularity_threshold;
    let draws = par_map(cfg.jobs, c.trials, |t| {
        let poly: Polynomial = ens.function(&ens.sample(t as u64));
        let s = grid.sphere_evaluator().evaluate(&poly, 1.0)?;
        let r = regularity_filter(&poly, &s, grid.sphere_rule(), thr);
        if !r.accepted {
            return Ok(None);
        }
        let v = grid.pair_with_samples(&poly, &s)?;
        Ok(Some(v.iter().map(|g| g.total()).collect::<Vec<C64>>()))
    })?;
    let rejected = draws.iter().filter(|d| d.is_none()).count();
    let reject_frac = rejected as f64 / c.trials as f64;

    let table = table_for(k, &cfg.cutoff)?;
    let field = KernelField::new(table, cfg.cutoff, k, Weighting::Eta)?;
    let ref_rule = BallRule::boundary_layer(k, c.reference_per_panel, HopfRule::with_sizes(12, 8));
    // Pointwise expectations: E[∂u/u] = ∂log(1 + B), E log|u| = ½log(1 + B) − γ/2.
    let smooth = grid.pair_smooth(
        |z| {
            let s = z[0].norm_sqr() + z[1].norm_sqr();
            let [b, b1, _] = field.radial_derivs(s);
            let g = b1 / (1.0 + b);
            [z[0].conj() * g, z[1].conj() * g]
        },
        |z| {
            let s = z[0].norm_sqr() + z[1].norm_sqr();
            0.5 * (1.0 + field.radial_derivs(s)[0]).ln() - 0.5 * EULER_GAMMA
        },
    );
    let mv = moments(&cfg.cutoff, 1)?.mv;
    let xi = AmbientPolyForm::contact_xi(4);
    for (i, (id, psi)) in forms.iter().enumerate() {
        let reference = ddbar_log_pairing(&field, 1.0, psi, &ref_rule)? / (2.0 * PI);
        let budget = (smooth[i].total() - reference).norm();
        let vals: Vec<C64> = draws.iter().flatten().map(|v| v[i]).collect();
        let (mean, se, se_re, se_im) = complex_mean(&vals);
        let dev = (mean - reference).norm();
        rep.rows
            .push(ReportRow::new(k, format!("{id}_re"), mean.re, reference.re).with_std_err(se_re));
        rep.rows
            .push(ReportRow::new(k, format!("{id}_im"), mean.im, reference.im).with_std_err(se_im));
        let limit = mv / (2.0 * PI) * sphere_integral(&(&xi * psi), 16)?.re;
        rep.rows.push(
            ReportRow::new(k, format!("{id}_mean_over_k"), mean.re / k, limit)
                .with_std_err(se_re / k),
        );
        rep.verdict(
            format!("expectation-domain:{id}"),
            dev <= 3.0 * se + budget,
            format!(
                "mean {:.6}{:+.6}i over {} draws vs (i/2π)∫∂∂̄log(1+B_k)∧ψ = {:.6}; |diff| {dev:.3e} ≤ 3·SE {:.3e} + grid budget {budget:.1e}",
                mean.re,
                mean.im,
                vals.len(),
                reference.re,
                3.0 * se
            ),
        );
    }
    rep.rows
        .push(ReportRow::new(k, "reject_fraction", reject_frac, 0.0));
    rep.verdict(
        "domain-rejects",
        reject_frac <= c.max_reject,
        format!(
            "{rejected} of {} draws rejected by the boundary regularity filter",
            c.trials
        ),
    );
    if rejected > 0 {
        rep.warnings.push(format!(
            "{rejected} draws rejected by the boundary regularity filter"
        ));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Exact values

/// Exact-value checks: the indicator mean value, monomial norms against the
/// Beta formula, and the covariance identity of the ensemble.
pub fn exact_values(cfg: &LabConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("exact-values", cfg);
    let ind = CutoffSpec::indicator(0.0, 1.0)?;
    let mv_ind = moments(&ind, 1)?.mv;
    rep.rows
        .push(ReportRow::new(0.0, "mv_indicator", mv_ind, 2.0 / 3.0));
    rep.verdict(
        "mv-indicator",
        (mv_ind - 2.0 / 3.0).abs() <= 1e-12,
        format!("mv(1_[0,1]², n = 1) = {mv_ind:.15}"),
    );

    let rule = HopfRule::with_sizes(40, 4);
    let mut worst: f64 = 0.0;
    for m in 0..=60u32 {
        for alpha in MultiIndex::of_degree(2, m) {
            let q = monomial_norm(&alpha, &rule)?;
            let c = monomial_norm_closed(&alpha);
            worst = worst.max((q - c).abs() / c);
        }
    }
    rep.rows
        .push(ReportRow::new(0.0, "monomial_norm_max_rel_err", worst, 0.0));
    rep.verdict(
        "monomial-norms",
        worst <= 1e-10,
        format!("max relative deviation from 2π²α!/(|α|+1)! up to degree 60: {worst:.2e}"),
    );

    let k = 16.0;
    let table = table_for(k, &cfg.cutoff)?;
    let field = KernelField::new(table, cfg.cutoff, k, Weighting::Eta)?;
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, "exact-values"));
    let x = SpherePoint::random(1, &mut rng);
    let y = SpherePoint::random(1, &mut rng);
    let n = 10_000usize;
    let mut ok = true;
    let mut details = Vec::new();
    for kappa in [0u8, 1] {
        let ens = Ensemble::new(EnsembleConfig {
            n: 1,
            k,
            cutoff: cfg.cutoff,
            kappa,
            master_seed: derive_seed(cfg.seed, &format!("covariance-{kappa}")),
        })?;
        let prods = par_map(cfg.jobs, n, |t| {
            let f = ens.function(&ens.sample(t as u64));
            Ok(f.value(x.z()) * f.value(y.z()).conj())
        })?;
        let (mean, _, se_re, se_im) = complex_mean(&prods);
        let target = field.kernel(&x, &y) + (kappa as f64).powi(2);
        let pass = (mean.re - target.re).abs() <= 4.0 * se_re
            && (mean.im - target.im).abs() <= 4.0 * se_im;
        ok &= pass;
        rep.rows.push(
            ReportRow::new(k, format!("covariance_re_kappa{kappa}"), mean.re, target.re)
                .with_std_err(se_re),
        );
        rep.rows.push(
            ReportRow::new(k, format!("covariance_im_kappa{kappa}"), mean.im, target.im)
                .with_std_err(se_im),
        );
        details.push(format!(
            "κ = {kappa}: {:.5}{:+.5}i vs {:.5}{:+.5}i (SE {:.1e}, {:.1e})",
            mean.re, mean.im, target.re, target.im, se_re, se_im
        ));
    }
    rep.verdict("covariance-identity", ok, details.join("; "));
    Ok(rep)
}
