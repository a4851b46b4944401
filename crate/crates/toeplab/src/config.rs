//! Run configuration: one TOML file with a section per experiment. Every
//! key has a default, so an empty file (or no file) is a valid config.

use crate::cutoff_moments::CutoffSpec;
use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Default master seed (fixed, never time-based).
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Minimum number of trials behind any statistical verdict.
pub const MIN_TRIALS: usize = 100;

/// Grid level for a Hopf grid resolving degrees up to δ₂k without aliasing:
/// max(24, 8⌈(δ₂k/2 + 16)/8⌉) Gauss nodes in u and twice that per angle.
pub fn grid_level(k: f64, delta2: f64) -> usize {
    let l = (delta2 * k / 2.0 + 16.0) / 8.0;
    (8 * l.ceil() as usize).max(24)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    /// Master seed; every experiment derives its stream from it.
    pub seed: u64,
    /// Output directory (not part of the config hash).
    pub out: Option<String>,
    /// Worker threads for Monte Carlo trials (not part of the config hash).
    pub jobs: usize,
    /// Treat warnings as failures.
    pub strict: bool,
    pub cutoff: CutoffSpec,
    pub kernel: KernelSection,
    pub embedding: EmbeddingSection,
    pub zeros: ZerosSection,
    pub expectation_cr: ExpectationCrSection,
    pub equi_cr: CrGridSection,
    pub variance_cr: VarianceCrSection,
    pub equi_domain: EquiDomainSection,
    pub expectation_domain: ExpectationDomainSection,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            out: None,
            jobs: 1,
            strict: false,
            cutoff: CutoffSpec::default(),
            kernel: KernelSection::default(),
            embedding: EmbeddingSection::default(),
            zeros: ZerosSection::default(),
            expectation_cr: ExpectationCrSection::default(),
            equi_cr: CrGridSection::default(),
            variance_cr: VarianceCrSection::default(),
            equi_domain: EquiDomainSection::default(),
            expectation_domain: ExpectationDomainSection::default(),
        }
    }
}

/// Diagonal kernel and β_k asymptotics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    pub k_grid: Vec<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            k_grid: vec![32.0, 64.0, 128.0],
        }
    }
}

/// Fubini–Study expansion, Hessian identity, definiteness and separation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub k_grid: Vec<f64>,
    /// Constant extra component κ ∈ {0, 1}.
    pub kappa: u8,
    pub hessian_k: f64,
    pub hessian_points: usize,
    /// Geodesic step of the finite-difference Hessian.
    pub fd_step: f64,
    /// Relative tolerance between finite differences and 2ℋ^F.
    pub hessian_tol: f64,
    pub definite_k_grid: Vec<f64>,
    pub definite_points: usize,
    pub separation_delta: f64,
    pub separation_samples: usize,
    pub separation_bound: f64,
    /// Relative tolerance of the contact-direction limit at the largest k.
    pub contact_tol: f64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        Self {
            k_grid: vec![32.0, 64.0, 128.0, 256.0],
            kappa: 0,
            hessian_k: 64.0,
            hessian_points: 100,
            fd_step: 5e-4,
            hessian_tol: 1e-4,
            definite_k_grid: vec![64.0, 128.0, 256.0],
            definite_points: 100,
            separation_delta: 0.5,
            separation_samples: 3000,
            separation_bound: 0.5,
            contact_tol: 0.05,
        }
    }
}

/// Singular pairings (regularization and cubature controls).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZerosSection {
    /// δ schedule relative to the mean square of the function.
    pub deltas: Vec<f64>,
    pub regularity_threshold: f64,
    pub sphere_tol_rel: f64,
    pub sphere_max_cells: usize,
    pub ball_tol_rel: f64,
    pub ball_max_cells: usize,
    /// Nodes of the direct zero-set parameterizations.
    pub curve_level: usize,
    /// Oracle tolerance (relative).
    pub oracle_tol: f64,
}

impl Default for ZerosSection {
    fn default() -> Self {
        Self {
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            regularity_threshold: 1e-6,
            sphere_tol_rel: 1e-7,
            sphere_max_cells: 40_000,
            ball_tol_rel: 1e-6,
            ball_max_cells: 6000,
            curve_level: 64,
            oracle_tol: 0.01,
        }
    }
}

/// Monte Carlo check of E 𝒞_f(ψ) = ∫ β_k ∧ ψ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectationCrSection {
    pub k: f64,
    pub trials: usize,
    pub kappa: u8,
    /// Hopf grid level of the per-draw estimator (default: [`grid_level`]).
    pub level: Option<usize>,
    /// Level of the reference quadrature of β_k ∧ ψ.
    pub reference_level: usize,
    /// Largest tolerated fraction of draws rejected by the regularity filter.
    pub max_reject: f64,
}

impl Default for ExpectationCrSection {
    fn default() -> Self {
        Self {
            k: 48.0,
            trials: 4000,
            kappa: 0,
            level: None,
            reference_level: 64,
            max_reject: 0.05,
        }
    }
}

/// Per-k Monte Carlo of k^{-1}(Z_f, ψ) on a k grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrGridSection {
    pub k_grid: Vec<f64>,
    pub trials: usize,
    pub level: Option<usize>,
    /// Accepted band for the observed order of the mean gap.
    pub order_band: [f64; 2],
}

impl Default for CrGridSection {
    fn default() -> Self {
        Self {
            k_grid: vec![16.0, 32.0, 64.0, 128.0],
            trials: 1500,
            level: None,
            order_band: [0.6, 1.4],
        }
    }
}

/// Variance decay of (Z_f, ψ); shares its samples with `equi_cr` when the
/// grids agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarianceCrSection {
    pub k_grid: Vec<f64>,
    pub trials: usize,
    pub level: Option<usize>,
    /// First k of the monotonicity check.
    pub k0: f64,
    /// Allowed growth factor of Var/k^{3/2} between successive k.
    pub noise_band: f64,
    /// Largest accepted log-log slope of Var/k².
    pub max_slope_k2: f64,
}

impl Default for VarianceCrSection {
    fn default() -> Self {
        let g = CrGridSection::default();
        Self {
            k_grid: g.k_grid,
            trials: g.trials,
            level: None,
            k0: 16.0,
            noise_band: 2.0,
            max_slope_k2: -0.25,
        }
    }
}

/// Deterministic convergence of k^{-1} i∂∂̄log(c + B_k) on the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquiDomainSection {
    pub k_grid: Vec<f64>,
    pub c: f64,
    pub per_panel: usize,
    /// Allowed growth of err·k/(log k + 1) over its value at the first k.
    pub rate_factor: f64,
}

impl Default for EquiDomainSection {
    fn default() -> Self {
        Self {
            k_grid: vec![16.0, 32.0, 64.0, 128.0],
            c: 1.0,
            per_panel: 8,
            rate_factor: 2.0,
        }
    }
}

/// Monte Carlo check of E(Z_u, ψ) = (i/2π)∫ ∂∂̄log(1 + B_k) ∧ ψ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectationDomainSection {
    pub k: f64,
    pub trials: usize,
    pub level: Option<usize>,
    /// Hopf level of the ball grid shells.
    pub ball_level: usize,
    /// Radial panels [1 − 2^{-j}, 1 − 2^{-j-1}] toward the boundary.
    pub ball_panels: usize,
    pub ball_per_panel: usize,
    pub reference_per_panel: usize,
    pub max_reject: f64,
}

impl Default for ExpectationDomainSection {
    fn default() -> Self {
        Self {
            k: 32.0,
            trials: 2000,
            level: None,
            ball_level: 16,
            ball_panels: 9,
            ball_per_panel: 4,
            reference_per_panel: 8,
            max_reject: 0.05,
        }
    }
}

/// Command-line overrides; each one replaces the corresponding key in
/// every section it applies to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub level: Option<usize>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub strict: bool,
}

impl LabConfig {
    /// Parses a TOML document and validates it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(g) = &o.k_grid {
            self.kernel.k_grid = g.clone();
            self.embedding.k_grid = g.clone();
            self.equi_cr.k_grid = g.clone();
            self.variance_cr.k_grid = g.clone();
            self.variance_cr.k0 = g.iter().copied().fold(f64::INFINITY, f64::min);
            self.equi_domain.k_grid = g.clone();
        }
        if let Some(n) = o.trials {
            self.expectation_cr.trials = n;
            self.equi_cr.trials = n;
            self.variance_cr.trials = n;
            self.expectation_domain.trials = n;
        }
        if let Some(l) = o.level {
            self.expectation_cr.level = Some(l);
            self.equi_cr.level = Some(l);
            self.variance_cr.level = Some(l);
            self.expectation_domain.level = Some(l);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        self.strict |= o.strict;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        self.cutoff
            .validate()
            .map_err(|e| LabError::Config(e.to_string()))?;
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        let grids = [
            ("kernel.k_grid", &self.kernel.k_grid),
            ("embedding.k_grid", &self.embedding.k_grid),
            ("embedding.definite_k_grid", &self.embedding.definite_k_grid),
            ("equi_cr.k_grid", &self.equi_cr.k_grid),
            ("variance_cr.k_grid", &self.variance_cr.k_grid),
            ("equi_domain.k_grid", &self.equi_domain.k_grid),
        ];
        for (name, g) in grids {
            if g.is_empty() || g.iter().any(|k| !(*k >= 1.0 && k.is_finite())) {
                return bad(format!("{name} must be a non-empty list of k ≥ 1"));
            }
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return bad(format!("{name} must be strictly increasing"));
            }
        }
        let trials = [
            ("expectation_cr.trials", self.expectation_cr.trials),
            ("equi_cr.trials", self.equi_cr.trials),
            ("variance_cr.trials", self.variance_cr.trials),
            ("expectation_domain.trials", self.expectation_domain.trials),
        ];
        for (name, n) in trials {
            if n < MIN_TRIALS {
                return bad(format!(
                    "{name} = {n}: statistical verdicts need at least {MIN_TRIALS} trials"
                ));
            }
        }
        if self.embedding.kappa > 1 || self.expectation_cr.kappa > 1 {
            return bad("κ must be 0 or 1".into());
        }
        if self.zeros.deltas.len() < 2
            || self
                .zeros
                .deltas
                .windows(2)
                .any(|w| !(w[1] < w[0] && w[1] > 0.0))
        {
            return bad(
                "zeros.deltas must be a decreasing list of at least two positive values".into(),
            );
        }
        for l in [
            self.expectation_cr.level,
            self.equi_cr.level,
            self.variance_cr.level,
            self.expectation_domain.level,
        ]
        .into_iter()
        .flatten()
        {
            if l < 4 {
                return bad(format!("grid level {l} is below the minimum 4"));
            }
        }
        if !(self.equi_domain.c > 0.0) {
            return bad("equi_domain.c must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 (hex) of every result-affecting parameter.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.jobs = 1;
        c.strict = false;
        let canonical = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Largest k used anywhere (sizes the degree table).
    pub fn max_k(&self) -> f64 {
        self.kernel
            .k_grid
            .iter()
            .chain(&self.embedding.k_grid)
            .chain(&self.embedding.definite_k_grid)
            .chain(&self.equi_cr.k_grid)
            .chain(&self.variance_cr.k_grid)
            .chain(&self.equi_domain.k_grid)
            .chain([
                &self.embedding.hessian_k,
                &self.expectation_cr.k,
                &self.expectation_domain.k,
            ])
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Per-experiment master seed: the first 8 bytes of SHA-256(seed ‖ label).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
