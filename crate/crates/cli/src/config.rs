//! Experiment configuration files.
//!
//! A config is a flat JSON object. Unknown keys are rejected so typos surface
//! as errors instead of silently falling back to defaults. [`ExperimentConfig::resolve`]
//! fills every default in place; the resolved form is what manifests echo, so
//! rerunning an echoed config reproduces the run exactly.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thinfilm::evolution::StepControls;
use thinfilm::perturb::{PerturbationKind, PerturbationSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Steady,
    Evolve,
    Sweep,
    Bifurcation,
    Analyze,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Steady => "steady",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Bifurcation => "bifurcation",
            ExperimentKind::Analyze => "analyze",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(rename = "X", default)]
    pub x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationName {
    SecondDerivative,
    FirstDerivative,
    Cosine,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub kind: PerturbationName,
    pub amplitude: f64,
    #[serde(default)]
    pub wavenumber: Option<f64>,
    #[serde(default)]
    pub decay: Option<f64>,
    /// Defaults to the top-level `seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PerturbationConfig {
    pub fn spec(&self) -> Result<PerturbationSpec> {
        let kind = match self.kind {
            PerturbationName::SecondDerivative => PerturbationKind::SecondDerivative,
            PerturbationName::FirstDerivative => PerturbationKind::FirstDerivative,
            PerturbationName::Cosine => PerturbationKind::Cosine {
                wavenumber: self
                    .wavenumber
                    .ok_or_else(|| CliError::config("perturbation.wavenumber", "required for kind cosine"))?,
            },
            PerturbationName::Random => PerturbationKind::Random {
                decay: self.decay.ok_or_else(|| CliError::config("perturbation.decay", "required for kind random"))?,
                seed: self.seed.unwrap_or(0),
            },
        };
        PerturbationSpec::new(kind, self.amplitude).map_err(|e| CliError::config("perturbation", e.to_string()))
    }
}

/// One term of the literal initial-data expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "lowercase", deny_unknown_fields)]
pub enum Term {
    /// `c cos(k x)`; `k = 0` gives a constant.
    Cos { c: f64, k: f64 },
    /// `c exp(-a sin^2((x - x0)/2))`.
    Bump { c: f64, a: f64, x0: f64 },
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Term::Cos { c, k } => c * (k * x).cos(),
            Term::Bump { c, a, x0 } => c * (-a * (0.5 * (x - x0)).sin().powi(2)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// Snapshot every this many accepted steps; 0 writes only the initial
    /// and final fields.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn default_dir() -> String {
    "output".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), snapshot_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    #[serde(default)]
    pub n: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub n_list: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Use the equal-period, equal-area partner of `alpha` as the base state
    /// and `alpha`'s own state as the periodic reference.
    #[serde(default)]
    pub partner: Option<bool>,
    #[serde(default)]
    pub target_period: Option<f64>,
    #[serde(default)]
    pub bond: Option<f64>,
    #[serde(default)]
    pub hbar: Option<f64>,
    #[serde(default)]
    pub initial: Option<Vec<Term>>,
    /// Replace the rescaled steady state by the exact mesh steady state.
    #[serde(default)]
    pub fd_base: Option<bool>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub perturbation: Option<PerturbationConfig>,
    #[serde(default)]
    pub controls: StepControls,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub classify_tol: Option<f64>,
    /// Exponent `p` of `v ~ (t_c - t)^p` for singular-time estimates.
    #[serde(default)]
    pub singularity_exponent: Option<f64>,
    /// `h_min` level defining the half-time.
    #[serde(default)]
    pub half_time_level: Option<f64>,
    /// Minima below this fraction of the mean count as touch-downs.
    #[serde(default)]
    pub touchdown_level: Option<f64>,
    #[serde(default)]
    pub stop_when_flat: Option<f64>,
    #[serde(default)]
    pub stop_when_stationary: Option<f64>,
    #[serde(default)]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha_count: Option<usize>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Bisection steps on `n` after bracketing, at most [`MAX_REFINE`].
    #[serde(default)]
    pub refine: Option<usize>,
    /// Run directory read by `analyze`.
    #[serde(default)]
    pub run_dir: Option<String>,
}

pub const MAX_REFINE: usize = 6;
pub const DEFAULT_N: usize = 1024;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;
pub const DEFAULT_ALPHA_COUNT: usize = 40;

/// How the base state of an experiment is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Steady,
    Constant,
    Expression,
}

fn bad(field: &str, message: impl Into<String>) -> CliError {
    CliError::config(field, message)
}

fn positive(field: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(bad(field, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| CliError::Parse { path: origin.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind.unwrap_or(ExperimentKind::Evolve)
    }

    pub fn selection(&self) -> Option<Selection> {
        match (self.alpha.is_some(), self.hbar.is_some(), self.initial.is_some()) {
            (true, false, false) => Some(Selection::Steady),
            (false, true, false) => Some(Selection::Constant),
            (false, false, true) => Some(Selection::Expression),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates the config and materializes every default.
    pub fn resolve(mut self) -> Result<Self> {
        let kind = self.kind();
        self.kind = Some(kind);
        if kind == ExperimentKind::Analyze {
            if self.run_dir.is_none() {
                return Err(bad("run_dir", "required for analyze"));
            }
            return Ok(self);
        }
        self.resolve_model(kind)?;
        if kind == ExperimentKind::Bifurcation {
            self.resolve_bifurcation()?;
            return Ok(self);
        }
        let selection = self
            .selection()
            .ok_or_else(|| bad("alpha/hbar/initial", "give exactly one steady-selection mode"))?;
        if kind == ExperimentKind::Steady && selection != Selection::Steady {
            return Err(bad("alpha", "steady experiments need alpha"));
        }
        positive("bond", self.bond)?;
        positive("hbar", self.hbar)?;
        positive("target_period", self.target_period)?;
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(bad("alpha", format!("must lie in (0, 1), got {a}")));
            }
        }
        if self.partner.unwrap_or(false) && selection != Selection::Steady {
            return Err(bad("partner", "only meaningful with alpha"));
        }
        if selection != Selection::Steady {
            for (field, set) in [("target_period", self.target_period.is_some()), ("partner", self.partner.is_some())] {
                if set {
                    return Err(bad(field, "only meaningful with alpha"));
                }
            }
            self.bond.get_or_insert(1.0);
        } else {
            self.partner.get_or_insert(false);
            self.target_period.get_or_insert(2.0 * PI);
        }
        self.fd_base.get_or_insert(true);
        self.resolve_grid(selection)?;
        if let Some(p) = &mut self.perturbation {
            if p.kind == PerturbationName::Random {
                p.seed.get_or_insert(self.seed);
            }
            p.spec()?;
        }
        self.controls.validate().map_err(|e| bad("controls", e.to_string()))?;
        let n = self.grid.n.unwrap_or(DEFAULT_N);
        if n > self.controls.n_max {
            return Err(bad("grid.N", format!("{n} exceeds controls.n_max = {}", self.controls.n_max)));
        }
        positive("classify_tol", self.classify_tol)?;
        self.classify_tol.get_or_insert(DEFAULT_CLASSIFY_TOL);
        positive("half_time_level", self.half_time_level)?;
        self.half_time_level.get_or_insert(0.5);
        positive("touchdown_level", self.touchdown_level)?;
        self.touchdown_level.get_or_insert(0.5);
        positive("stop_when_flat", self.stop_when_flat)?;
        positive("stop_when_stationary", self.stop_when_stationary)?;
        if let Some(p) = self.singularity_exponent {
            if !(p.is_finite() && p != 0.0) {
                return Err(bad("singularity_exponent", "must be finite and nonzero"));
            }
        }
        if kind == ExperimentKind::Sweep {
            match self.workers {
                Some(0) => return Err(bad("workers", "must be at least 1")),
                None => self.workers = Some(1),
                _ => {}
            }
            let r = *self.refine.get_or_insert(0);
            if r > MAX_REFINE {
                return Err(bad("refine", format!("at most {MAX_REFINE} bisection steps, got {r}")));
            }
        } else {
            for (field, set) in [("workers", self.workers.is_some()), ("refine", self.refine.is_some())] {
                if set {
                    return Err(bad(field, "only meaningful for sweep"));
                }
            }
        }
        Ok(self)
    }

    fn resolve_model(&mut self, kind: ExperimentKind) -> Result<()> {
        if kind == ExperimentKind::Sweep {
            let list = self.n_list.as_ref().ok_or_else(|| bad("n_list", "required for sweep"))?;
            if list.is_empty() {
                return Err(bad("n_list", "must not be empty"));
            }
            if list.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(bad("n_list", "entries must be finite and >= 0"));
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("n_list", "must be strictly increasing"));
            }
            if self.n.is_some() || self.m.is_some() {
                return Err(bad("n/m", "a sweep fixes q and varies n through n_list"));
            }
            if self.q.is_none() {
                return Err(bad("q", "required for sweep"));
            }
            return Ok(());
        }
        if self.n_list.is_some() {
            return Err(bad("n_list", "only meaningful for sweep"));
        }
        let n = *self.n.get_or_insert(1.0);
        if !(n.is_finite() && n >= 0.0) {
            return Err(bad("n", format!("must be >= 0, got {n}")));
        }
        match (self.m, self.q) {
            (Some(m), Some(q)) => {
                if (m - n + 1.0 - q).abs() > 1e-12 * q.abs().max(1.0) {
                    return Err(bad("q", format!("inconsistent with m - n + 1 = {}", m - n + 1.0)));
                }
            }
            (Some(m), None) => self.q = Some(m - n + 1.0),
            (None, Some(q)) => self.m = Some(q + n - 1.0),
            (None, None) => return Err(bad("q", "give q or m")),
        }
        Ok(())
    }

    fn resolve_grid(&mut self, selection: Selection) -> Result<()> {
        let n = *self.grid.n.get_or_insert(DEFAULT_N);
        if n < 8 || !n.is_power_of_two() {
            return Err(bad("grid.N", format!("must be a power of two >= 8, got {n}")));
        }
        let base = self.target_period.unwrap_or(2.0 * PI);
        let x = *self.grid.x.get_or_insert(base);
        positive("grid.X", Some(x))?;
        if selection == Selection::Steady {
            let k = self.periods()?;
            if n / k < 8 {
                return Err(bad("grid.N", format!("{n} points cannot hold {k} periods of the steady state")));
            }
        }
        if let Some(terms) = &self.initial {
            if terms.is_empty() {
                return Err(bad("initial", "needs at least one term"));
            }
            for t in terms {
                if let Term::Cos { k, .. } = t {
                    let modes = k * x / (2.0 * PI);
                    if (modes - modes.round()).abs() > 1e-9 {
                        return Err(bad("initial", format!("cos term with k = {k} is not periodic on X = {x}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn resolve_bifurcation(&mut self) -> Result<()> {
        positive("bond", self.bond)?;
        positive("target_period", self.target_period)?;
        self.bond.get_or_insert(1.0);
        self.target_period.get_or_insert(2.0 * PI);
        if self.alpha_grid.is_none() {
            let count = *self.alpha_count.get_or_insert(DEFAULT_ALPHA_COUNT);
            if count < 2 {
                return Err(bad("alpha_count", "need at least two points"));
            }
            self.alpha_grid = Some((1..=count).map(|j| j as f64 / (count + 1) as f64).collect());
        }
        let grid = self.alpha_grid.as_ref().expect("set above");
        if grid.is_empty() || grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(bad("alpha_grid", "entries must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Number of steady-state periods in the domain (a power of two).
    pub fn periods(&self) -> Result<usize> {
        let t = self.target_period.unwrap_or(2.0 * PI);
        let x = self.grid.x.unwrap_or(t);
        let ratio = x / t;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 || k < 1.0 || !(k as usize).is_power_of_two() {
            return Err(bad("grid.X", format!("must be a power-of-two multiple of target_period {t}, got {x}")));
        }
        Ok(k as usize)
    }

    /// `n` from the resolved model, or the given sweep exponent.
    pub fn with_n(&self, n: f64) -> Self {
        let q = self.q.expect("resolved");
        Self {
            kind: Some(ExperimentKind::Evolve),
            n: Some(n),
            m: Some(q + n - 1.0),
            n_list: None,
            workers: None,
            refine: None,
            ..self.clone()
        }
    }
}
