//! Orchestration of single experiments and their artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thinfilm::analysis::{
    bifurcation_branch, classify_outcome, count_local_minima_below, energy_unchecked, estimate_singularity_time,
    estimate_singularity_time_fit, half_time, EnergyParams, References, SingularityEstimate, Stability, TREND_WINDOW,
};
use thinfilm::evolution::{evolve_run, Outcome, Probes, RunRecord, SeriesRow};
use thinfilm::fdsteady::fd_steady_state_from;
use thinfilm::steady::{
    find_matching_alpha, scale_to_period, scale_with_bond, solve_canonical_sampled, RescaledSteadyState,
    SteadyManifest, DEFAULT_TOL,
};
use thinfilm::{make_grid, ModelParams, PeriodicField};

use crate::config::{ExperimentConfig, ExperimentKind, Selection};
use crate::error::{CliError, Result};

/// Base state of an experiment before any perturbation.
#[derive(Debug, Clone)]
pub struct BaseState {
    pub field: PeriodicField,
    pub params: ModelParams,
    /// Periodic steady state used as the `RelaxedToPeriodic` reference.
    pub reference: Option<PeriodicField>,
    pub steady: Option<SteadyManifest>,
    pub reference_steady: Option<SteadyManifest>,
    pub fd_residual: Option<f64>,
    pub fd_iterations: Option<usize>,
}

fn tile(profile: &PeriodicField, copies: usize, x: f64) -> Result<PeriodicField> {
    let mut v = Vec::with_capacity(profile.len() * copies);
    for _ in 0..copies {
        v.extend_from_slice(profile.values());
    }
    Ok(PeriodicField::new(x, v)?)
}

struct Built {
    field: PeriodicField,
    manifest: SteadyManifest,
    residual: Option<f64>,
    iterations: Option<usize>,
}

fn finish_steady(s: &RescaledSteadyState, cfg: &ExperimentConfig, params: &ModelParams) -> Result<Built> {
    let k = cfg.periods()?;
    let tiled = tile(&s.profile, k, cfg.grid.x.expect("resolved"))?;
    let mut manifest = s.manifest();
    manifest.n = tiled.len();
    if cfg.fd_base.unwrap_or(true) {
        let fd = fd_steady_state_from(&tiled, params)?;
        Ok(Built { field: fd.profile, manifest, residual: Some(fd.residual_max), iterations: Some(fd.iterations) })
    } else {
        Ok(Built { field: tiled, manifest, residual: None, iterations: None })
    }
}

/// Builds the unperturbed state selected by a resolved config.
pub fn build_base(cfg: &ExperimentConfig) -> Result<BaseState> {
    let q = cfg.q.expect("resolved");
    let n = cfg.n.unwrap_or(1.0);
    let nn = cfg.grid.n.expect("resolved");
    let x = cfg.grid.x.expect("resolved");
    match cfg.selection().expect("resolved") {
        Selection::Steady => {
            let t = cfg.target_period.expect("resolved");
            let per = nn / cfg.periods()?;
            let alpha = cfg.alpha.expect("resolved");
            let c = solve_canonical_sampled(q, alpha, DEFAULT_TOL, per)?;
            let s = match cfg.bond {
                Some(b) => scale_with_bond(&c, b, t)?,
                None => scale_to_period(&c, t)?,
            };
            let params = ModelParams::from_q(n, q, s.params.bond)?;
            let primary = finish_steady(&s, cfg, &params)?;
            if cfg.partner.unwrap_or(false) {
                let m = find_matching_alpha(q, alpha)?;
                let c2 = solve_canonical_sampled(q, m.alpha, DEFAULT_TOL, per)?;
                let s2 = scale_with_bond(&c2, s.params.bond, t)?;
                let partner = finish_steady(&s2, cfg, &params)?;
                return Ok(BaseState {
                    field: partner.field,
                    params,
                    reference: Some(primary.field),
                    steady: Some(partner.manifest),
                    reference_steady: Some(primary.manifest),
                    fd_residual: partner.residual,
                    fd_iterations: partner.iterations,
                });
            }
            Ok(BaseState {
                reference: Some(primary.field.clone()),
                field: primary.field,
                params,
                steady: Some(primary.manifest),
                reference_steady: None,
                fd_residual: primary.residual,
                fd_iterations: primary.iterations,
            })
        }
        Selection::Constant => {
            let params = ModelParams::from_q(n, q, cfg.bond.expect("resolved"))?;
            let field = PeriodicField::constant(x, nn, cfg.hbar.expect("resolved"))?;
            Ok(BaseState {
                field,
                params,
                reference: None,
                steady: None,
                reference_steady: None,
                fd_residual: None,
                fd_iterations: None,
            })
        }
        Selection::Expression => {
            let params = ModelParams::from_q(n, q, cfg.bond.expect("resolved"))?;
            let terms = cfg.initial.clone().expect("resolved");
            let field = make_grid(x, nn, |xi| terms.iter().map(|t| t.eval(xi)).sum())?;
            Ok(BaseState {
                field,
                params,
                reference: None,
                steady: None,
                reference_steady: None,
                fd_residual: None,
                fd_iterations: None,
            })
        }
    }
}

/// Base state plus the configured perturbation.
pub fn initial_data(cfg: &ExperimentConfig, base: &BaseState) -> Result<PeriodicField> {
    match &cfg.perturbation {
        Some(p) => Ok(p.spec()?.apply(&base.field)?),
        None => Ok(base.field.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub mass_initial: f64,
    pub mass_drift: f64,
    /// Largest energy increase between consecutive resolved rows on one mesh.
    pub max_energy_increase: f64,
    pub hmin_final: f64,
    pub hmax_final: f64,
    pub half_time: Option<f64>,
    pub touchdown_count: usize,
    pub touchdown_locations: Vec<f64>,
    pub singularity: Option<SingularityEstimate>,
}

/// Mass drift relative to the first row and the largest same-mesh energy increase.
pub fn series_checks(series: &[SeriesRow]) -> (f64, f64) {
    let m0 = series.first().map(|r| r.mass).unwrap_or(0.0);
    let drift = series.iter().filter(|r| r.resolved).map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max);
    let rise = series
        .windows(2)
        .filter(|w| w[0].resolved && w[1].resolved && w[0].n == w[1].n)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0, f64::max);
    (drift, rise)
}

/// Samples thinned so consecutive values differ by at least 5%.
fn thinned(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &s in series.iter().rev() {
        match out.last() {
            Some(&(_, v)) if ((s.1 - v) / v).abs() < 0.05 => {}
            _ => out.push(s),
        }
        if out.len() == TREND_WINDOW {
            break;
        }
    }
    out.reverse();
    out
}

/// Default singular-time exponent for the cases where the similarity
/// exponent is known: touch-down for `q = -3, n = 3`, blow-up for `q = 4, n = 1`.
pub fn default_exponent(params: &ModelParams, blowup: bool) -> Option<f64> {
    match (params.q, params.n, blowup) {
        (q, n, false) if q == -3.0 && n == 3.0 => Some(0.2),
        (q, n, true) if q == 4.0 && n == 1.0 => Some(-1.0 / 7.0),
        _ => None,
    }
}

/// Singular-time estimate from the `h_min` (touch-down) or `h_max`
/// (blow-up) series. Without a known exponent the three-sample fit is used.
pub fn singularity_estimate(series: &[(f64, f64)], params: &ModelParams, blowup: bool, p: Option<f64>) -> Option<SingularityEstimate> {
    let s = thinned(series);
    match p.or_else(|| default_exponent(params, blowup)) {
        Some(p) => estimate_singularity_time(&s, p).ok(),
        None => estimate_singularity_time_fit(&s).ok(),
    }
}

/// Time series rows of `series.csv`, with mesh sizes taken from `n_history`.
pub fn parse_series_csv(text: &str, n_history: &[(f64, usize)]) -> Result<Vec<SeriesRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "t,dt,hmin,hmax,mass,energy,resolved" {
        return Err(CliError::config("series.csv", format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        let at = |j: usize| -> Result<f64> {
            f.get(j)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::config("series.csv", format!("line {}: bad column {}", i + 2, j + 1)))
        };
        let t = at(0)?;
        let resolved = match f.get(6).map(|s| s.trim()) {
            Some("true") => true,
            Some("false") => false,
            _ => return Err(CliError::config("series.csv", format!("line {}: bad resolved flag", i + 2))),
        };
        let n = n_history.iter().rev().find(|(th, _)| *th < t || *th == 0.0).map(|e| e.1).unwrap_or(0);
        rows.push(SeriesRow { t, dt: at(1)?, hmin: at(2)?, hmax: at(3)?, mass: at(4)?, energy: at(5)?, resolved, n });
    }
    Ok(rows)
}

/// A finished evolution with its classification.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub base: BaseState,
    pub initial: PeriodicField,
    pub record: RunRecord,
    pub outcome: Outcome,
    pub diagnostics: RunDiagnostics,
}

/// Runs a resolved evolve config from prepared initial data.
pub fn simulate_from(cfg: &ExperimentConfig, base: BaseState, initial: PeriodicField) -> Result<Simulation> {
    let params = base.params.with_n(cfg.n.expect("resolved"))?;
    let level = cfg.half_time_level.expect("resolved");
    let probes = Probes {
        snapshot_every: cfg.output.snapshot_every,
        capture_levels: vec![level],
        stop_when_flat: cfg.stop_when_flat,
        stop_when_stationary: cfg.stop_when_stationary,
    };
    let record = evolve_run(&initial, &params, &cfg.controls, &probes)?;
    let refs = References { constant: Some(initial.mean()), steady: base.reference.as_ref() };
    let outcome = classify_outcome(&record, &refs, cfg.classify_tol.expect("resolved"))?;
    let (mass_drift, max_energy_increase) = series_checks(&record.series);
    let f = &record.final_field;
    let (touchdown_count, touchdown_locations) =
        count_local_minima_below(f, cfg.touchdown_level.expect("resolved") * f.mean());
    let singularity = match outcome {
        Outcome::TouchDown { .. } => {
            singularity_estimate(&record.hmin_series(), &params, false, cfg.singularity_exponent)
        }
        Outcome::BlowUp { .. } => singularity_estimate(&record.hmax_series(), &params, true, cfg.singularity_exponent),
        _ => None,
    };
    let diagnostics = RunDiagnostics {
        mass_initial: initial.mass(),
        mass_drift,
        max_energy_increase,
        hmin_final: f.min(),
        hmax_final: f.max(),
        half_time: half_time(&record, level).ok(),
        touchdown_count,
        touchdown_locations,
        singularity,
    };
    Ok(Simulation { base, initial, record, outcome, diagnostics })
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    let base = build_base(cfg)?;
    let initial = initial_data(cfg, &base)?;
    simulate_from(cfg, base, initial)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSummary {
    pub mean: f64,
    pub hmin: f64,
    pub hmax: f64,
    pub energy: f64,
    pub steady: Option<SteadyManifest>,
    pub reference_steady: Option<SteadyManifest>,
    pub fd_residual: Option<f64>,
    pub fd_iterations: Option<usize>,
}

impl BaseSummary {
    fn new(base: &BaseState) -> Self {
        let f = &base.field;
        Self {
            mean: f.mean(),
            hmin: f.min(),
            hmax: f.max(),
            energy: energy_unchecked(f, &EnergyParams::new(base.params)),
            steady: base.steady.clone(),
            reference_steady: base.reference_steady.clone(),
            fd_residual: base.fd_residual,
            fd_iterations: base.fd_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveManifest {
    pub kind: String,
    pub config: ExperimentConfig,
    pub outcome: Option<Outcome>,
    pub engine_outcome: Option<Outcome>,
    pub final_time: Option<f64>,
    pub n_history: Vec<(f64, usize)>,
    pub accepted_steps: usize,
    pub attempts: usize,
    pub blowup_threshold: Option<f64>,
    pub base: Option<BaseSummary>,
    pub diagnostics: Option<RunDiagnostics>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyRunManifest {
    pub kind: String,
    pub config: ExperimentConfig,
    pub base: Option<BaseSummary>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationManifest {
    pub kind: String,
    pub config: ExperimentConfig,
    pub points: usize,
    pub stable: usize,
    pub unstable: usize,
    pub neutral: usize,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub kind: String,
    pub config: ExperimentConfig,
    pub run_dir: String,
    pub outcome: Option<Outcome>,
    pub rows: usize,
    pub mass_drift: f64,
    pub max_energy_increase: f64,
    pub half_time: Option<f64>,
    pub singularity: Option<SingularityEstimate>,
    /// Rate `lambda` of `h_max - h_min ~ exp(-lambda t)` over the second half
    /// of a relaxing run.
    pub decay_rate: Option<f64>,
    pub error: Option<String>,
}

/// What a run produced, for the command-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub line: String,
    pub ok: bool,
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

pub(crate) fn prepare_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_snapshot(dir: &Path, step: &str, field: &PeriodicField) -> Result<()> {
    write(&dir.join(format!("snap_{step}.csv")), &field.to_csv())
}

/// Validates `cfg`, runs it, and writes its artifacts to `output.dir`.
pub fn run_experiment(cfg: ExperimentConfig) -> Result<RunSummary> {
    let cfg = cfg.resolve()?;
    match cfg.kind() {
        ExperimentKind::Steady => run_steady(cfg),
        ExperimentKind::Evolve => run_evolve(cfg),
        ExperimentKind::Sweep => crate::sweep::run_sweep(cfg),
        ExperimentKind::Bifurcation => run_bifurcation(cfg),
        ExperimentKind::Analyze => run_analyze(cfg),
    }
}

fn run_steady(cfg: ExperimentConfig) -> Result<RunSummary> {
    let clock = Instant::now();
    let dir = prepare_dir(&cfg)?;
    let built = build_base(&cfg);
    let (base, error) = match &built {
        Ok(b) => {
            write_snapshot(&dir, "0", &b.field)?;
            if let Some(r) = b.reference.as_ref().filter(|_| b.reference_steady.is_some()) {
                write_snapshot(&dir, "reference", r)?;
            }
            (Some(BaseSummary::new(b)), None)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let manifest = SteadyRunManifest {
        kind: "steady".into(),
        config: cfg,
        base,
        error,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    let line = match (&manifest.base, &manifest.error) {
        (Some(b), _) => match &b.steady {
            Some(s) => format!("steady: P={} A={} E={} B={} D={} N={}", s.period, s.area, s.e, s.bond, s.d, s.n),
            None => "steady: built".into(),
        },
        (None, Some(e)) => format!("steady failed: {e}"),
        (None, None) => unreachable!(),
    };
    Ok(RunSummary { out_dir: dir, line, ok: manifest.error.is_none() })
}

/// Writes the artifacts of a finished or failed evolution.
pub fn write_evolution(
    dir: &Path,
    cfg: &ExperimentConfig,
    sim: std::result::Result<&Simulation, &CliError>,
    wall_time_s: f64,
) -> Result<EvolveManifest> {
    let mut cfg = cfg.clone();
    let manifest = match sim {
        Ok(s) => {
            let r = &s.record;
            cfg.controls.blowup_threshold = Some(r.blowup_threshold);
            write(&dir.join("series.csv"), &r.series_csv())?;
            let mut wrote_initial = false;
            for snap in &r.snapshots {
                wrote_initial |= snap.step == 0;
                write_snapshot(dir, &snap.step.to_string(), &snap.field)?;
            }
            if !wrote_initial {
                write_snapshot(dir, "0", &s.initial)?;
            }
            write_snapshot(dir, &r.accepted_steps.to_string(), &r.final_field)?;
            EvolveManifest {
                kind: "evolve".into(),
                config: cfg,
                outcome: Some(s.outcome.clone()),
                engine_outcome: Some(r.outcome.clone()),
                final_time: Some(r.final_t),
                n_history: r.n_history.clone(),
                accepted_steps: r.accepted_steps,
                attempts: r.attempts,
                blowup_threshold: Some(r.blowup_threshold),
                base: Some(BaseSummary::new(&s.base)),
                diagnostics: Some(s.diagnostics.clone()),
                error: None,
                wall_time_s,
            }
        }
        Err(e) => EvolveManifest {
            kind: "evolve".into(),
            config: cfg,
            outcome: None,
            engine_outcome: None,
            final_time: None,
            n_history: Vec::new(),
            accepted_steps: 0,
            attempts: 0,
            blowup_threshold: None,
            base: None,
            diagnostics: None,
            error: Some(e.to_string()),
            wall_time_s,
        },
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn run_evolve(cfg: ExperimentConfig) -> Result<RunSummary> {
    let clock = Instant::now();
    let dir = prepare_dir(&cfg)?;
    let sim = simulate(&cfg);
    let manifest = write_evolution(&dir, &cfg, sim.as_ref(), clock.elapsed().as_secs_f64())?;
    let line = match (&manifest.outcome, &manifest.error) {
        (Some(o), _) => format!(
            "evolve: {} at t = {} after {} steps, N history {:?}",
            o.kind(),
            manifest.final_time.unwrap_or(0.0),
            manifest.accepted_steps,
            manifest.n_history.iter().map(|e| e.1).collect::<Vec<_>>()
        ),
        (None, Some(e)) => format!("evolve failed: {e}"),
        (None, None) => unreachable!(),
    };
    Ok(RunSummary { out_dir: dir, line, ok: manifest.error.is_none() })
}

fn run_bifurcation(cfg: ExperimentConfig) -> Result<RunSummary> {
    let clock = Instant::now();
    let dir = prepare_dir(&cfg)?;
    let branch = bifurcation_branch(
        cfg.q.expect("resolved"),
        cfg.bond.expect("resolved"),
        cfg.target_period.expect("resolved"),
        cfg.alpha_grid.as_deref().expect("resolved"),
    );
    let count = |b: &thinfilm::analysis::BifurcationBranch, s: Stability| b.points.iter().filter(|p| p.stability == s).count();
    let (points, stable, unstable, neutral, error) = match &branch {
        Ok(b) => {
            write(&dir.join("branch.csv"), &b.to_csv())?;
            (b.points.len(), count(b, Stability::Stable), count(b, Stability::Unstable), count(b, Stability::Neutral), None)
        }
        Err(e) => (0, 0, 0, 0, Some(e.to_string())),
    };
    let manifest = BifurcationManifest {
        kind: "bifurcation".into(),
        config: cfg,
        points,
        stable,
        unstable,
        neutral,
        error,
        wall_time_s: clock.elapsed().as_secs_f64(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    let line = match &manifest.error {
        None => format!("bifurcation: {points} points, {stable} stable, {unstable} unstable, {neutral} neutral"),
        Some(e) => format!("bifurcation failed: {e}"),
    };
    Ok(RunSummary { out_dir: dir, line, ok: manifest.error.is_none() })
}

fn analyze_dir(run_dir: &Path) -> Result<(Option<Outcome>, Vec<SeriesRow>, ModelParams, Option<f64>)> {
    let mpath = run_dir.join("manifest.json");
    let text = fs::read_to_string(&mpath).map_err(|e| CliError::io(&mpath, e))?;
    let m: EvolveManifest = serde_json::from_str(&text).map_err(|source| CliError::Parse { path: mpath.clone(), source })?;
    let spath = run_dir.join("series.csv");
    let series = fs::read_to_string(&spath).map_err(|e| CliError::io(&spath, e))?;
    let rows = parse_series_csv(&series, &m.n_history)?;
    let c = &m.config;
    let params = ModelParams::from_q(c.n.unwrap_or(1.0), c.q.unwrap_or(1.0), m.base.as_ref().and_then(|b| b.steady.as_ref().map(|s| s.bond)).or(c.bond).unwrap_or(1.0))?;
    Ok((m.outcome, rows, params, c.half_time_level))
}

fn run_analyze(cfg: ExperimentConfig) -> Result<RunSummary> {
    let dir = prepare_dir(&cfg)?;
    let run_dir = cfg.run_dir.clone().expect("resolved");
    let mut report = AnalyzeReport {
        kind: "analyze".into(),
        config: cfg.clone(),
        run_dir: run_dir.clone(),
        outcome: None,
        rows: 0,
        mass_drift: 0.0,
        max_energy_increase: 0.0,
        half_time: None,
        singularity: None,
        decay_rate: None,
        error: None,
    };
    match analyze_dir(Path::new(&run_dir)) {
        Ok((outcome, rows, params, level)) => {
            let (drift, rise) = series_checks(&rows);
            let hmin: Vec<(f64, f64)> = rows.iter().filter(|r| r.resolved).map(|r| (r.t, r.hmin)).collect();
            let hmax: Vec<(f64, f64)> = rows.iter().filter(|r| r.resolved).map(|r| (r.t, r.hmax)).collect();
            let level = level.unwrap_or(0.5);
            report.half_time = hmin.windows(2).find_map(|w| {
                let ((t0, a), (t1, b)) = (w[0], w[1]);
                ((a - level) * (b - level) <= 0.0 && a != b).then(|| t0 + (level - a) / (b - a) * (t1 - t0))
            });
            report.singularity = match outcome {
                Some(Outcome::TouchDown { .. }) => singularity_estimate(&hmin, &params, false, cfg.singularity_exponent),
                Some(Outcome::BlowUp { .. }) => singularity_estimate(&hmax, &params, true, cfg.singularity_exponent),
                _ => None,
            };
            let spread: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.resolved && r.hmax - r.hmin > 1e-12)
                .map(|r| (r.t, r.hmax - r.hmin))
                .collect();
            let tail = &spread[spread.len() / 2..];
            if matches!(outcome, Some(Outcome::RelaxedToConstant { .. }) | Some(Outcome::RelaxedToPeriodic { .. })) {
                report.decay_rate = thinfilm::analysis::fit_exponential_decay(tail).ok().map(|d| d.0);
            }
            report.rows = rows.len();
            report.mass_drift = drift;
            report.max_energy_increase = rise;
            report.outcome = outcome;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    write_json(&dir.join("diagnostics.json"), &report)?;
    let line = match &report.error {
        None => format!(
            "analyze: {} rows, mass drift {:e}, max energy increase {:e}",
            report.rows, report.mass_drift, report.max_energy_increase
        ),
        Some(e) => format!("analyze failed: {e}"),
    };
    Ok(RunSummary { out_dir: dir, line, ok: report.error.is_none() })
}
