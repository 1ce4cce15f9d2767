//! Semi-implicit Crank–Nicolson time stepping.
//!
//! Each step freezes the mobility at `h^{l+1/2}`, extrapolated linearly from
//! the two most recent levels, and solves a periodic pentadiagonal system for
//! the increment `z = h^{l+1} - h^l`:
//!
//! ```text
//! z + (dt/2) Q(z) = -dt Q(h^l),
//! Q(z)_i = (Phi_i(z) - Phi_{i-1}(z)) / dx,
//! Phi_i(z) = f_{i+} ( T_i(z)/dx^3 + r_{i+} (z_{i+1} - z_i)/dx ),
//! ```
//!
//! with `T_i` the third difference `z_{i+2} - 3 z_{i+1} + 3 z_i - z_{i-1}` and
//! `f_{i+}`, `r_{i+}` right averages. A mesh function with vanishing flux is a
//! finite-difference steady state and gives `z = 0`. The flux form
//! telescopes, so mass is conserved up to the linear solve.

use serde::{Deserialize, Serialize};

use crate::analysis::{energy_unchecked, EnergyParams};
use crate::banded::{solve_cyclic_banded, CyclicBanded};
use crate::error::{Error, Result};
use crate::grid::PeriodicField;
use crate::params::ModelParams;
use crate::spectral::{is_resolved, zero_pad_double};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControls {
    pub epsilon: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_initial: f64,
    pub n_max: usize,
    pub t_max: f64,
    /// `None` means `1e3` times the initial maximum.
    pub blowup_threshold: Option<f64>,
    /// Stop when `h_min` is at or below this value.
    pub touchdown_threshold: f64,
    /// Minima below this level are reported as touch-down locations.
    pub touchdown_report: f64,
    /// Constant step without step-doubling control.
    pub fixed_dt: Option<f64>,
    pub max_steps: Option<usize>,
    pub tail_fraction: f64,
    pub roundoff_level: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            epsilon: 1e-11,
            dt_min: 1e-14,
            dt_max: 0.1,
            dt_initial: 1e-5,
            n_max: 8192,
            t_max: 100.0,
            blowup_threshold: None,
            touchdown_threshold: 0.0,
            touchdown_report: 1e-6,
            fixed_dt: None,
            max_steps: None,
            tail_fraction: crate::spectral::DEFAULT_TAIL_FRACTION,
            roundoff_level: crate::spectral::DEFAULT_ROUNDOFF_LEVEL,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            return bad(format!("need 0 < dt_min < dt_max, got {} and {}", self.dt_min, self.dt_max));
        }
        if !(self.dt_initial > 0.0) {
            return bad(format!("dt_initial must be positive, got {}", self.dt_initial));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("fixed_dt must be positive, got {dt}"));
            }
        }
        if !(self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return bad(format!("tail_fraction must lie in (0, 1), got {}", self.tail_fraction));
        }
        Ok(())
    }

    fn initial_dt(&self) -> f64 {
        self.fixed_dt.unwrap_or(self.dt_initial.clamp(self.dt_min, self.dt_max))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub dt: f64,
    /// Size of the step that produced `current` (0 before the first step).
    pub dt_prev: f64,
    pub current: PeriodicField,
    pub previous: PeriodicField,
    pub step_index: usize,
    pub params: ModelParams,
}

impl EvolutionState {
    pub fn new(initial: PeriodicField, params: ModelParams, dt: f64) -> Self {
        Self { t: 0.0, dt, dt_prev: 0.0, previous: initial.clone(), current: initial, step_index: 0, params }
    }

    /// Both levels zero-padded to twice the mesh size.
    pub fn doubled(&self) -> Self {
        Self {
            current: zero_pad_double(&self.current),
            previous: zero_pad_double(&self.previous),
            ..self.clone()
        }
    }

    fn midpoint(&self, dt: f64) -> Vec<f64> {
        let h = self.current.values();
        if self.step_index == 0 || self.dt_prev == 0.0 {
            return h.to_vec();
        }
        let w = 0.5 * dt / self.dt_prev;
        h.iter().zip(self.previous.values()).map(|(a, b)| a + w * (a - b)).collect()
    }

    fn advanced(&self, next: PeriodicField, dt: f64) -> Self {
        Self {
            t: self.t + dt,
            dt: self.dt,
            dt_prev: dt,
            previous: self.current.clone(),
            current: next,
            step_index: self.step_index + 1,
            params: self.params,
        }
    }
}

/// Right-averaged coefficients `a_i = f_{i+}/dx^3`, `rbar_i = r_{i+}`.
fn frozen_coefficients(mid: &[f64], params: &ModelParams, dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = mid.len();
    let f: Vec<f64> = mid.iter().map(|&y| params.mobility(y)).collect();
    let r: Vec<f64> = mid.iter().map(|&y| params.ratio(y)).collect();
    let dx3 = dx * dx * dx;
    let mut a = vec![0.0; n];
    let mut rbar = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        a[i] = 0.5 * (f[i] + f[ip]) / dx3;
        rbar[i] = 0.5 * (r[i] + r[ip]);
    }
    (a, rbar)
}

/// `Q(h)` evaluated through the differences `d_i = h_{i+1} - h_i`.
fn flux_divergence(h: &[f64], a: &[f64], rbar: &[f64], dx: f64) -> Vec<f64> {
    let n = h.len();
    let dx2 = dx * dx;
    let d: Vec<f64> = (0..n).map(|i| h[(i + 1) % n] - h[i]).collect();
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            a[i] * ((d[ip] - 2.0 * d[i] + d[im]) + dx2 * rbar[i] * d[i])
        })
        .collect();
    (0..n).map(|i| (phi[i] - phi[(i + n - 1) % n]) / dx).collect()
}

/// Periodic pentadiagonal operator `I + s Q`.
fn implicit_operator(a: &[f64], rbar: &[f64], dx: f64, s: f64) -> CyclicBanded {
    let n = a.len();
    let dx2 = dx * dx;
    let mut m = CyclicBanded::zeros(n, 2, 2);
    for i in 0..n {
        let im = (i + n - 1) % n;
        let (ai, am) = (a[i], a[im]);
        let (bi, bm) = (a[i] * dx2 * rbar[i], a[im] * dx2 * rbar[im]);
        let c = s / dx;
        m.diag_mut(2)[i] = c * ai;
        m.diag_mut(1)[i] = c * (-3.0 * ai + bi - am);
        m.diag_mut(0)[i] = 1.0 + c * (3.0 * ai - bi + 3.0 * am - bm);
        m.diag_mut(-1)[i] = c * (-ai - 3.0 * am + bm);
        m.diag_mut(-2)[i] = c * am;
    }
    m
}

/// One Crank–Nicolson step of size `dt`; returns `h^{l+1}`.
pub fn cn_step(state: &EvolutionState, dt: f64) -> Result<PeriodicField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let h = state.current.values();
    let dx = state.current.dx();
    let mid = state.midpoint(dt);
    let (a, rbar) = frozen_coefficients(&mid, &state.params, dx);
    let q = flux_divergence(h, &a, &rbar, dx);
    if q.iter().all(|&v| v == 0.0) {
        return Ok(state.current.clone());
    }
    let rhs: Vec<f64> = q.iter().map(|v| -dt * v).collect();
    let op = implicit_operator(&a, &rbar, dx, 0.5 * dt);
    let z = solve_cyclic_banded(&op, &rhs)?;
    let next: Vec<f64> = h.iter().zip(&z).map(|(a, b)| a + b).collect();
    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    PeriodicField::new(state.current.period_length(), next)
}

/// Result of one controlled step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub state: EvolutionState,
    pub accepted_dt: f64,
    pub error_estimate: f64,
    pub attempts: usize,
}

fn two_half_steps(state: &EvolutionState, dt: f64) -> Result<PeriodicField> {
    let half = 0.5 * dt;
    let mid = cn_step(state, half)?;
    cn_step(&state.advanced(mid, half), half)
}

/// Step-doubling control: compare one step of `dt` with two of `dt/2`.
/// Halve on `> epsilon`, double on `< epsilon/10` (accepting at `dt_max`),
/// otherwise accept the two-half-step result. A doubling that overshoots
/// falls back to the last candidate that passed.
pub fn adaptive_step(state: &EvolutionState, controls: &StepControls) -> Result<StepReport> {
    if let Some(dt) = controls.fixed_dt {
        let next = cn_step(state, dt)?;
        let mut s = state.advanced(next, dt);
        s.dt = dt;
        return Ok(StepReport { state: s, accepted_dt: dt, error_estimate: f64::NAN, attempts: 1 });
    }
    let eps = controls.epsilon;
    let mut dt = state.dt.min(controls.dt_max);
    let mut fallback: Option<(f64, PeriodicField, f64)> = None;
    let mut attempts = 0;
    loop {
        if dt < controls.dt_min {
            return Err(Error::StepUnderflow { t: state.t, dt_min: controls.dt_min });
        }
        attempts += 1;
        let trial = cn_step(state, dt).and_then(|h1| two_half_steps(state, dt).map(|h2| (h1, h2)));
        let (h2, err) = match trial {
            Ok((h1, h2)) => {
                let e = h1.max_abs_diff(&h2);
                (h2, if e.is_finite() { e } else { f64::INFINITY })
            }
            Err(Error::SingularMatrix(_)) | Err(Error::NonFinite(_)) => {
                (state.current.clone(), f64::INFINITY)
            }
            Err(e) => return Err(e),
        };
        if err > eps {
            if let Some((fdt, fh, fe)) = fallback.take() {
                return Ok(finish(state, fh, fdt, fe, attempts));
            }
            dt *= 0.5;
            continue;
        }
        if err < 0.1 * eps && dt < controls.dt_max {
            fallback = Some((dt, h2, err));
            dt = (2.0 * dt).min(controls.dt_max);
            continue;
        }
        return Ok(finish(state, h2, dt, err, attempts));
    }
}

fn finish(state: &EvolutionState, next: PeriodicField, dt: f64, err: f64, attempts: usize) -> StepReport {
    let mut s = state.advanced(next, dt);
    s.dt = dt;
    StepReport { state: s, accepted_dt: dt, error_estimate: err, attempts }
}

/// Terminal classification of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    RelaxedToConstant { value: f64, distance: f64 },
    RelaxedToPeriodic { shift: f64, distance: f64 },
    TouchDown { t_estimate: f64, locations: Vec<f64>, last_resolved_t: f64 },
    BlowUp { t_estimate: f64, location: f64, last_resolved_t: f64 },
    ResolutionExhausted { t: f64, reason: String },
    HorizonReached { t: f64 },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::RelaxedToConstant { .. } => "RelaxedToConstant",
            Outcome::RelaxedToPeriodic { .. } => "RelaxedToPeriodic",
            Outcome::TouchDown { .. } => "TouchDown",
            Outcome::BlowUp { .. } => "BlowUp",
            Outcome::ResolutionExhausted { .. } => "ResolutionExhausted",
            Outcome::HorizonReached { .. } => "HorizonReached",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    pub hmin: f64,
    pub hmax: f64,
    pub mass: f64,
    pub energy: f64,
    pub resolved: bool,
    /// Mesh size of the recorded field (not part of the CSV columns).
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: PeriodicField,
}

/// Fields on either side of the first crossing of `h_min` through `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCapture {
    pub level: f64,
    pub before: (f64, PeriodicField),
    pub after: (f64, PeriodicField),
}

impl LevelCapture {
    /// Crossing time and field, linearly interpolated between the captures.
    /// The two captures may differ in mesh size; the coarser one is padded.
    pub fn interpolated(&self) -> Result<(f64, PeriodicField)> {
        let (t0, f0) = &self.before;
        let (t1, f1) = &self.after;
        let (m0, m1) = (f0.min(), f1.min());
        let w = if m1 == m0 { 0.0 } else { (self.level - m0) / (m1 - m0) };
        let n = f0.len().max(f1.len());
        let a = crate::spectral::resample(f0, n)?;
        let b = crate::spectral::resample(f1, n)?;
        let v: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x + w * (y - x)).collect();
        Ok((t0 + w * (t1 - t0), PeriodicField::new(f0.period_length(), v)?))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Probes {
    /// Snapshot every this many accepted steps (0 disables).
    pub snapshot_every: usize,
    /// `h_min` levels whose first crossing is captured.
    pub capture_levels: Vec<f64>,
    /// Stop once `h_max - h_min` falls below this value.
    pub stop_when_flat: Option<f64>,
    /// Stop once `max |h^{l+1} - h^l| / dt` falls below this value.
    pub stop_when_stationary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub params: ModelParams,
    pub controls: StepControls,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot>,
    pub captures: Vec<LevelCapture>,
    pub outcome: Outcome,
    /// Last resolved positive field and its time.
    pub final_field: PeriodicField,
    pub final_t: f64,
    /// `(t, N)` at the start and after every point doubling.
    pub n_history: Vec<(f64, usize)>,
    pub accepted_steps: usize,
    pub attempts: usize,
    pub blowup_threshold: f64,
}

impl RunRecord {
    pub fn series_csv(&self) -> String {
        let mut s = String::from("t,dt,hmin,hmax,mass,energy,resolved\n");
        for r in &self.series {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.t, r.dt, r.hmin, r.hmax, r.mass, r.energy, r.resolved
            ));
        }
        s
    }

    pub fn hmin_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().filter(|r| r.resolved).map(|r| (r.t, r.hmin)).collect()
    }

    pub fn hmax_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().filter(|r| r.resolved).map(|r| (r.t, r.hmax)).collect()
    }
}

fn row(t: f64, dt: f64, f: &PeriodicField, ep: &EnergyParams, resolved: bool) -> SeriesRow {
    SeriesRow {
        t,
        dt,
        hmin: f.min(),
        hmax: f.max(),
        mass: f.mass(),
        energy: energy_unchecked(f, ep),
        resolved,
        n: f.len(),
    }
}

/// Local minima of `f` below `level`, falling back to the global minimum.
fn low_points(f: &PeriodicField, level: f64) -> Vec<f64> {
    let (_, xs) = crate::analysis::count_local_minima_below(f, level);
    if xs.is_empty() {
        vec![f.x(f.argmin())]
    } else {
        xs
    }
}

/// Runs the controlled stepper until a stopping criterion fires.
pub fn evolve_run(
    initial: &PeriodicField,
    params: &ModelParams,
    controls: &StepControls,
    probes: &Probes,
) -> Result<RunRecord> {
    controls.validate()?;
    let min0 = initial.min();
    if !(min0 > 0.0) {
        return Err(Error::NonPositive { min: min0, context: "initial data".into() });
    }
    if !is_resolved(initial, controls.tail_fraction, controls.roundoff_level) {
        return Err(Error::InvalidParameter("initial data is not spectrally resolved".into()));
    }
    if initial.len() > controls.n_max {
        return Err(Error::InvalidParameter(format!(
            "initial mesh {} exceeds n_max {}",
            initial.len(),
            controls.n_max
        )));
    }
    let blowup = controls.blowup_threshold.unwrap_or(1e3 * initial.max());
    let ep = EnergyParams::new(*params);
    let mut state = EvolutionState::new(initial.clone(), *params, controls.initial_dt());
    let mut series = vec![row(0.0, 0.0, initial, &ep, true)];
    let mut snapshots = Vec::new();
    if probes.snapshot_every > 0 {
        snapshots.push(Snapshot { step: 0, t: 0.0, field: initial.clone() });
    }
    let mut pending: Vec<f64> = probes.capture_levels.clone();
    let mut captures = Vec::new();
    let mut n_history = vec![(0.0, initial.len())];
    let mut attempts = 0;

    let outcome = loop {
        if state.t >= controls.t_max {
            break Outcome::HorizonReached { t: state.t };
        }
        if controls.max_steps.is_some_and(|m| state.step_index >= m) {
            break Outcome::HorizonReached { t: state.t };
        }
        let report = match adaptive_step(&state, controls) {
            Ok(r) => r,
            Err(Error::StepUnderflow { t, dt_min }) => {
                break Outcome::ResolutionExhausted {
                    t,
                    reason: format!("timestep fell below dt_min = {dt_min:e}"),
                };
            }
            Err(e) => {
                break Outcome::ResolutionExhausted { t: state.t, reason: e.to_string() };
            }
        };
        attempts += report.attempts;
        let next = report.state;
        if !is_resolved(&next.current, controls.tail_fraction, controls.roundoff_level) {
            let n = state.current.len();
            if 2 * n > controls.n_max {
                series.push(row(next.t, report.accepted_dt, &next.current, &ep, false));
                break Outcome::ResolutionExhausted {
                    t: state.t,
                    reason: format!("unresolved on {n} points and n_max = {}", controls.n_max),
                };
            }
            state = state.doubled();
            n_history.push((state.t, 2 * n));
            continue;
        }
        let r = row(next.t, report.accepted_dt, &next.current, &ep, true);
        series.push(r);
        pending.retain(|&level| {
            let (m0, m1) = (state.current.min(), next.current.min());
            let crossed = (m0 - level) * (m1 - level) <= 0.0 && m0 != m1;
            if crossed {
                captures.push(LevelCapture {
                    level,
                    before: (state.t, state.current.clone()),
                    after: (next.t, next.current.clone()),
                });
            }
            !crossed
        });
        if probes.snapshot_every > 0 && next.step_index % probes.snapshot_every == 0 {
            snapshots.push(Snapshot { step: next.step_index, t: next.t, field: next.current.clone() });
        }
        if r.hmin <= controls.touchdown_threshold {
            let m0 = state.current.min();
            let w = (m0 - controls.touchdown_threshold) / (m0 - r.hmin);
            let t_estimate = state.t + w * (next.t - state.t);
            let locations = low_points(&next.current, controls.touchdown_report.max(controls.touchdown_threshold));
            break Outcome::TouchDown { t_estimate, locations, last_resolved_t: state.t };
        }
        if r.hmax >= blowup {
            let location = next.current.x(next.current.argmax());
            let last = state.t;
            state = next;
            break Outcome::BlowUp { t_estimate: state.t, location, last_resolved_t: last };
        }
        let rate = next.current.max_abs_diff(&state.current) / report.accepted_dt;
        state = next;
        if probes.stop_when_flat.is_some_and(|tol| r.hmax - r.hmin < tol)
            || probes.stop_when_stationary.is_some_and(|tol| rate < tol)
        {
            break Outcome::HorizonReached { t: state.t };
        }
    };

    let final_field = state.current.clone();
    Ok(RunRecord {
        params: *params,
        controls: *controls,
        series,
        snapshots,
        captures,
        outcome,
        final_t: state.t,
        final_field,
        n_history,
        accepted_steps: state.step_index,
        attempts,
        blowup_threshold: blowup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn params(q: f64) -> ModelParams {
        ModelParams::from_q(1.0, q, 1.0).unwrap()
    }

    #[test]
    fn constant_is_a_fixed_point() {
        let f = PeriodicField::constant(2.0 * PI, 32, 0.8).unwrap();
        let s = EvolutionState::new(f.clone(), params(2.5), 0.1);
        assert_eq!(cn_step(&s, 0.1).unwrap(), f);
    }

    #[test]
    fn pentadiagonal_operator_matches_flux_form() {
        let f = make_grid(2.0 * PI, 32, |x| 1.0 + 0.2 * x.cos() + 0.05 * (3.0 * x).sin()).unwrap();
        let p = params(1.5);
        let (a, r) = frozen_coefficients(f.values(), &p, f.dx());
        let z: Vec<f64> = (0..32).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let q = flux_divergence(&z, &a, &r, f.dx());
        let op = implicit_operator(&a, &r, f.dx(), 1.0);
        let m = op.matvec(&z);
        for i in 0..32 {
            assert!((m[i] - z[i] - q[i]).abs() < 1e-9 * q[i].abs().max(1.0));
        }
    }

    #[test]
    fn step_conserves_mass() {
        let f = make_grid(2.0 * PI, 64, |x| 1.0 + 0.1 * x.cos() + 0.03 * (2.0 * x).sin()).unwrap();
        let s = EvolutionState::new(f.clone(), params(1.5), 1e-3);
        let g = cn_step(&s, 1e-3).unwrap();
        assert!((g.mass() - f.mass()).abs() < 1e-13 * f.mass());
    }

    #[test]
    fn first_step_uses_current_level() {
        let f = make_grid(2.0 * PI, 16, |x| 1.0 + 0.1 * x.cos()).unwrap();
        let s = EvolutionState::new(f.clone(), params(1.5), 1e-3);
        assert_eq!(s.midpoint(1e-3), f.values().to_vec());
    }

    #[test]
    fn controls_validation() {
        let c = StepControls { dt_min: 1.0, dt_max: 0.5, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(StepControls::default().validate().is_ok());
    }
}
