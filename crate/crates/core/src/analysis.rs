//! Diagnostics and theory checks.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::{Outcome, RunRecord};
use crate::grid::PeriodicField;
use crate::params::ModelParams;
use crate::spectral::{coefficients, resample, synthesize};
use crate::steady::{canonical_orbit, scale_to_period, scale_with_bond, solve_canonical_sampled, DEFAULT_TOL};

/// Energy `int h_x^2/2 - H(h)` with `H'' = B y^(q-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub params: ModelParams,
}

impl EnergyParams {
    pub fn new(params: ModelParams) -> Self {
        Self { params }
    }

    pub fn potential(&self, y: f64) -> f64 {
        let (q, b) = (self.params.q, self.params.bond);
        if q == 0.0 {
            b * (y * y.ln() - y)
        } else if q == -1.0 {
            -b * y.ln()
        } else {
            b * y.powf(q + 1.0) / (q * (q + 1.0))
        }
    }

    pub fn potential_second(&self, y: f64) -> f64 {
        self.params.ratio(y)
    }
}

/// Discrete energy `dx sum [((h_{i+1}-h_i)/dx)^2 / 2 - H(h_i)]`; `NaN` where
/// `H` is undefined.
pub fn energy_unchecked(field: &PeriodicField, ep: &EnergyParams) -> f64 {
    let h = field.values();
    let n = h.len();
    let dx = field.dx();
    let mut s = 0.0;
    for i in 0..n {
        let g = (h[(i + 1) % n] - h[i]) / dx;
        s += 0.5 * g * g - ep.potential(h[i]);
    }
    dx * s
}

pub fn energy(field: &PeriodicField, ep: &EnergyParams) -> Result<f64> {
    let min = field.min();
    if min <= 0.0 && ep.params.q <= 0.0 {
        return Err(Error::NonPositive { min, context: format!("energy undefined for q = {}", ep.params.q) });
    }
    let e = energy_unchecked(field, ep);
    if !e.is_finite() {
        return Err(Error::InvalidParameter("energy is not finite on this field".into()));
    }
    Ok(e)
}

/// Crank–Nicolson amplification `(1 - mu)/(1 + mu)` of `cos(k x)` about `hbar`.
pub fn growth_factor(k: f64, dt: f64, hbar: f64, params: &ModelParams) -> Result<f64> {
    if !(dt > 0.0 && hbar > 0.0) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and hbar > 0, got {dt}, {hbar}")));
    }
    let k2 = k * k;
    let mu = 0.5 * dt * params.mobility(hbar) * k2 * (k2 - params.ratio(hbar));
    if mu == -1.0 {
        return Err(Error::InvalidParameter(format!("growth factor has a pole at k = {k}, dt = {dt}")));
    }
    Ok((1.0 - mu) / (1.0 + mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bifurcation {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauClassification {
    pub kappa: f64,
    pub bifurcation: Bifurcation,
    pub saturation_amplitude: Option<f64>,
}

/// Landau constant `kappa = (sigma/6)(q-1)(7/4-q)` of the weakly nonlinear
/// amplitude equation near the first bifurcation from constants.
pub fn landau(q: f64, sigma: f64) -> Result<LandauClassification> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let kappa = sigma / 6.0 * (q - 1.0) * (1.75 - q);
    let (bifurcation, saturation_amplitude) = if kappa > 0.0 {
        (Bifurcation::Supercritical, Some((sigma / kappa).sqrt()))
    } else if kappa < 0.0 {
        (Bifurcation::Subcritical, Some((-sigma / kappa).sqrt()))
    } else {
        (Bifurcation::Degenerate, None)
    };
    Ok(LandauClassification { kappa, bifurcation, saturation_amplitude })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantStability {
    LocalMinimum,
    Saddle,
    Marginal,
}

/// Energy stability of `h = hbar` on a period `X`: compare `B hbar^(q-1) X^2`
/// with `4 pi^2`.
pub fn constant_state_stability(hbar: f64, period_length: f64, params: &ModelParams) -> Result<ConstantStability> {
    if !(hbar > 0.0 && period_length > 0.0) {
        return Err(Error::InvalidParameter(format!("need hbar > 0 and X > 0, got {hbar}, {period_length}")));
    }
    let lhs = params.ratio(hbar) * period_length * period_length;
    let rhs = 4.0 * PI * PI;
    Ok(if (lhs - rhs).abs() <= 1e-12 * rhs {
        ConstantStability::Marginal
    } else if lhs < rhs {
        ConstantStability::LocalMinimum
    } else {
        ConstantStability::Saddle
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityEstimate {
    pub t_c: f64,
    pub exponent: f64,
    pub sample_times: (f64, f64),
    pub quality: f64,
}

fn quality_of(samples: &[(f64, f64)], t_c: f64, p: f64, skip_last: usize) -> f64 {
    let (t_ref, v_ref) = samples[samples.len() - 1];
    let c = v_ref / (t_c - t_ref).powf(p);
    samples[..samples.len() - skip_last]
        .iter()
        .map(|&(t, v)| ((v - c * (t_c - t).powf(p)) / v).abs())
        .fold(0.0, f64::max)
}

/// Singular time from the ratio of the last two samples of `v ~ C (t_c - t)^p`.
pub fn estimate_singularity_time(samples: &[(f64, f64)], p: f64) -> Result<SingularityEstimate> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    if !(p != 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent must be nonzero, got {p}")));
    }
    let (t1, v1) = samples[samples.len() - 2];
    let (t2, v2) = samples[samples.len() - 1];
    if !(t2 > t1 && v1 > 0.0 && v2 > 0.0) {
        return Err(Error::InsufficientData("samples must have increasing t and positive v".into()));
    }
    let r = (v1 / v2).powf(1.0 / p);
    if (r - 1.0).abs() < 1e-15 {
        return Err(Error::InsufficientData("no trend between the last two samples".into()));
    }
    let t_c = (t1 - r * t2) / (1.0 - r);
    if !(t_c > t2) {
        return Err(Error::InsufficientData(format!("estimated t_c = {t_c} does not lie ahead of t = {t2}")));
    }
    Ok(SingularityEstimate { t_c, exponent: p, sample_times: (t1, t2), quality: quality_of(samples, t_c, p, 2) })
}

/// Three-sample variant solving for both `t_c` and `p`.
pub fn estimate_singularity_time_fit(samples: &[(f64, f64)]) -> Result<SingularityEstimate> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData("need at least three samples".into()));
    }
    let k = samples.len();
    let (t1, v1) = samples[k - 3];
    let (t2, v2) = samples[k - 2];
    let (t3, v3) = samples[k - 1];
    if !(t1 < t2 && t2 < t3 && v1 > 0.0 && v2 > 0.0 && v3 > 0.0) {
        return Err(Error::InsufficientData("samples must have increasing t and positive v".into()));
    }
    let (l1, l2, l3) = (v1.ln(), v2.ln(), v3.ln());
    if (l1 - l2) * (l2 - l3) <= 0.0 {
        return Err(Error::InsufficientData("samples are not monotone".into()));
    }
    let target = (l1 - l2) / (l2 - l3);
    // g -> (t2-t1)/(t3-t2) as t_c -> infinity and -> 0 as t_c -> t3
    let g = |tc: f64| ((tc - t1).ln() - (tc - t2).ln()) / ((tc - t2).ln() - (tc - t3).ln()) - target;
    let span = t3 - t1;
    let mut lo = t3 + 1e-14 * span.max(t3.abs());
    let mut hi = t3 + span;
    let glo = g(lo);
    let mut grow = 0;
    while g(hi).signum() == glo.signum() {
        hi = t3 + (hi - t3) * 4.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::InsufficientData("samples are consistent with no finite-time singularity".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs() {
            break;
        }
    }
    let t_c = 0.5 * (lo + hi);
    let p = (l1 - l2) / ((t_c - t1).ln() - (t_c - t2).ln());
    Ok(SingularityEstimate { t_c, exponent: p, sample_times: (t2, t3), quality: quality_of(samples, t_c, p, 3) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual: f64,
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("degenerate abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    Ok((slope, intercept, residual))
}

/// Least-squares fit of `ln v = ln c + p ln t`; the residual is the largest
/// deviation in `ln v`.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData("need at least three samples".into()));
    }
    if samples.iter().any(|&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(Error::InvalidParameter("power-law fit needs positive t and v".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (exponent, b, residual) = least_squares_line(&xs, &ys)?;
    Ok(PowerLawFit { exponent, prefactor: b.exp(), residual })
}

/// Rate `lambda` of `d(t) ~ c exp(-lambda t)` by a log-linear fit.
pub fn fit_exponential_decay(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData("need at least three samples".into()));
    }
    if samples.iter().any(|&(_, v)| !(v > 0.0)) {
        return Err(Error::InvalidParameter("decay fit needs positive values".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, b, _) = least_squares_line(&xs, &ys)?;
    Ok((-slope, b.exp()))
}

/// Strict local minima below `threshold`; a plateau counts once at its centre.
pub fn count_local_minima_below(field: &PeriodicField, threshold: f64) -> (usize, Vec<f64>) {
    let h = field.values();
    let n = h.len();
    let start = match (0..n).find(|&i| h[i] != h[(i + n - 1) % n]) {
        Some(s) => s,
        None => return (0, Vec::new()),
    };
    let mut xs = Vec::new();
    let mut i = 0;
    while i < n {
        let a = (start + i) % n;
        let mut len = 1;
        while len < n && h[(a + len) % n] == h[a] {
            len += 1;
        }
        let left = h[(a + n - 1) % n];
        let right = h[(a + len) % n];
        if h[a] < threshold && left > h[a] && right > h[a] {
            let centre = a as f64 + 0.5 * (len - 1) as f64;
            xs.push((centre % n as f64) * field.dx());
        }
        i += len;
    }
    xs.sort_by(f64::total_cmp);
    (xs.len(), xs)
}

/// First time `h_min` crosses `level`, linearly interpolated.
pub fn half_time(record: &RunRecord, level: f64) -> Result<f64> {
    let s = record.hmin_series();
    for w in s.windows(2) {
        let ((t0, m0), (t1, m1)) = (w[0], w[1]);
        if m0 == level {
            return Ok(t0);
        }
        if (m0 - level) * (m1 - level) < 0.0 || m1 == level {
            return Ok(t0 + (level - m0) / (m1 - m0) * (t1 - t0));
        }
    }
    Err(Error::InsufficientData(format!("h_min never crosses {level}")))
}

/// `g(x - s)` by a Fourier phase shift.
pub fn shift_field(g: &PeriodicField, shift: f64) -> PeriodicField {
    let n = g.len();
    let mut a = coefficients(g.values());
    let base = 2.0 * PI / g.period_length();
    for (j, c) in a.iter_mut().enumerate() {
        let k = crate::spectral::wavenumber(j, n);
        if 2 * k.unsigned_abs() as usize == n {
            *c = rustfft::num_complex::Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= rustfft::num_complex::Complex64::from_polar(1.0, -base * k as f64 * shift);
    }
    PeriodicField::new(g.period_length(), synthesize(a)).expect("shifted field stays valid")
}

/// Best shift `s` with `h(x) ~ g(x - s)`: mesh search on the L2 distance,
/// parabolic refinement, then the max-norm distance at that shift.
pub fn best_shift(h: &PeriodicField, g: &PeriodicField) -> Result<(f64, f64)> {
    let g = resample(g, h.len())?;
    if (g.period_length() - h.period_length()).abs() > 1e-12 * h.period_length() {
        return Err(Error::InvalidParameter("reference and field have different periods".into()));
    }
    let n = h.len();
    let dist2 = |cells: isize| {
        let r = g.roll(cells);
        h.values().iter().zip(r.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    };
    let d: Vec<f64> = (0..n as isize).map(dist2).collect();
    let j = (0..n).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap_or(0);
    let (dm, d0, dp) = (d[(j + n - 1) % n], d[j], d[(j + 1) % n]);
    let curv = dm - 2.0 * d0 + dp;
    let frac = if curv > 0.0 { (0.5 * (dm - dp) / curv).clamp(-0.5, 0.5) } else { 0.0 };
    let x_len = h.period_length();
    let shift = ((j as f64 + frac) * h.dx()).rem_euclid(x_len);
    let shifted = shift_field(&g, shift);
    Ok((shift, h.max_abs_diff(&shifted)))
}

/// References for [`classify_outcome`].
#[derive(Debug, Clone, Default)]
pub struct References<'a> {
    /// Expected constant limit; defaults to the field mean.
    pub constant: Option<f64>,
    pub steady: Option<&'a PeriodicField>,
}

/// Number of trailing series entries inspected by the trend rules.
pub const TREND_WINDOW: usize = 20;

fn monotone_tail(v: &[f64], increasing: bool) -> bool {
    if v.len() < 3 {
        return false;
    }
    let tail = &v[v.len().saturating_sub(TREND_WINDOW)..];
    tail.windows(2).all(|w| if increasing { w[1] >= w[0] } else { w[1] <= w[0] })
        && tail.first() != tail.last()
}

/// Refines the engine's terminal kind into a final classification.
pub fn classify_outcome(record: &RunRecord, references: &References<'_>, tol: f64) -> Result<Outcome> {
    match &record.outcome {
        Outcome::TouchDown { .. } | Outcome::BlowUp { .. } => return Ok(record.outcome.clone()),
        _ => {}
    }
    let h = &record.final_field;
    let hbar = references.constant.unwrap_or_else(|| h.mean());
    let dc = h.values().iter().fold(0.0f64, |m, v| m.max((v - hbar).abs()));
    if dc < tol {
        return Ok(Outcome::RelaxedToConstant { value: hbar, distance: dc });
    }
    if let Some(g) = references.steady {
        let (shift, dist) = best_shift(h, g)?;
        if dist < tol {
            return Ok(Outcome::RelaxedToPeriodic { shift, distance: dist });
        }
    }
    let hmin: Vec<f64> = record.hmin_series().iter().map(|s| s.1).collect();
    let hmax: Vec<f64> = record.hmax_series().iter().map(|s| s.1).collect();
    let last_t = record.final_t;
    let stalled = matches!(record.outcome, Outcome::ResolutionExhausted { .. });
    if stalled {
        let grown = hmax.first().is_some_and(|&a| hmax.last().is_some_and(|&b| b >= 2.0 * a));
        if grown && monotone_tail(&hmax, true) {
            let t_estimate = singular_time_or(record.hmax_series(), -1.0 / 7.0, last_t);
            return Ok(Outcome::BlowUp { t_estimate, location: h.x(h.argmax()), last_resolved_t: last_t });
        }
        if monotone_tail(&hmin, false) {
            return Ok(touchdown_from(record, h, last_t));
        }
    } else if h.min() < record.controls.touchdown_report && monotone_tail(&hmin, false) {
        return Ok(touchdown_from(record, h, last_t));
    }
    Ok(record.outcome.clone())
}

fn singular_time_or(series: Vec<(f64, f64)>, p: f64, fallback: f64) -> f64 {
    let tail: Vec<(f64, f64)> = series.into_iter().rev().take(TREND_WINDOW).collect::<Vec<_>>().into_iter().rev().collect();
    estimate_singularity_time(&tail, p).map(|e| e.t_c).unwrap_or(fallback)
}

fn touchdown_from(record: &RunRecord, h: &PeriodicField, last_t: f64) -> Outcome {
    let level = 0.5 * (h.min() + h.mean());
    let (_, mut locations) = count_local_minima_below(h, level.min(0.5 * h.max() + 0.5 * h.min()));
    if locations.is_empty() {
        locations.push(h.x(h.argmin()));
    }
    let t_estimate = singular_time_or(record.hmin_series(), 0.2, last_t);
    Outcome::TouchDown { t_estimate, locations, last_resolved_t: last_t }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Neutral,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Stability::Stable => "Stable",
            Stability::Unstable => "Unstable",
            Stability::Neutral => "Neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub e: f64,
    pub amplitude: f64,
    pub alpha: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationBranch {
    pub q: f64,
    pub points: Vec<BranchPoint>,
}

/// Edges of the mixed-stability window in `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityWindow {
    pub lower: f64,
    pub upper: f64,
}

impl Default for StabilityWindow {
    fn default() -> Self {
        Self { lower: 1.75, upper: 1.794 }
    }
}

impl BifurcationBranch {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,E,amplitude,stability\n");
        for p in &self.points {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", p.alpha, p.e, p.amplitude, p.stability.label()));
        }
        s
    }
}

pub fn bifurcation_branch(q: f64, bond: f64, period: f64, alpha_grid: &[f64]) -> Result<BifurcationBranch> {
    bifurcation_branch_with(q, bond, period, alpha_grid, StabilityWindow::default())
}

/// Amplitude `(h_max - h_min)/2` of the steady state of period `period`
/// built from each `alpha`, with stability labels from the `q` window rules.
pub fn bifurcation_branch_with(
    q: f64,
    bond: f64,
    period: f64,
    alpha_grid: &[f64],
    window: StabilityWindow,
) -> Result<BifurcationBranch> {
    let mut alphas = alpha_grid.to_vec();
    if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::InvalidParameter("alpha grid must lie in (0, 1)".into()));
    }
    alphas.sort_by(f64::total_cmp);
    let mut es = Vec::with_capacity(alphas.len());
    let mut amps = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let c = solve_canonical_sampled(q, a, DEFAULT_TOL, 64)?;
        let s = if q == 1.0 { scale_to_period(&c, period)? } else { scale_with_bond(&c, bond, period)? };
        let kmax = c.profile.values()[32];
        let scale = s.profile.values()[0] / a;
        es.push(c.scale_invariant);
        amps.push(0.5 * scale * (kmax - a));
    }
    let slope = |i: usize| -> f64 {
        let m = alphas.len();
        if m < 2 {
            let a = alphas[i];
            let h = 1e-4 * a.min(1.0 - a);
            let e = |x: f64| canonical_orbit(q, x, DEFAULT_TOL).map(|c| c.scale_invariant).unwrap_or(f64::NAN);
            return (e(a + h) - e(a - h)) / (2.0 * h);
        }
        let (l, r) = if i == 0 { (0, 1) } else if i == m - 1 { (m - 2, m - 1) } else { (i - 1, i + 1) };
        (es[r] - es[l]) / (alphas[r] - alphas[l])
    };
    let points = (0..alphas.len())
        .map(|i| {
            let stability = if q == 1.0 {
                Stability::Neutral
            } else if q < 1.0 || q >= window.upper {
                Stability::Unstable
            } else if q <= window.lower {
                Stability::Stable
            } else {
                let d = slope(i);
                if d < 0.0 {
                    Stability::Stable
                } else if d > 0.0 {
                    Stability::Unstable
                } else {
                    Stability::Neutral
                }
            };
            BranchPoint { e: es[i], amplitude: amps[i], alpha: alphas[i], stability }
        })
        .collect();
    Ok(BifurcationBranch { q, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn potential_has_the_right_curvature() {
        for q in [-3.0, -1.0, 0.0, 0.5, 1.0, 2.5] {
            let ep = EnergyParams::new(ModelParams::from_q(1.0, q, 1.3).unwrap());
            for y in [0.3, 1.0, 2.2] {
                let h = 1e-4;
                let d2 = (ep.potential(y + h) - 2.0 * ep.potential(y) + ep.potential(y - h)) / (h * h);
                assert!((d2 / ep.potential_second(y) - 1.0).abs() < 1e-5, "q={q} y={y}");
            }
        }
    }

    #[test]
    fn energy_of_constant() {
        let p = ModelParams::from_q(1.0, 2.5, 1.5).unwrap();
        let ep = EnergyParams::new(p);
        let f = PeriodicField::constant(3.0, 16, 0.7).unwrap();
        assert!((energy(&f, &ep).unwrap() + 3.0 * ep.potential(0.7)).abs() < 1e-14);
    }

    #[test]
    fn growth_factor_cases() {
        let p = ModelParams::from_q(1.0, 1.5, 1.0).unwrap();
        let kc = p.ratio(2.0).sqrt();
        assert!((growth_factor(kc, 0.1, 2.0, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(growth_factor(3.0, 10.0, 2.0, &p).unwrap().abs() <= 1.0);
        assert!(growth_factor(0.5, 0.1, 2.0, &p).unwrap() > 1.0);
    }

    #[test]
    fn landau_table() {
        let l = landau(1.5, 1.0).unwrap();
        assert!((l.kappa - 1.0 / 48.0).abs() < 1e-16);
        assert_eq!(l.bifurcation, Bifurcation::Supercritical);
        assert!((l.saturation_amplitude.unwrap() - 48f64.sqrt()).abs() < 1e-12);
        assert_eq!(landau(1.0, 1.0).unwrap().bifurcation, Bifurcation::Degenerate);
        assert_eq!(landau(1.75, 1.0).unwrap().saturation_amplitude, None);
        assert_eq!(landau(2.5, 1.0).unwrap().bifurcation, Bifurcation::Subcritical);
    }

    #[test]
    fn constant_stability_cases() {
        let p = ModelParams::from_q(1.0, -3.0, 1.0).unwrap();
        let x = 2.0 * PI;
        assert_eq!(constant_state_stability(2.0, x, &p).unwrap(), ConstantStability::LocalMinimum);
        assert_eq!(constant_state_stability(0.5, x, &p).unwrap(), ConstantStability::Saddle);
        assert_eq!(constant_state_stability(1.0, x, &p).unwrap(), ConstantStability::Marginal);
    }

    #[test]
    fn singularity_time_from_exact_power_laws() {
        for p in [0.2, -1.0 / 7.0, 1.0] {
            let s: Vec<(f64, f64)> = [0.8, 0.9, 0.95].iter().map(|&t| (t, 2.0 * (1.0f64 - t).powf(p))).collect();
            let e = estimate_singularity_time(&s, p).unwrap();
            assert!((e.t_c - 1.0).abs() < 1e-12, "p={p} t_c={}", e.t_c);
            assert!(e.quality < 1e-12);
            let f = estimate_singularity_time_fit(&s).unwrap();
            assert!((f.t_c - 1.0).abs() < 1e-9, "p={p} fit t_c={}", f.t_c);
            assert!((f.exponent - p).abs() < 1e-8);
        }
    }

    #[test]
    fn singularity_time_rejects_flat_and_inconsistent_series() {
        assert!(estimate_singularity_time(&[(0.0, 1.0), (1.0, 1.0)], 0.2).is_err());
        // increasing v with a positive exponent cannot describe touch-down ahead
        assert!(estimate_singularity_time(&[(0.0, 1.0), (1.0, 2.0)], 0.2).is_err());
    }

    #[test]
    fn power_law_fit_is_exact_on_power_laws() {
        let s: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 3.0 / (i as f64).sqrt())).collect();
        let f = fit_power_law(&s).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn minima_counting() {
        let f = make_grid(2.0 * PI, 64, |x| 1.0 - 0.5 * x.cos()).unwrap();
        assert_eq!(count_local_minima_below(&f, 0.6).0, 1);
        assert_eq!(count_local_minima_below(&f, 0.4).0, 0);
        let g = make_grid(2.0 * PI, 64, |x| 1.0 - 0.5 * (2.0 * x).cos()).unwrap();
        let (c, xs) = count_local_minima_below(&g, 0.6);
        assert_eq!(c, 2);
        assert!((xs[1] - xs[0] - PI).abs() < 1e-12);
        let k = PeriodicField::constant(1.0, 16, 1.0).unwrap();
        assert_eq!(count_local_minima_below(&k, 2.0).0, 0);
        let mut v = vec![2.0; 16];
        v[4] = 1.0;
        v[5] = 1.0;
        let plateau = PeriodicField::new(16.0, v).unwrap();
        let (c, xs) = count_local_minima_below(&plateau, 1.5);
        assert_eq!(c, 1);
        assert!((xs[0] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn shift_recovery_on_own_copy() {
        let g = make_grid(2.0 * PI, 128, |x| 1.0 + 0.3 * x.cos() + 0.1 * (2.0 * x).cos()).unwrap();
        let true_shift = 1.2345;
        let h = shift_field(&g, true_shift);
        let (s, d) = best_shift(&h, &g).unwrap();
        assert!((s - true_shift).abs() < g.dx() / 10.0, "{s}");
        assert!(d < 1e-3);
    }
}
