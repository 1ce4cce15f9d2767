//! Positive periodic steady states.
//!
//! Every positive periodic steady state is a rescaling of a canonical orbit
//! `k'' + (k^q - 1)/q = 0` with minimum `k(0) = alpha`. The orbit's period
//! `P`, area `A` and the invariant `E = P^(3-q) A^(q-1)` organize stability
//! and matching between steady states of different branches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_grid_size, PeriodicField};
use crate::ode::DormandPrince;
use crate::params::ModelParams;

/// Default local error per unit `x` for the canonical ODE.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default sample count of a canonical profile.
pub const DEFAULT_PROFILE_POINTS: usize = 2048;
/// The turning point must be found before this `x`.
pub const TURNING_POINT_LIMIT: f64 = 100.0;
/// Nodes of the `alpha -> 0` extrapolation.
pub const E0_NODES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// `(k^q - 1)/q`, continuous at `q = 0` where it becomes `ln k`.
#[inline]
pub fn canonical_force(q: f64, k: f64) -> f64 {
    if q == 0.0 {
        k.ln()
    } else {
        (q * k.ln()).exp_m1() / q
    }
}

fn canonical_rhs(q: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] {
    move |y: &[f64; 3]| [y[1], -canonical_force(q, y[0]), y[0]]
}

fn check_alpha(q: f64, alpha: f64) -> Result<()> {
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q must be finite, got {q}")));
    }
    let ok = if alpha == 0.0 { q > 0.0 } else { alpha > 0.0 && alpha < 1.0 };
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1) (0 allowed for q > 0), got {alpha} with q = {q}"
        )));
    }
    Ok(())
}

/// Period, area and invariant of a canonical orbit, without the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConstants {
    pub q: f64,
    pub alpha: f64,
    pub period: f64,
    pub area: f64,
    pub scale_invariant: f64,
}

pub fn scale_invariant(q: f64, period: f64, area: f64) -> f64 {
    period.powf(3.0 - q) * area.powf(q - 1.0)
}

/// Integrates the canonical orbit to its first maximum.
pub fn canonical_orbit(q: f64, alpha: f64, tol: f64) -> Result<OrbitConstants> {
    check_alpha(q, alpha)?;
    let mut dp = DormandPrince::new(canonical_rhs(q), tol);
    let mut y = [alpha, 0.0, 0.0];
    let mut x = 0.0;
    while x < TURNING_POINT_LIMIT {
        let (h, y1) = dp.step(&y, TURNING_POINT_LIMIT - x)?;
        if y1[1] <= 0.0 && x > 0.0 {
            let (hs, ys) = locate_turning_point(&dp, &y, h);
            let half = x + hs;
            let period = 2.0 * half;
            let area = 2.0 * ys[2];
            return Ok(OrbitConstants {
                q,
                alpha,
                period,
                area,
                scale_invariant: scale_invariant(q, period, area),
            });
        }
        y = y1;
        x += h;
    }
    Err(Error::TurningPointNotFound { q, alpha, limit: TURNING_POINT_LIMIT })
}

/// Root of `k'` inside a step of length `h` from `y` (where `k' > 0`).
fn locate_turning_point<F: Fn(&[f64; 3]) -> [f64; 3]>(
    dp: &DormandPrince<F, 3>,
    y: &[f64; 3],
    h: f64,
) -> (f64, [f64; 3]) {
    let (mut lo, mut hi) = (0.0, h);
    let (mut glo, mut ghi) = (y[1], dp.trial(y, h).0[1]);
    let mut side = 0i32;
    let mut best = (h, dp.trial(y, h).0);
    for _ in 0..100 {
        // Illinois false position
        let mut s = (lo * ghi - hi * glo) / (ghi - glo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let ys = dp.trial(y, s).0;
        let g = ys[1];
        best = (s, ys);
        if g == 0.0 || (hi - lo) <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if g > 0.0 {
            lo = s;
            glo = g;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = s;
            ghi = g;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    best
}

/// Canonical steady state sampled over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSteadyState {
    pub q: f64,
    pub alpha: f64,
    pub profile: PeriodicField,
    pub period: f64,
    pub area: f64,
    pub scale_invariant: f64,
}

pub fn solve_canonical(q: f64, alpha: f64, tol: f64) -> Result<CanonicalSteadyState> {
    solve_canonical_sampled(q, alpha, tol, DEFAULT_PROFILE_POINTS)
}

/// Canonical steady state with its profile sampled at `n_points` points,
/// minimum at sample 0.
pub fn solve_canonical_sampled(q: f64, alpha: f64, tol: f64, n_points: usize) -> Result<CanonicalSteadyState> {
    check_grid_size(n_points)?;
    let c = canonical_orbit(q, alpha, tol)?;
    let dx = c.period / n_points as f64;
    let half = n_points / 2;
    let mut values = vec![0.0; n_points];
    values[0] = alpha;
    let mut dp = DormandPrince::new(canonical_rhs(q), tol);
    dp.h_max = dp.h_max.min(dx);
    let mut y = [alpha, 0.0, 0.0];
    for (j, slot) in values.iter_mut().enumerate().take(half + 1).skip(1) {
        let length = j as f64 * dx - (j - 1) as f64 * dx;
        y = dp.advance(&y, length)?;
        *slot = y[0];
    }
    for j in half + 1..n_points {
        values[j] = values[n_points - j];
    }
    let profile = PeriodicField::new(c.period, values)?;
    Ok(CanonicalSteadyState {
        q,
        alpha,
        profile,
        period: c.period,
        area: c.area,
        scale_invariant: c.scale_invariant,
    })
}

impl CanonicalSteadyState {
    pub fn constants(&self) -> OrbitConstants {
        OrbitConstants {
            q: self.q,
            alpha: self.alpha,
            period: self.period,
            area: self.area,
            scale_invariant: self.scale_invariant,
        }
    }
}

/// A physical steady state `h'' + (B h^q - D)/q = 0` of period `P_ss`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSteadyState {
    pub params: ModelParams,
    pub d: f64,
    pub period: f64,
    pub area: f64,
    pub profile: PeriodicField,
    pub source_alpha: f64,
    pub source_invariant: f64,
}

impl RescaledSteadyState {
    pub fn scale_invariant(&self) -> f64 {
        self.params.bond * scale_invariant(self.params.q, self.period, self.area)
    }

    pub fn mean(&self) -> f64 {
        self.area / self.period
    }

    pub fn manifest(&self) -> SteadyManifest {
        SteadyManifest {
            q: self.params.q,
            alpha: self.source_alpha,
            period: self.period,
            area: self.area,
            e: self.source_invariant,
            bond: self.params.bond,
            d: self.d,
            n: self.profile.len(),
        }
    }
}

/// Interchange record written next to a steady-state snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyManifest {
    pub q: f64,
    pub alpha: f64,
    #[serde(rename = "P")]
    pub period: f64,
    #[serde(rename = "A")]
    pub area: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub bond: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

fn rescale(c: &CanonicalSteadyState, amplitude: f64, bond: f64, d: f64, target_period: f64) -> Result<RescaledSteadyState> {
    let params = ModelParams::from_q(1.0, c.q, bond)?;
    let values: Vec<f64> = c.profile.values().iter().map(|k| amplitude * k).collect();
    let profile = PeriodicField::new(target_period, values)?;
    Ok(RescaledSteadyState {
        params,
        d,
        period: target_period,
        area: amplitude * (target_period / c.period) * c.area,
        profile,
        source_alpha: c.alpha,
        source_invariant: c.scale_invariant,
    })
}

fn check_target(target_period: f64) -> Result<()> {
    if !(target_period.is_finite() && target_period > 0.0) {
        return Err(Error::InvalidParameter(format!("target period must be positive, got {target_period}")));
    }
    Ok(())
}

/// Rescales to period `T` with `D = 1`: `B = (P/T)^(2q)`, `h = B^(-1/q) k`.
///
/// The returned params carry `n = 1`; the steady state does not depend on
/// `n`, so callers swap it with [`ModelParams::with_n`].
pub fn scale_to_period(c: &CanonicalSteadyState, target_period: f64) -> Result<RescaledSteadyState> {
    if c.q == 0.0 {
        return Err(Error::InvalidParameter("q = 0 has no power-law rescaling".into()));
    }
    check_target(target_period)?;
    let s = target_period / c.period;
    let bond = s.powf(-2.0 * c.q);
    rescale(c, s * s, bond, 1.0, target_period)
}

/// Rescales to period `T` under a prescribed Bond number; `D` and the
/// amplitude follow from `c (P/T)^2 = B c^q = D`.
pub fn scale_with_bond(c: &CanonicalSteadyState, bond: f64, target_period: f64) -> Result<RescaledSteadyState> {
    if c.q == 0.0 {
        return Err(Error::InvalidParameter("q = 0 has no power-law rescaling".into()));
    }
    if !(bond.is_finite() && bond > 0.0) {
        return Err(Error::InvalidParameter(format!("bond must be > 0, got {bond}")));
    }
    check_target(target_period)?;
    let s = target_period / c.period;
    if c.q == 1.0 {
        // the amplitude is free and only B = (P/T)^2 is compatible
        let b1 = s.powi(-2);
        if ((bond - b1) / b1).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "for q = 1 the period {target_period} requires bond {b1}, got {bond}"
            )));
        }
        return rescale(c, s * s, bond, 1.0, target_period);
    }
    let amplitude = (bond * s * s).powf(1.0 / (1.0 - c.q));
    let d = amplitude / (s * s);
    rescale(c, amplitude, bond, d, target_period)
}

/// Location of the minimum of `E(alpha)` on `[lo, hi]` by golden section.
pub fn minimize_invariant(q: f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let e = |a: f64| canonical_orbit(q, a, tol).map(|c| c.scale_invariant);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (e(c)?, e(d)?);
    while b - a > 1e-7 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = e(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = e(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, e(x)?))
}

/// Partner on the opposite branch of `E(alpha)` with the same invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedAlpha {
    pub alpha: f64,
    pub scale_invariant: f64,
    pub target: f64,
    pub alpha_at_minimum: f64,
}

const MATCH_TOL: f64 = 1e-13;
const ALPHA_LO: f64 = 1e-4;
const ALPHA_HI: f64 = 0.999;

/// Finds `alpha2 != alpha1` with `E(alpha2) = E(alpha1)`: bracket on the
/// other side of the minimum of `E`, interpolate through six samples with a
/// quintic, Newton on the interpolant, then polish with true evaluations.
pub fn find_matching_alpha(q: f64, alpha1: f64) -> Result<MatchedAlpha> {
    let tol = MATCH_TOL;
    let target = canonical_orbit(q, alpha1, tol)?.scale_invariant;
    let (a_min, e_min) = minimize_invariant(q, ALPHA_LO, ALPHA_HI, tol)?;
    if (alpha1 - a_min).abs() < 1e-4 || target - e_min < 1e-10 * target {
        return Err(Error::NoBracket(format!(
            "alpha1 = {alpha1} sits at the minimum of E (alpha = {a_min:.6})"
        )));
    }
    let (lo, hi) = if alpha1 < a_min { (a_min, ALPHA_HI) } else { (ALPHA_LO, a_min) };
    let g = |a: f64| canonical_orbit(q, a, tol).map(|c| c.scale_invariant - target);

    let steps = 64;
    let grid: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let mut vals = Vec::with_capacity(grid.len());
    for &a in &grid {
        vals.push(g(a)?);
    }
    let j = (0..steps)
        .find(|&i| vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum())
        .ok_or_else(|| Error::NoBracket(format!("E(alpha) - {target} keeps one sign on [{lo}, {hi}]")))?;

    // six nodes: three at or left of the crossing, three right of it
    let first = j.saturating_sub(2).min(grid.len() - 6);
    let xs: Vec<f64> = grid[first..first + 6].to_vec();
    let ys: Vec<f64> = vals[first..first + 6].to_vec();
    let poly = interpolating_polynomial(&xs, &ys)?;
    let mut a = 0.5 * (grid[j] + grid[j + 1]);
    for _ in 0..50 {
        let (p, dp) = eval_poly(&poly, a);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        a = (a - step).clamp(grid[j], grid[j + 1]);
        if step.abs() < 1e-15 {
            break;
        }
    }

    // secant polish on the true invariant
    let (mut a0, mut g0) = (a, g(a)?);
    let mut a1 = a0 + 1e-6 * (hi - lo);
    let mut g1 = g(a1)?;
    for _ in 0..30 {
        if g1.abs() < 1e-9 * target || g1 == g0 {
            break;
        }
        let a2 = a1 - g1 * (a1 - a0) / (g1 - g0);
        a0 = a1;
        g0 = g1;
        a1 = a2;
        g1 = g(a1)?;
    }
    if g0.abs() < g1.abs() {
        std::mem::swap(&mut a0, &mut a1);
        std::mem::swap(&mut g0, &mut g1);
    }
    if g1.abs() > 1e-8 * target {
        return Err(Error::NoConvergence { iterations: 30, residual: g1.abs() });
    }
    Ok(MatchedAlpha { alpha: a1, scale_invariant: g1 + target, target, alpha_at_minimum: a_min })
}

/// Monomial coefficients (lowest first) of the interpolant, in a centered and
/// scaled variable to keep the Vandermonde system well conditioned.
#[derive(Debug, Clone)]
struct Poly {
    center: f64,
    scale: f64,
    coeffs: Vec<f64>,
}

fn interpolating_polynomial(xs: &[f64], ys: &[f64]) -> Result<Poly> {
    let n = xs.len();
    let center = xs.iter().sum::<f64>() / n as f64;
    let scale = xs.iter().map(|x| (x - center).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let v = nalgebra::DMatrix::from_fn(n, n, |i, j| ((xs[i] - center) / scale).powi(j as i32));
    let c = v
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(ys))
        .ok_or_else(|| Error::SingularMatrix("Vandermonde system".into()))?;
    Ok(Poly { center, scale, coeffs: c.as_slice().to_vec() })
}

fn eval_poly(p: &Poly, x: f64) -> (f64, f64) {
    let t = (x - p.center) / p.scale;
    let (mut v, mut d) = (0.0, 0.0);
    for &c in p.coeffs.iter().rev() {
        d = d * t + v;
        v = v * t + c;
    }
    (v, d / p.scale)
}

/// `E_0(q) = lim_{alpha -> 0} E(alpha)`, linear Richardson step on the two
/// smallest nodes of [`E0_NODES`].
pub fn compute_e0(q: f64, tol: f64) -> Result<f64> {
    if !(q > -1.0) {
        return Err(Error::InvalidParameter(format!("E0 is defined for q > -1, got {q}")));
    }
    let a2 = E0_NODES[1];
    let a3 = E0_NODES[2];
    let e2 = canonical_orbit(q, a2, tol)?.scale_invariant;
    let e3 = canonical_orbit(q, a3, tol)?.scale_invariant;
    Ok(e3 - a3 * (e2 - e3) / (a2 - a3))
}

/// Zero-contact-angle droplet of a given area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletGeometry {
    pub q: f64,
    pub e0: f64,
    pub bond: f64,
    pub area: f64,
}

impl DropletGeometry {
    pub fn new(q: f64, bond: f64, area: f64) -> Result<Self> {
        check_droplet(q, bond, area)?;
        Ok(Self { q, e0: compute_e0(q, DEFAULT_TOL)?, bond, area })
    }

    /// Builds a geometry from a precomputed `E_0`.
    pub fn with_e0(q: f64, e0: f64, bond: f64, area: f64) -> Result<Self> {
        check_droplet(q, bond, area)?;
        if !(e0 > 0.0) {
            return Err(Error::InvalidParameter(format!("E0 must be positive, got {e0}")));
        }
        Ok(Self { q, e0, bond, area })
    }

    /// `P = (E_0 A^(1-q) / B)^(1/(3-q))`.
    pub fn length(&self) -> f64 {
        length_from_e0(self.q, self.e0, self.bond, self.area)
    }

    /// Combined length of droplets of area `lambda A` and `(1-lambda) A`.
    pub fn two_droplet_length(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
        }
        Ok(length_from_e0(self.q, self.e0, self.bond, lambda * self.area)
            + length_from_e0(self.q, self.e0, self.bond, (1.0 - lambda) * self.area))
    }
}

fn check_droplet(q: f64, bond: f64, area: f64) -> Result<()> {
    if !(q > -1.0 && q < 3.0) {
        return Err(Error::InvalidParameter(format!("droplet lengths need -1 < q < 3, got {q}")));
    }
    if !(bond > 0.0 && area > 0.0) {
        return Err(Error::InvalidParameter(format!("bond and area must be positive, got {bond}, {area}")));
    }
    Ok(())
}

fn length_from_e0(q: f64, e0: f64, bond: f64, area: f64) -> f64 {
    (e0 * area.powf(1.0 - q) / bond).powf(1.0 / (3.0 - q))
}

pub fn droplet_length(q: f64, bond: f64, area: f64) -> Result<f64> {
    Ok(DropletGeometry::new(q, bond, area)?.length())
}

pub fn two_droplet_length(q: f64, bond: f64, area: f64, lambda: f64) -> Result<f64> {
    DropletGeometry::new(q, bond, area)?.two_droplet_length(lambda)
}

/// Effective Bond number whose discrete `q = 1` steady states are sampled
/// cosines: `2 (1 - cos(sqrt(B) dx)) / dx^2`.
pub fn q1_fd_bond(bond: f64, dx: f64) -> Result<f64> {
    if !(bond > 0.0 && dx > 0.0) {
        return Err(Error::InvalidParameter(format!("bond and dx must be positive, got {bond}, {dx}")));
    }
    let s = bond.sqrt() * dx;
    // 1 - cos s = 2 sin^2(s/2), free of cancellation
    Ok(4.0 * (0.5 * s).sin().powi(2) / (dx * dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::derivative;
    use std::f64::consts::PI;

    #[test]
    fn period_tends_to_two_pi_near_one() {
        for q in [-3.0, 0.0, 0.5, 1.5, 4.0] {
            let c = canonical_orbit(q, 0.999, DEFAULT_TOL).unwrap();
            assert!((c.period - 2.0 * PI).abs() < 1e-2, "q={q} P={}", c.period);
            assert!((c.area - 2.0 * PI).abs() < 1e-2);
        }
    }

    #[test]
    fn linear_case_has_period_two_pi() {
        let c = canonical_orbit(1.0, 0.3, DEFAULT_TOL).unwrap();
        assert!((c.period - 2.0 * PI).abs() < 1e-10);
        // k = 1 - 0.7 cos x has mean 1
        assert!((c.area - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn canonical_profile_solves_its_ode() {
        for (q, a, n) in [(1.5, 0.2145, 512), (-3.0, 0.2145, 2048), (0.0, 0.4, 512)] {
            let c = solve_canonical_sampled(q, a, DEFAULT_TOL, n).unwrap();
            let k2 = derivative(&c.profile, 2).unwrap();
            let res = c
                .profile
                .values()
                .iter()
                .zip(k2.values())
                .map(|(k, d)| (d + canonical_force(q, *k)).abs())
                .fold(0.0, f64::max);
            assert!(res < 1e-9, "q={q} residual {res:e}");
            assert_eq!(c.profile.values()[0], a);
            assert!((c.profile.mass() - c.area).abs() < 1e-9);
        }
    }

    #[test]
    fn rescaled_state_keeps_the_invariant() {
        let c = solve_canonical_sampled(2.5, 0.2145, DEFAULT_TOL, 256).unwrap();
        let s = scale_to_period(&c, 2.0 * PI).unwrap();
        assert!((s.scale_invariant() / c.scale_invariant - 1.0).abs() < 1e-10);
        let t = scale_with_bond(&c, s.params.bond, 2.0 * PI).unwrap();
        assert!((t.d - 1.0).abs() < 1e-12);
        assert!((t.area - s.area).abs() < 1e-12 * s.area);
    }

    #[test]
    fn rescaled_profile_solves_steady_equation() {
        let c = solve_canonical_sampled(1.768, 0.5069, DEFAULT_TOL, 256).unwrap();
        let s = scale_with_bond(&c, 1.257, 2.0 * PI).unwrap();
        let h2 = derivative(&s.profile, 2).unwrap();
        let q = s.params.q;
        let res = s
            .profile
            .values()
            .iter()
            .zip(h2.values())
            .map(|(h, d)| (d + (s.params.bond * h.powf(q) - s.d) / q).abs())
            .fold(0.0, f64::max);
        assert!(res < 1e-9, "{res:e}");
    }

    #[test]
    fn q_zero_rescaling_is_an_error() {
        let c = solve_canonical_sampled(0.0, 0.4, DEFAULT_TOL, 64).unwrap();
        assert!(scale_to_period(&c, 2.0 * PI).is_err());
    }

    #[test]
    fn alpha_domain() {
        assert!(canonical_orbit(0.5, 1.0, DEFAULT_TOL).is_err());
        assert!(canonical_orbit(-0.5, 0.0, DEFAULT_TOL).is_err());
        assert!(canonical_orbit(0.5, 0.0, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn q1_bond_closed_form_and_series() {
        let v = q1_fd_bond(4.0, PI / 2.0).unwrap();
        assert!((v - 16.0 / (PI * PI)).abs() < 1e-14);
        let dx = 2.0 * PI / 2048.0;
        let s2 = dx * dx;
        let series = 1.0 - s2 / 12.0 + s2 * s2 / 360.0;
        assert!((q1_fd_bond(1.0, dx).unwrap() - series).abs() < 1e-15);
    }

    #[test]
    fn quintic_interpolation_is_exact_on_quintics() {
        let xs: Vec<f64> = (0..6).map(|i| 0.3 + 0.01 * i as f64).collect();
        let f = |x: f64| 2.0 - x + 3.0 * x.powi(5);
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let p = interpolating_polynomial(&xs, &ys).unwrap();
        let (v, d) = eval_poly(&p, 0.337);
        assert!((v - f(0.337)).abs() < 1e-10);
        assert!((d - (-1.0 + 15.0 * 0.337f64.powi(4))).abs() < 1e-7);
    }
}
