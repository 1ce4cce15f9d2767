//! Finite-difference steady states.
//!
//! The discrete steady-state system is
//!
//! ```text
//! F_i = h_{i+2} - 3 h_{i+1} + 3 h_i - h_{i-1}
//!       + dx^2 (r(h_{i+1}) + r(h_i))/2 (h_{i+1} - h_i) = 0,
//! ```
//!
//! which is exactly the flux that the time stepper drives to zero, so its
//! solutions are fixed points of the evolution. The Jacobian is rank
//! deficient by one (the mean is free); Newton steps therefore solve the
//! bordered system `[J 1; 1^T 0] [delta; lambda] = [F; 0]`, which keeps the
//! mean exactly. A dense SVD variant with the smallest singular value
//! discarded is kept for small meshes.

use crate::banded::{solve_bordered, CyclicBanded};
use crate::error::{Error, Result};
use crate::grid::PeriodicField;
use crate::params::ModelParams;
use crate::spectral::resample;
use crate::steady::RescaledSteadyState;

pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const RESIDUAL_TARGET: f64 = 1e-14;
/// Newton steps taken after the residual target is met. The max-norm
/// residual stalls at rounding level after one step, but its smooth part
/// keeps shrinking; that part is what the time stepper sees.
pub const POLISH_ITERATIONS: usize = 2;
/// A second singular value below this fraction of the largest aborts the
/// SVD update: the null space would not be one-dimensional.
pub const SECOND_NULL_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct FDSteadyState {
    pub profile: PeriodicField,
    pub params: ModelParams,
    pub residual_max: f64,
    pub iterations: usize,
}

/// Rowwise residual `F_i`.
pub fn fd_residual(h: &[f64], dx: f64, params: &ModelParams) -> Vec<f64> {
    let n = h.len();
    let dx2 = dx * dx;
    let r: Vec<f64> = h.iter().map(|&y| params.ratio(y)).collect();
    let d: Vec<f64> = (0..n).map(|i| h[(i + 1) % n] - h[i]).collect();
    (0..n)
        .map(|i| {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            (d[ip] - 2.0 * d[i] + d[im]) + dx2 * 0.5 * (r[ip] + r[i]) * d[i]
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Jacobian of [`fd_residual`] as a cyclic band with offsets `-1..=2`.
pub fn fd_jacobian(h: &[f64], dx: f64, params: &ModelParams) -> CyclicBanded {
    let n = h.len();
    let dx2 = dx * dx;
    let mut j = CyclicBanded::zeros(n, 1, 2);
    for i in 0..n {
        let ip = (i + 1) % n;
        let di = h[ip] - h[i];
        let rbar = 0.5 * (params.ratio(h[ip]) + params.ratio(h[i]));
        j.diag_mut(2)[i] = 1.0;
        j.diag_mut(1)[i] = -3.0 + dx2 * (rbar + 0.5 * params.ratio_derivative(h[ip]) * di);
        j.diag_mut(0)[i] = 3.0 + dx2 * (-rbar + 0.5 * params.ratio_derivative(h[i]) * di);
        j.diag_mut(-1)[i] = -1.0;
    }
    j
}

fn check_positive(field: &PeriodicField) -> Result<()> {
    let min = field.min();
    if !(min > 0.0) {
        return Err(Error::NonPositive { min, context: "steady-state seed".into() });
    }
    Ok(())
}

/// Newton iteration from `seed` on its own mesh, preserving its mean.
pub fn fd_steady_state_from(seed: &PeriodicField, params: &ModelParams) -> Result<FDSteadyState> {
    check_positive(seed)?;
    let dx = seed.dx();
    let mut h = seed.values().to_vec();
    let mut res = fd_residual(&h, dx, params);
    let mut best = max_abs(&res);
    let mut iterations = 0;
    while best >= RESIDUAL_TARGET {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: best });
        }
        bordered_update(&mut h, &res, dx, params)?;
        iterations += 1;
        res = fd_residual(&h, dx, params);
        best = max_abs(&res);
        if !best.is_finite() {
            return Err(Error::NoConvergence { iterations, residual: best });
        }
    }
    if iterations > 0 {
        for _ in 0..POLISH_ITERATIONS {
            let mut trial = h.clone();
            bordered_update(&mut trial, &res, dx, params)?;
            let r = fd_residual(&trial, dx, params);
            let m = max_abs(&r);
            if !(m < RESIDUAL_TARGET) {
                break;
            }
            h = trial;
            res = r;
            best = m;
            iterations += 1;
        }
    }
    Ok(FDSteadyState {
        profile: PeriodicField::new(seed.period_length(), h)?,
        params: *params,
        residual_max: best,
        iterations,
    })
}

fn bordered_update(h: &mut [f64], res: &[f64], dx: f64, params: &ModelParams) -> Result<()> {
    let jac = fd_jacobian(h, dx, params);
    let (delta, _) = solve_bordered(&jac, res, 0.0)?;
    for (hi, di) in h.iter_mut().zip(&delta) {
        *hi -= di;
    }
    Ok(())
}

/// Finite-difference steady state on `n` points seeded by an analytic one.
pub fn fd_steady_state(seed: &RescaledSteadyState, n: usize) -> Result<FDSteadyState> {
    let field = resample(&seed.profile, n)?;
    fd_steady_state_from(&field, &seed.params)
}

/// Newton iteration with the dense pseudo-inverse update. `O(N^3)` per step;
/// intended for small meshes and as a cross-check of the bordered solver.
pub fn fd_steady_state_svd(seed: &PeriodicField, params: &ModelParams) -> Result<FDSteadyState> {
    check_positive(seed)?;
    let dx = seed.dx();
    let n = seed.len();
    let mut h = seed.values().to_vec();
    let mut res = fd_residual(&h, dx, params);
    let mut best = max_abs(&res);
    let mut iterations = 0;
    while best >= RESIDUAL_TARGET {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: best });
        }
        let jac = fd_jacobian(&h, dx, params).to_dense();
        let svd = jac.svd(true, true);
        let u = svd.u.as_ref().expect("requested u");
        let vt = svd.v_t.as_ref().expect("requested v_t");
        let s = &svd.singular_values;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        let smax = s[order[n - 1]];
        if s[order[1]] < SECOND_NULL_TOLERANCE * smax {
            return Err(Error::SingularMatrix(format!(
                "second singular value {:e} is below {SECOND_NULL_TOLERANCE:e} x {smax:e}",
                s[order[1]]
            )));
        }
        let null = order[0];
        let f = nalgebra::DVector::from_column_slice(&res);
        let utf = u.transpose() * f;
        let mut delta = vec![0.0; n];
        for k in 0..n {
            if k == null {
                continue;
            }
            let c = utf[k] / s[k];
            for (i, d) in delta.iter_mut().enumerate() {
                *d += c * vt[(k, i)];
            }
        }
        // the pseudo-inverse update is orthogonal to the null vector, not to
        // constants; restore the mean along the discarded direction
        let vsum: f64 = (0..n).map(|i| vt[(null, i)]).sum();
        let dsum: f64 = delta.iter().sum();
        if vsum.abs() > 1e-8 {
            let c = -dsum / vsum;
            for (i, d) in delta.iter_mut().enumerate() {
                *d += c * vt[(null, i)];
            }
        }
        for (hi, di) in h.iter_mut().zip(&delta) {
            *hi -= di;
        }
        iterations += 1;
        res = fd_residual(&h, dx, params);
        best = max_abs(&res);
        if !best.is_finite() {
            return Err(Error::NoConvergence { iterations, residual: best });
        }
    }
    Ok(FDSteadyState {
        profile: PeriodicField::new(seed.period_length(), h)?,
        params: *params,
        residual_max: best,
        iterations,
    })
}
