//! Fourier utilities on periodic fields: power spectrum, resolution test,
//! zero-padded point doubling and spectral derivatives.
//!
//! Coefficients follow `a_k = (1/N) sum_j h_j exp(-2 pi i j k / N)`; the
//! one-sided amplitude reported for `k >= 1` is `2 |a_k|`, so `cos(5x)` has
//! amplitude one at `k = 5` and a constant `c` has amplitude `|c|` at `k = 0`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::PeriodicField;

/// Default top-of-band fraction inspected by [`is_resolved`].
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
/// Default relative amplitude treated as round-off by [`is_resolved`].
pub const DEFAULT_ROUNDOFF_LEVEL: f64 = 1e-11;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Normalized complex coefficients `a_k`, `k = 0..N` in FFT order.
pub fn coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Inverse of [`coefficients`], returning the real part.
pub fn synthesize(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    inverse_plan(n).process(&mut coeffs);
    coeffs.into_iter().map(|c| c.re).collect()
}

/// Signed wavenumber of FFT slot `j` on an `n`-point mesh.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    /// One-sided amplitudes for `k = 0..N/2`.
    pub amplitudes: Vec<f64>,
}

impl PowerSpectrum {
    pub fn max(&self) -> f64 {
        self.amplitudes.iter().copied().fold(0.0, f64::max)
    }
}

pub fn power_spectrum(field: &PeriodicField) -> PowerSpectrum {
    let n = field.len();
    let a = coefficients(field.values());
    let amplitudes = (0..n / 2)
        .map(|k| if k == 0 { a[0].norm() } else { 2.0 * a[k].norm() })
        .collect();
    PowerSpectrum { amplitudes }
}

/// True when every amplitude in the top `tail_fraction` of the band is below
/// `roundoff_level` times the largest amplitude.
pub fn is_resolved(field: &PeriodicField, tail_fraction: f64, roundoff_level: f64) -> bool {
    let spec = power_spectrum(field);
    spectrum_is_resolved(&spec, tail_fraction, roundoff_level)
}

pub fn spectrum_is_resolved(spec: &PowerSpectrum, tail_fraction: f64, roundoff_level: f64) -> bool {
    let half = spec.amplitudes.len();
    let start = ((1.0 - tail_fraction) * half as f64).floor() as usize;
    let start = start.min(half.saturating_sub(1));
    let overall = spec.max();
    if overall == 0.0 {
        return true;
    }
    let tail = spec.amplitudes[start..].iter().copied().fold(0.0, f64::max);
    tail < roundoff_level * overall
}

pub fn is_resolved_default(field: &PeriodicField) -> bool {
    is_resolved(field, DEFAULT_TAIL_FRACTION, DEFAULT_ROUNDOFF_LEVEL)
}

/// Trigonometric re-interpolation onto `new_n` points. Wavenumbers with
/// `|k| < min(N, new_n) / 2` are carried over, everything else (including
/// the Nyquist mode) is dropped.
pub fn resample(field: &PeriodicField, new_n: usize) -> Result<PeriodicField> {
    let n = field.len();
    if new_n == n {
        return Ok(field.clone());
    }
    crate::grid::check_grid_size(new_n)?;
    let a = coefficients(field.values());
    let keep = n.min(new_n) / 2;
    let mut b = vec![Complex64::new(0.0, 0.0); new_n];
    b[0] = a[0];
    for k in 1..keep {
        b[k] = a[k];
        b[new_n - k] = a[n - k];
    }
    PeriodicField::new(field.period_length(), synthesize(b))
}

/// Zero-pad the Fourier representation to `2N` points.
///
/// A constant field is returned exactly (the FFT round trip is skipped).
pub fn zero_pad_double(field: &PeriodicField) -> PeriodicField {
    let v = field.values();
    if v.iter().all(|&x| x == v[0]) {
        return PeriodicField::from_parts_unchecked(field.period_length(), vec![v[0]; 2 * v.len()]);
    }
    resample(field, 2 * field.len()).expect("doubling a valid field stays valid")
}

/// Spectral derivative of order `order` (Nyquist mode zeroed).
pub fn derivative(field: &PeriodicField, order: u32) -> Result<PeriodicField> {
    let n = field.len();
    let a = coefficients(field.values());
    let base = 2.0 * std::f64::consts::PI / field.period_length();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in a.iter().enumerate() {
        let k = wavenumber(j, n);
        if 2 * k.unsigned_abs() as usize == n {
            continue;
        }
        let ik = Complex64::new(0.0, base * k as f64);
        d[j] = c * ik.powu(order);
    }
    let mut values = synthesize(d);
    if n > 0 {
        // derivatives of periodic functions have zero mean
        let mean = values.iter().sum::<f64>() / n as f64;
        if order > 0 {
            for v in &mut values {
                *v -= mean;
            }
        }
    }
    PeriodicField::new(field.period_length(), values)
}

/// Evaluates the trigonometric interpolant of `field` at arbitrary `x`
/// by direct summation (Nyquist mode dropped).
pub fn interpolate_at(coeffs: &[Complex64], period_length: f64, x: f64) -> f64 {
    let n = coeffs.len();
    let base = 2.0 * std::f64::consts::PI / period_length;
    let mut s = coeffs[0].re;
    for k in 1..n / 2 {
        let e = Complex64::from_polar(1.0, base * k as f64 * x);
        s += 2.0 * (coeffs[k] * e).re;
    }
    s
}
