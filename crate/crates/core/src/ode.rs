//! Dormand–Prince 5(4) integrator for small autonomous systems.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator state for `y' = f(y)`.
pub struct DormandPrince<F, const D: usize> {
    rhs: F,
    pub tol: f64,
    pub h: f64,
    pub h_max: f64,
}

impl<F, const D: usize> DormandPrince<F, D>
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    pub fn new(rhs: F, tol: f64) -> Self {
        Self { rhs, tol, h: tol.powf(0.2).min(1e-2), h_max: 0.1 }
    }

    #[inline]
    fn comb(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
        let mut out = *y;
        for (c, k) in terms {
            for i in 0..D {
                out[i] += h * c * k[i];
            }
        }
        out
    }

    /// One trial step of length `h`: returns the fifth-order solution and a
    /// scaled error estimate (<= 1 means acceptable).
    pub fn trial(&self, y: &[f64; D], h: f64) -> ([f64; D], f64) {
        let f = &self.rhs;
        let k1 = f(y);
        let k2 = f(&Self::comb(y, h, &[(A21, &k1)]));
        let k3 = f(&Self::comb(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&Self::comb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&Self::comb(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&Self::comb(
            y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y5 = Self::comb(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y5);
        let mut err = 0.0f64;
        for i in 0..D {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            // error per unit step, mixed absolute/relative scale
            let sc = self.tol * (1.0 + y[i].abs().max(y5[i].abs()));
            err = err.max((e / h.max(f64::MIN_POSITIVE)).abs() / sc);
        }
        (y5, err)
    }

    /// Advances by one adaptive step not exceeding `limit`; returns
    /// `(step_taken, new_state)`.
    pub fn step(&mut self, y: &[f64; D], limit: f64) -> Result<(f64, [f64; D])> {
        let mut h_ctrl = self.h.min(self.h_max);
        for _ in 0..200 {
            let clipped = limit < h_ctrl;
            let h = if clipped { limit } else { h_ctrl };
            let (y5, err) = self.trial(y, h);
            let finite = y5.iter().all(|v| v.is_finite());
            if finite && err <= 1.0 {
                if !clipped {
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    self.h = (h * fac).min(self.h_max);
                }
                return Ok((h, y5));
            }
            let fac = if finite { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.25 };
            h_ctrl = h * fac;
            self.h = h_ctrl;
            if h_ctrl < 1e-14 {
                break;
            }
        }
        Err(Error::Integration(format!("step size underflow at h = {h_ctrl:e}")))
    }

    /// Integrates exactly over `[0, length]`.
    pub fn advance(&mut self, y0: &[f64; D], length: f64) -> Result<[f64; D]> {
        let mut y = *y0;
        let mut done = 0.0;
        while done < length {
            let remaining = length - done;
            let (h, y1) = self.step(&y, remaining)?;
            y = y1;
            if h >= remaining * (1.0 - 1e-15) {
                break;
            }
            done += h;
        }
        Ok(y)
    }
}
