use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mobility exponents and Bond number of `h_t = -(h^n h_xxx)_x - B (h^m h_x)_x`.
///
/// `q = m - n + 1` is stored alongside the exponents; it alone fixes the
/// steady-state family, while `n` only changes the time scale of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: f64,
    pub m: f64,
    pub bond: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(n: f64, m: f64, bond: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::InvalidParameter(format!("n must be >= 0, got {n}")));
        }
        if !m.is_finite() {
            return Err(Error::InvalidParameter(format!("m must be finite, got {m}")));
        }
        if !(bond.is_finite() && bond > 0.0) {
            return Err(Error::InvalidParameter(format!("bond must be > 0, got {bond}")));
        }
        Ok(Self { n, m, bond, q: m - n + 1.0 })
    }

    /// Parameters with a given `q`, choosing `m = q + n - 1`.
    pub fn from_q(n: f64, q: f64, bond: f64) -> Result<Self> {
        let mut p = Self::new(n, q + n - 1.0, bond)?;
        // keep q bit-exact as requested rather than recomputed through m
        p.q = q;
        Ok(p)
    }

    /// Fourth-order mobility `f(y) = y^n`.
    #[inline]
    pub fn mobility(&self, y: f64) -> f64 {
        if self.n == 0.0 {
            1.0
        } else {
            y.powf(self.n)
        }
    }

    /// Ratio `r(y) = g(y)/f(y) = B y^(q-1)`.
    #[inline]
    pub fn ratio(&self, y: f64) -> f64 {
        let e = self.q - 1.0;
        if e == 0.0 {
            self.bond
        } else {
            self.bond * y.powf(e)
        }
    }

    /// Derivative `r'(y) = B (q-1) y^(q-2)`.
    #[inline]
    pub fn ratio_derivative(&self, y: f64) -> f64 {
        let e = self.q - 1.0;
        if e == 0.0 {
            0.0
        } else {
            self.bond * e * y.powf(e - 1.0)
        }
    }

    /// Same exponent difference with a new fourth-order exponent.
    pub fn with_n(&self, n: f64) -> Result<Self> {
        Self::from_q(n, self.q, self.bond)
    }

    pub fn with_bond(&self, bond: f64) -> Result<Self> {
        Self::from_q(self.n, self.q, bond)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_is_derived() {
        let p = ModelParams::new(3.0, -1.0, 1.0).unwrap();
        assert_eq!(p.q, -3.0);
        let p = ModelParams::from_q(1.0, 2.5, 1.561).unwrap();
        assert_eq!(p.m, 2.5);
        assert_eq!(p.q, 2.5);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ModelParams::new(-0.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.5, 1.0).is_ok());
    }

    #[test]
    fn ratio_matches_power_law() {
        let p = ModelParams::from_q(1.0, 1.5, 2.0).unwrap();
        assert!((p.ratio(4.0) - 4.0).abs() < 1e-15);
        assert!((p.ratio_derivative(4.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.mobility(3.0), 3.0);
    }
}
