//! Uniform periodic meshes.
//!
//! A [`PeriodicField`] holds `N` samples of a function on a circle of
//! circumference `X`. Sample `i` sits at `x = i * X / N`; index `N` aliases
//! index `0`, so all stencil arithmetic is taken modulo `N`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicField {
    period_length: f64,
    values: Vec<f64>,
}

pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::BadGridSize(n));
    }
    Ok(())
}

/// Samples `f` at `x_i = i * X / N`.
pub fn make_grid<F: Fn(f64) -> f64>(period_length: f64, n: usize, f: F) -> Result<PeriodicField> {
    let dx = period_length / n as f64;
    check_grid_size(n)?;
    if !(period_length.is_finite() && period_length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "period length must be positive, got {period_length}"
        )));
    }
    PeriodicField::new(period_length, (0..n).map(|i| f(i as f64 * dx)).collect())
}

impl PeriodicField {
    pub fn new(period_length: f64, values: Vec<f64>) -> Result<Self> {
        check_grid_size(values.len())?;
        if !(period_length.is_finite() && period_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "period length must be positive, got {period_length}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { period_length, values })
    }

    /// Builds a field from values already known to be valid (same size rules).
    pub(crate) fn from_parts_unchecked(period_length: f64, values: Vec<f64>) -> Self {
        debug_assert!(values.len().is_power_of_two());
        Self { period_length, values }
    }

    pub fn constant(period_length: f64, n: usize, value: f64) -> Result<Self> {
        make_grid(period_length, n, |_| value)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn period_length(&self) -> f64 {
        self.period_length
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.period_length / self.values.len() as f64
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Value at a possibly out-of-range index, wrapped periodically.
    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        let n = self.values.len() as isize;
        self.values[i.rem_euclid(n) as usize]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rectangle-rule integral `dx * sum(h_i)`.
    pub fn mass(&self) -> f64 {
        self.dx() * self.values.iter().sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &PeriodicField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `self + scale * other`, on the same mesh.
    pub fn axpy(&self, scale: f64, other: &PeriodicField) -> Result<PeriodicField> {
        if self.len() != other.len() {
            return Err(Error::InvalidParameter(format!(
                "mesh sizes differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        PeriodicField::new(self.period_length, values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<PeriodicField> {
        PeriodicField::new(self.period_length, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Circular shift by whole mesh cells: `result[i] = self[i - cells]`.
    pub fn roll(&self, cells: isize) -> PeriodicField {
        let n = self.len() as isize;
        let values = (0..n).map(|i| self.at(i - cells)).collect();
        PeriodicField::from_parts_unchecked(self.period_length, values)
    }

    /// Every `stride`-th sample, keeping the period.
    pub fn subsample(&self, stride: usize) -> Result<PeriodicField> {
        PeriodicField::new(
            self.period_length,
            self.values.iter().step_by(stride.max(1)).copied().collect(),
        )
    }

    /// CSV snapshot text: header `x,h`, 17 significant digits, no trailing blank line.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(40 * (self.len() + 1));
        s.push_str("x,h");
        for (i, v) in self.values.iter().enumerate() {
            let _ = write!(s, "\n{:.16e},{:.16e}", self.x(i), v);
        }
        s.push('\n');
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parses a snapshot written by [`PeriodicField::to_csv`]. The period is
    /// recovered as `N * (x_1 - x_0)`.
    pub fn from_csv(text: &str) -> Result<PeriodicField> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("x,h") => {}
            other => return Err(Error::Io(format!("bad snapshot header: {other:?}"))),
        }
        let mut xs = Vec::new();
        let mut hs = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> Result<f64> {
                p.ok_or_else(|| Error::Io(format!("line {}: missing column", lineno + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Io(format!("line {}: {e}", lineno + 2)))
            };
            xs.push(parse(parts.next())?);
            hs.push(parse(parts.next())?);
        }
        if xs.len() < 2 {
            return Err(Error::Io("snapshot has fewer than two rows".into()));
        }
        let period = (xs[1] - xs[0]) * xs.len() as f64;
        PeriodicField::new(period, hs)
    }

    pub fn read_csv(path: &Path) -> Result<PeriodicField> {
        let f = std::fs::File::open(path)?;
        let text: std::io::Result<Vec<String>> = std::io::BufReader::new(f).lines().collect();
        Self::from_csv(&text?.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_grid() {
        let f = make_grid(2.0 * PI, 8, |_| 1.0).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
        assert_eq!(f.dx(), 2.0 * PI / 8.0);
    }

    #[test]
    fn cosine_samples() {
        let f = make_grid(2.0 * PI, 16, f64::cos).unwrap();
        for i in 0..16 {
            assert_eq!(f.values()[i], (i as f64 * 2.0 * PI / 16.0).cos());
        }
        let g = make_grid(4.0 * PI, 32, |x| (x / 2.0).cos()).unwrap();
        assert!((g.values()[0] - 1.0).abs() < 1e-15);
        assert!((g.values()[16] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn bad_grids_rejected() {
        assert_eq!(make_grid(1.0, 12, |_| 0.0), Err(Error::BadGridSize(12)));
        assert_eq!(make_grid(1.0, 4, |_| 0.0), Err(Error::BadGridSize(4)));
        assert!(make_grid(0.0, 8, |_| 0.0).is_err());
        assert!(make_grid(-1.0, 8, |_| 0.0).is_err());
        assert!(PeriodicField::new(1.0, vec![f64::NAN; 8]).is_err());
    }

    #[test]
    fn mass_of_simple_fields() {
        let c = PeriodicField::constant(2.0 * PI, 32, 2.0).unwrap();
        assert!((c.mass() - 4.0 * PI).abs() < 1e-13);
        let cos = make_grid(2.0 * PI, 64, f64::cos).unwrap();
        assert!(cos.mass().abs() < 1e-14);
    }

    #[test]
    fn periodic_indexing() {
        let f = make_grid(1.0, 8, |x| x).unwrap();
        assert_eq!(f.at(-1), f.values()[7]);
        assert_eq!(f.at(8), f.values()[0]);
        assert_eq!(f.roll(1).values()[1], f.values()[0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = make_grid(2.0 * PI, 16, |x| 1.0 + 0.3 * x.sin()).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("x,h\n"));
        assert!(!text.ends_with("\n\n"));
        let g = PeriodicField::from_csv(&text).unwrap();
        assert_eq!(f.values(), g.values());
        assert!((g.period_length() - 2.0 * PI).abs() < 1e-14);
    }
}
