//! Zero-mean, unit-sup-norm perturbations of initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PeriodicField;
use crate::spectral::derivative;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    SecondDerivative,
    FirstDerivative,
    /// `cos(k x)`; `k X / 2 pi` must be an integer.
    Cosine { wavenumber: f64 },
    /// `sum_k a_k exp(-decay k) cos(k x + 2 pi phi_k)` with `a_k, phi_k`
    /// uniform on `[0, 1)` from a ChaCha8 stream seeded by `seed`.
    Random { decay: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    #[serde(flatten)]
    pub kind: PerturbationKind,
    pub amplitude: f64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, amplitude: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude != 0.0) {
            return Err(Error::InvalidParameter(format!("amplitude must be finite and nonzero, got {amplitude}")));
        }
        if let PerturbationKind::Random { decay, .. } = kind {
            if !(decay.is_finite() && decay > 0.0) {
                return Err(Error::InvalidParameter(format!("decay must be positive, got {decay}")));
            }
        }
        if let PerturbationKind::Cosine { wavenumber } = kind {
            if !wavenumber.is_finite() {
                return Err(Error::InvalidParameter("wavenumber must be finite".into()));
            }
        }
        Ok(Self { kind, amplitude })
    }

    /// Normalized shape `phi` on the mesh of `base`.
    pub fn shape(&self, base: &PeriodicField) -> Result<PeriodicField> {
        let raw = match self.kind {
            PerturbationKind::SecondDerivative => derivative(base, 2)?.into_values(),
            PerturbationKind::FirstDerivative => derivative(base, 1)?.into_values(),
            PerturbationKind::Cosine { wavenumber } => cosine(base, wavenumber)?,
            PerturbationKind::Random { decay, seed } => random(base, decay, seed),
        };
        normalize(base.period_length(), raw)
    }

    /// `base + amplitude * phi`; errors if the result is not positive.
    pub fn apply(&self, base: &PeriodicField) -> Result<PeriodicField> {
        let out = self.apply_unchecked(base)?;
        let min = out.min();
        if !(min > 0.0) {
            return Err(Error::NonPositive { min, context: "perturbed initial data".into() });
        }
        Ok(out)
    }

    pub fn apply_unchecked(&self, base: &PeriodicField) -> Result<PeriodicField> {
        base.axpy(self.amplitude, &self.shape(base)?)
    }
}

pub fn apply(spec: &PerturbationSpec, base: &PeriodicField) -> Result<PeriodicField> {
    spec.apply(base)
}

fn cosine(base: &PeriodicField, k: f64) -> Result<Vec<f64>> {
    let x_len = base.period_length();
    let modes = k * x_len / (2.0 * std::f64::consts::PI);
    if (modes - modes.round()).abs() > 1e-9 || modes.round() == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cos({k} x) is not a nonconstant periodic function on a period of {x_len}"
        )));
    }
    let modes = modes.round();
    let n = base.len();
    // phase through the integer mode count keeps the samples exactly periodic
    Ok((0..n)
        .map(|i| (2.0 * std::f64::consts::PI * modes * i as f64 / n as f64).cos())
        .collect())
}

fn random(base: &PeriodicField, decay: f64, seed: u64) -> Vec<f64> {
    let n = base.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; n];
    for k in 1..n / 2 {
        let a: f64 = rng.gen();
        let phase: f64 = rng.gen();
        let w = a * (-decay * k as f64).exp();
        for (i, v) in out.iter_mut().enumerate() {
            let th = 2.0 * std::f64::consts::PI * ((k * i) % n) as f64 / n as f64;
            *v += w * (th + 2.0 * std::f64::consts::PI * phase).cos();
        }
    }
    out
}

fn normalize(period_length: f64, mut v: Vec<f64>) -> Result<PeriodicField> {
    let n = v.len() as f64;
    for _ in 0..2 {
        let mean = v.iter().sum::<f64>() / n;
        let sup = v.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
        if !(sup > 0.0) || !sup.is_finite() {
            return Err(Error::InvalidParameter("perturbation shape vanishes identically".into()));
        }
        for x in &mut v {
            *x = (*x - mean) / sup;
        }
    }
    PeriodicField::new(period_length, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::spectral::power_spectrum;

    fn sup(f: &PeriodicField) -> f64 {
        f.values().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn cosine_on_constant() {
        let base = PeriodicField::constant(2.0 * std::f64::consts::PI, 32, 0.5).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::Cosine { wavenumber: 1.0 }, -1e-4).unwrap();
        let out = spec.apply(&base).unwrap();
        for i in 0..32 {
            let want = 0.5 - 1e-4 * base.x(i).cos();
            assert!((out.values()[i] - want).abs() < 1e-16);
        }
    }

    #[test]
    fn half_wavenumber_on_doubled_domain() {
        let base = PeriodicField::constant(4.0 * std::f64::consts::PI, 64, 1.0).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::Cosine { wavenumber: 0.5 }, 1.0).unwrap();
        let phi = spec.shape(&base).unwrap();
        assert!((phi.values()[16] - (base.x(16) / 2.0).cos()).abs() < 1e-14);
        let bad = PerturbationSpec::new(PerturbationKind::Cosine { wavenumber: 0.25 }, 1.0).unwrap();
        assert!(bad.shape(&base).is_err());
    }

    #[test]
    fn random_shape_is_normalized_and_decays() {
        let base = PeriodicField::constant(2.0 * std::f64::consts::PI, 2048, 1.0).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::Random { decay: 0.036, seed: 3 }, 1.0).unwrap();
        let phi = spec.shape(&base).unwrap();
        assert!(phi.mean().abs() < 1e-14);
        assert!((sup(&phi) - 1.0).abs() < 1e-15);
        let s = power_spectrum(&phi);
        let tail = s.amplitudes[900..].iter().cloned().fold(0.0, f64::max);
        assert!(tail < 1e-13 * s.max(), "{tail:e}");
    }

    #[test]
    fn derivative_of_constant_is_rejected() {
        let base = PeriodicField::constant(1.0, 16, 1.0).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::SecondDerivative, 1.0).unwrap();
        assert!(spec.shape(&base).is_err());
    }

    #[test]
    fn nonpositive_result_is_reported() {
        let base = make_grid(2.0 * std::f64::consts::PI, 32, |x| 1.0 + 0.5 * x.cos()).unwrap();
        let spec = PerturbationSpec::new(PerturbationKind::SecondDerivative, -0.6).unwrap();
        assert!(matches!(spec.apply(&base), Err(Error::NonPositive { .. })));
        assert!(spec.apply_unchecked(&base).is_ok());
    }

    #[test]
    fn spec_validation() {
        assert!(PerturbationSpec::new(PerturbationKind::SecondDerivative, 0.0).is_err());
        assert!(PerturbationSpec::new(PerturbationKind::Random { decay: 0.0, seed: 1 }, 1.0).is_err());
    }
}
