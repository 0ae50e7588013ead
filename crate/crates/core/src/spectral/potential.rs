use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// `-r^4`
    MinusQuartic,
    /// `-4 i r - r^4`
    BgMinus,
    /// `2 / r^2 - r^4`
    BgPlus,
    /// `r^2`
    Harmonic,
    /// `i r^3`
    ImaginaryCubic,
    /// Only the polynomial coefficients.
    Custom,
}

/// `V(r) = base(r) + sum_k coefficients[k] r^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default)]
    pub coefficients: Vec<Complex64>,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind) -> Self {
        PotentialSpec {
            kind,
            coefficients: Vec::new(),
        }
    }

    pub fn with_coefficients(kind: PotentialKind, coefficients: Vec<Complex64>) -> Result<Self> {
        let spec = PotentialSpec { kind, coefficients };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self
            .coefficients
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::validation(
                "spectral",
                format!("potential coefficient {k} is not finite"),
            ));
        }
        Ok(())
    }

    /// Declared poles of `V`.
    pub fn poles(&self) -> Vec<Complex64> {
        match self.kind {
            PotentialKind::BgPlus => vec![Complex64::new(0.0, 0.0)],
            _ => Vec::new(),
        }
    }

    /// True when `V` is a polynomial, so wave functions are entire.
    pub fn is_entire(&self) -> bool {
        self.poles().is_empty()
    }

    /// `V(r)` without the pole check.
    pub fn value(&self, r: Complex64) -> Complex64 {
        let base = match self.kind {
            PotentialKind::MinusQuartic => -r.powi(4),
            PotentialKind::BgMinus => -4.0 * I * r - r.powi(4),
            PotentialKind::BgPlus => 2.0 / (r * r) - r.powi(4),
            PotentialKind::Harmonic => r * r,
            PotentialKind::ImaginaryCubic => I * r.powi(3),
            PotentialKind::Custom => Complex64::new(0.0, 0.0),
        };
        let extra = self
            .coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * r + c);
        base + extra
    }

    /// `V(r)`, failing within `pole_tolerance` of a declared pole.
    pub fn eval(&self, r: Complex64, x: f64, pole_tolerance: f64) -> Result<Complex64> {
        for p in self.poles() {
            let distance = (r - p).norm();
            if distance <= pole_tolerance {
                return Err(Error::PotentialPole {
                    x,
                    pole: format!("{p}"),
                    distance,
                });
            }
        }
        Ok(self.value(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_and_coefficients() {
        let r = Complex64::new(0.0, -1.0);
        assert_eq!(PotentialSpec::new(PotentialKind::BgMinus).value(r), Complex64::new(-5.0, 0.0));
        let w = Complex64::new(0.0, 1.0);
        assert_eq!(PotentialSpec::new(PotentialKind::BgPlus).value(w), Complex64::new(-3.0, 0.0));
        let shifted =
            PotentialSpec::with_coefficients(PotentialKind::Harmonic, vec![Complex64::new(-1.0, 0.0)])
                .unwrap();
        assert_eq!(shifted.value(Complex64::new(2.0, 0.0)), Complex64::new(3.0, 0.0));
        let custom = PotentialSpec::with_coefficients(
            PotentialKind::Custom,
            vec![0.0.into(), 0.0.into(), Complex64::new(0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(custom.value(Complex64::new(2.0, 0.0)), Complex64::new(0.0, 4.0));
    }

    #[test]
    fn pole_is_detected() {
        let v = PotentialSpec::new(PotentialKind::BgPlus);
        assert!(matches!(
            v.eval(Complex64::new(1e-12, 0.0), 0.0, 1e-8),
            Err(Error::PotentialPole { .. })
        ));
        assert!(!v.is_entire());
        assert!(PotentialSpec::new(PotentialKind::MinusQuartic).is_entire());
    }
}
