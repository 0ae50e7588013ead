//! Complexified coordinate contours `x -> r(x)`.
//!
//! Three families are provided: the shifted line `r = x - i eps`, the
//! toboggan spiral `r = -i [i (x - i eps)]^(2N+1)`, and a piecewise curve
//! assembled from closed-form pieces. Every family is differentiated in
//! closed form up to third order, which is what the rectification in
//! [`crate::spectral`] consumes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A closed-form contour piece, usable on its own or inside a piecewise curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Piece {
    LineShift { epsilon: f64 },
    Toboggan { epsilon: f64, winding: u32 },
    /// `r(x) = sum_k coefficients[k] x^k`.
    Polynomial { coefficients: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Left breakpoint; the piece applies on `[from, next.from)`.
    pub from: f64,
    pub piece: Piece,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContourSpec {
    LineShift {
        epsilon: f64,
    },
    Toboggan {
        epsilon: f64,
        winding: u32,
    },
    /// Right-continuous: at a breakpoint the piece starting there is used.
    /// Points left of the first breakpoint use the first piece.
    Piecewise {
        segments: Vec<Segment>,
    },
    /// Pointwise complex conjugate `x -> conj(r(x))` of another contour.
    Conjugate {
        of: Box<ContourSpec>,
    },
}

/// `r(x)` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourJet {
    pub r: Complex64,
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
}

impl ContourJet {
    fn conj(self) -> ContourJet {
        ContourJet {
            r: self.r.conj(),
            r1: self.r1.conj(),
            r2: self.r2.conj(),
            r3: self.r3.conj(),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            "contours",
            format!("epsilon must be positive and finite, got {epsilon}"),
        ))
    }
}

impl Piece {
    fn validate(&self) -> Result<()> {
        match self {
            Piece::LineShift { epsilon } | Piece::Toboggan { epsilon, .. } => check_epsilon(*epsilon),
            Piece::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::validation("contours", "polynomial piece without coefficients"));
                }
                if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                    return Err(Error::validation("contours", "non-finite polynomial coefficient"));
                }
                Ok(())
            }
        }
    }

    fn jet(&self, x: f64) -> ContourJet {
        match *self {
            Piece::LineShift { epsilon } => ContourJet {
                r: Complex64::new(x, -epsilon),
                r1: Complex64::new(1.0, 0.0),
                r2: Complex64::new(0.0, 0.0),
                r3: Complex64::new(0.0, 0.0),
            },
            Piece::Toboggan { epsilon, winding } => toboggan_jet(epsilon, winding, x),
            Piece::Polynomial { ref coefficients } => polynomial_jet(coefficients, x),
        }
    }
}

/// With `u = eps + i x` and `m = 2N + 1`: `r = -i u^m`, `r' = m u^(m-1)`,
/// `r'' = i m (m-1) u^(m-2)`, `r''' = -m (m-1) (m-2) u^(m-3)`.
fn toboggan_jet(epsilon: f64, winding: u32, x: f64) -> ContourJet {
    let m = 2 * winding as i32 + 1;
    let mf = m as f64;
    let u = Complex64::new(epsilon, x);
    // u never vanishes because Re u = eps > 0, so negative powers are safe
    ContourJet {
        r: -I * u.powi(m),
        r1: mf * u.powi(m - 1),
        r2: I * (mf * (mf - 1.0)) * u.powi(m - 2),
        r3: -(mf * (mf - 1.0) * (mf - 2.0)) * u.powi(m - 3),
    }
}

fn polynomial_jet(coefficients: &[Complex64], x: f64) -> ContourJet {
    let zero = Complex64::new(0.0, 0.0);
    // simultaneous Horner: p1 = r', p2 = r''/2!, p3 = r'''/3!
    let (mut p0, mut p1, mut p2, mut p3) = (zero, zero, zero, zero);
    for &c in coefficients.iter().rev() {
        p3 = p3 * x + p2;
        p2 = p2 * x + p1;
        p1 = p1 * x + p0;
        p0 = p0 * x + c;
    }
    ContourJet {
        r: p0,
        r1: p1,
        r2: 2.0 * p2,
        r3: 6.0 * p3,
    }
}

impl ContourSpec {
    pub fn line_shift(epsilon: f64) -> Result<Self> {
        let spec = ContourSpec::LineShift { epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn toboggan(epsilon: f64, winding: u32) -> Result<Self> {
        let spec = ContourSpec::Toboggan { epsilon, winding };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ContourSpec::LineShift { epsilon } | ContourSpec::Toboggan { epsilon, .. } => {
                check_epsilon(*epsilon)
            }
            ContourSpec::Piecewise { segments } => {
                if segments.is_empty() {
                    return Err(Error::validation("contours", "piecewise contour without segments"));
                }
                for pair in segments.windows(2) {
                    if !(pair[0].from < pair[1].from) {
                        return Err(Error::validation(
                            "contours",
                            "piecewise breakpoints must be strictly increasing",
                        ));
                    }
                }
                for s in segments {
                    if !s.from.is_finite() {
                        return Err(Error::validation("contours", "non-finite breakpoint"));
                    }
                    s.piece.validate()?;
                }
                Ok(())
            }
            ContourSpec::Conjugate { of } => of.validate(),
        }
    }

    /// Closed-form `r(x)` with derivatives up to third order.
    pub fn eval_jet(&self, x: f64) -> Result<ContourJet> {
        if !x.is_finite() {
            return Err(Error::domain("contours", format!("parameter x = {x} is not finite")));
        }
        Ok(self.jet_unchecked(x))
    }

    pub(crate) fn jet_unchecked(&self, x: f64) -> ContourJet {
        match self {
            ContourSpec::LineShift { epsilon } => Piece::LineShift { epsilon: *epsilon }.jet(x),
            ContourSpec::Toboggan { epsilon, winding } => toboggan_jet(*epsilon, *winding, x),
            ContourSpec::Piecewise { segments } => {
                let idx = segments.partition_point(|s| s.from <= x).saturating_sub(1);
                segments[idx].piece.jet(x)
            }
            ContourSpec::Conjugate { of } => of.jet_unchecked(x).conj(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(self.eval_jet(x)?.r)
    }

    /// Winding parameter `N` when the contour is a (possibly conjugated) toboggan.
    pub fn winding_index(&self) -> Option<u32> {
        match self {
            ContourSpec::Toboggan { winding, .. } => Some(*winding),
            ContourSpec::LineShift { .. } => Some(0),
            ContourSpec::Conjugate { of } => of.winding_index(),
            ContourSpec::Piecewise { .. } => None,
        }
    }

    /// Checks `r'(x) != 0` at every sample point.
    pub fn check_smooth(&self, xs: &[f64], tolerance: f64) -> Result<()> {
        for &x in xs {
            let jet = self.eval_jet(x)?;
            if jet.r1.norm() <= tolerance {
                return Err(Error::domain(
                    "contours",
                    format!("r'(x) vanishes at x = {x} (|r'| = {:e})", jet.r1.norm()),
                ));
            }
        }
        Ok(())
    }
}

/// The mirror contour `x -> conj(r(x))`. Conjugating twice returns the
/// original specification.
pub fn conjugate_contour(spec: &ContourSpec) -> Result<ContourSpec> {
    spec.validate()?;
    Ok(match spec {
        ContourSpec::Conjugate { of } => (**of).clone(),
        other => ContourSpec::Conjugate {
            of: Box::new(other.clone()),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Exclusion radius relative to the local coordinate scale `max(|r|, |b|)`.
    pub exclusion: f64,
    /// Sub-steps are bisected until their argument change is below this.
    pub max_step: f64,
    pub max_refinements: u32,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            exclusion: 1e-8,
            max_step: PI / 4.0,
            max_refinements: 40,
        }
    }
}

/// Accumulated `delta arg (r(x) - b) / 2 pi` along `[x_min, x_max]`.
pub fn winding(
    spec: &ContourSpec,
    branch_point: Complex64,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> Result<f64> {
    winding_with(spec, branch_point, x_min, x_max, samples, WindingOptions::default())
}

pub fn winding_with(
    spec: &ContourSpec,
    branch_point: Complex64,
    x_min: f64,
    x_max: f64,
    samples: usize,
    options: WindingOptions,
) -> Result<f64> {
    spec.validate()?;
    if samples < 2 {
        return Err(Error::validation("contours", "winding needs at least two samples"));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(Error::validation("contours", "winding interval must be finite and ordered"));
    }
    let offset = |x: f64| -> Result<Complex64> {
        let r = spec.eval(x)?;
        let d = r - branch_point;
        let radius = options.exclusion * r.norm().max(branch_point.norm());
        if d.norm() <= radius {
            return Err(Error::Singularity {
                branch_point: format!("{branch_point}"),
                distance: d.norm(),
                radius,
            });
        }
        Ok(d)
    };

    let h = (x_max - x_min) / (samples - 1) as f64;
    let mut total = 0.0;
    let mut x0 = x_min;
    let mut d0 = offset(x0)?;
    for k in 1..samples {
        let x1 = if k + 1 == samples { x_max } else { x_min + k as f64 * h };
        let d1 = offset(x1)?;
        total += refine_arg(&offset, x0, d0, x1, d1, 0, &options)?;
        x0 = x1;
        d0 = d1;
    }
    Ok(total / (2.0 * PI))
}

fn refine_arg(
    offset: &dyn Fn(f64) -> Result<Complex64>,
    x0: f64,
    d0: Complex64,
    x1: f64,
    d1: Complex64,
    depth: u32,
    options: &WindingOptions,
) -> Result<f64> {
    let step = (d1 / d0).arg();
    let xm = 0.5 * (x0 + x1);
    let dm = offset(xm)?;
    // A step is trusted only when the arc is short and nearly straight
    // compared with its distance to the branch point; the principal argument
    // of a longer arc can alias by whole turns.
    let near = d0.norm().min(d1.norm());
    let short = (d1 - d0).norm() <= 0.5 * near;
    let straight = (dm - 0.5 * (d0 + d1)).norm() <= 0.25 * near;
    if step.abs() < options.max_step && short && straight {
        return Ok(step);
    }
    if depth >= options.max_refinements {
        if step.abs() < PI {
            return Ok(step);
        }
        return Err(Error::Resolution {
            x: x0,
            step,
            refinements: depth,
        });
    }
    Ok(refine_arg(offset, x0, d0, xm, dm, depth + 1, options)?
        + refine_arg(offset, xm, dm, x1, d1, depth + 1, options)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn line_shift_jet() {
        let jet = ContourSpec::line_shift(1.0).unwrap().eval_jet(2.0).unwrap();
        assert_eq!(jet.r, c(2.0, -1.0));
        assert_eq!(jet.r1, c(1.0, 0.0));
        assert_eq!(jet.r2, c(0.0, 0.0));
        assert_eq!(jet.r3, c(0.0, 0.0));
    }

    #[test]
    fn toboggan_zero_collapses_to_line() {
        let line = ContourSpec::line_shift(0.7).unwrap();
        let tob = ContourSpec::toboggan(0.7, 0).unwrap();
        for k in -20..=20 {
            let x = 0.37 * k as f64;
            let (a, b) = (line.eval_jet(x).unwrap(), tob.eval_jet(x).unwrap());
            assert!((a.r - b.r).norm() <= 1e-15 * (1.0 + a.r.norm()));
            assert!((a.r1 - b.r1).norm() <= 1e-15);
            assert_eq!(b.r2, c(0.0, 0.0));
        }
    }

    #[test]
    fn toboggan_one_at_origin() {
        let r = ContourSpec::toboggan(0.5, 1).unwrap().eval(0.0).unwrap();
        assert!((r - c(0.0, -0.125)).norm() < 1e-16);
    }

    #[test]
    fn jets_match_finite_differences() {
        let specs = [
            ContourSpec::line_shift(1.0).unwrap(),
            ContourSpec::toboggan(1.0, 1).unwrap(),
            ContourSpec::toboggan(0.6, 3).unwrap(),
            ContourSpec::Piecewise {
                segments: vec![
                    Segment { from: -10.0, piece: Piece::Polynomial { coefficients: vec![c(0.0, -1.0), c(1.0, 0.0), c(0.0, 0.1), c(0.02, 0.0)] } },
                    Segment { from: 1.0, piece: Piece::Toboggan { epsilon: 0.8, winding: 1 } },
                ],
            },
        ];
        // each jet level against a central difference of the level below
        let h = 1e-4;
        for spec in &specs {
            for &x in &[-1.3, -0.2, 0.45, 0.9, 2.1] {
                let (lo, hi) = (spec.eval_jet(x - h).unwrap(), spec.eval_jet(x + h).unwrap());
                let jet = spec.eval_jet(x).unwrap();
                let pairs = [
                    (jet.r1, (hi.r - lo.r) / (2.0 * h)),
                    (jet.r2, (hi.r1 - lo.r1) / (2.0 * h)),
                    (jet.r3, (hi.r2 - lo.r2) / (2.0 * h)),
                ];
                for (level, (exact, approx)) in pairs.iter().enumerate() {
                    let rel = (exact - approx).norm() / exact.norm().max(1.0);
                    assert!(rel < 1e-6, "{spec:?} x={x} level {}: {exact} vs {approx}", level + 1);
                }
            }
        }
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let spec = ContourSpec::Piecewise {
            segments: vec![
                Segment { from: 0.0, piece: Piece::LineShift { epsilon: 1.0 } },
                Segment { from: 2.0, piece: Piece::LineShift { epsilon: 3.0 } },
            ],
        };
        assert_eq!(spec.eval(2.0).unwrap(), c(2.0, -3.0));
        assert_eq!(spec.eval(1.999).unwrap(), c(1.999, -1.0));
        assert_eq!(spec.eval(-5.0).unwrap(), c(-5.0, -1.0));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ContourSpec::line_shift(0.0).is_err());
        assert!(ContourSpec::toboggan(-1.0, 2).is_err());
        assert!(ContourSpec::line_shift(1.0).unwrap().eval_jet(f64::INFINITY).is_err());
        let bad = ContourSpec::Piecewise {
            segments: vec![
                Segment { from: 1.0, piece: Piece::LineShift { epsilon: 1.0 } },
                Segment { from: 1.0, piece: Piece::LineShift { epsilon: 1.0 } },
            ],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn conjugation_examples() {
        let line = ContourSpec::line_shift(1.0).unwrap();
        let mirror = conjugate_contour(&line).unwrap();
        assert_eq!(mirror.eval(3.0).unwrap(), c(3.0, 1.0));
        let tob = ContourSpec::toboggan(0.5, 1).unwrap();
        let r = conjugate_contour(&tob).unwrap().eval(0.0).unwrap();
        assert!((r - c(0.0, 0.125)).norm() < 1e-16);
        assert_eq!(conjugate_contour(&mirror).unwrap(), line);
    }

    #[test]
    fn winding_matches_finite_interval_formula() {
        // arg(r) = -pi/2 + m arg(eps + i x), so over [-L, L] the sweep is
        // m (pi - 2 atan(eps / L))
        for n in 0..=3u32 {
            let spec = ContourSpec::toboggan(1.0, n).unwrap();
            let w = winding(&spec, c(0.0, 0.0), -50.0, 50.0, 2001).unwrap();
            let m = (2 * n + 1) as f64;
            let expected = m * (PI - 2.0 * (1.0f64 / 50.0).atan()) / (2.0 * PI);
            assert!((w - expected).abs() < 1e-10, "N={n}: {w} vs {expected}");
        }
    }

    #[test]
    fn winding_converges_monotonically_in_length() {
        let spec = ContourSpec::toboggan(1.0, 2).unwrap();
        let mut last = 0.0;
        for &len in &[3.0, 10.0, 100.0, 1e4, 1e6] {
            let w = winding(&spec, c(0.0, 0.0), -len, len, 400).unwrap();
            assert!(w > last, "L={len}: {w} <= {last}");
            last = w;
        }
        assert!((last - 2.5).abs() < 1e-5);
    }

    #[test]
    fn winding_detects_singularity() {
        let spec = ContourSpec::line_shift(1.0).unwrap();
        let err = winding(&spec, c(0.5, -1.0), -2.0, 2.0, 9).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }), "{err}");
        // branch point between samples is found by refinement
        let err = winding(&spec, c(0.123, -1.0), -2.0, 2.0, 9).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. } | Error::Resolution { .. }), "{err}");
        assert!(winding(&spec, c(0.0, 0.0), -2.0, 2.0, 1).is_err());
    }

    #[test]
    fn winding_about_offset_point_above_contour() {
        // a point below the line sees a negative half turn
        let spec = ContourSpec::line_shift(1.0).unwrap();
        let w = winding(&spec, c(0.0, -2.0), -1e6, 1e6, 100).unwrap();
        assert!((w + 0.5).abs() < 1e-5);
    }
}
