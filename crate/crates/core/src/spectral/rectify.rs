use num_complex::Complex64;

use super::potential::PotentialSpec;
use crate::contours::ContourSpec;
use crate::grid::{GridFunction, GridSpec};
use crate::{Error, Result};

/// Below this `|r'|` the contour is treated as singular.
pub const CONTOUR_DERIVATIVE_TOLERANCE: f64 = 1e-10;
/// Distance to a declared pole treated as a hit.
pub const POLE_TOLERANCE: f64 = 1e-8;

/// `-phi'' + effective phi = E weight phi` on the real parameter axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifiedProblem {
    pub grid: GridSpec,
    pub contour: ContourSpec,
    pub potential: PotentialSpec,
    /// `(r')^2`
    pub weight: GridFunction,
    /// `(r')^2 V(r) + delta`
    pub effective: GridFunction,
    /// `(3/4)(r''/r')^2 - (1/2)(r'''/r')`
    pub delta: GridFunction,
}

/// Pointwise coefficients of the rectified equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub weight: Complex64,
    pub effective: Complex64,
    pub delta: Complex64,
}

pub(crate) fn coefficients_at(
    contour: &ContourSpec,
    potential: &PotentialSpec,
    x: f64,
) -> Result<Coefficients> {
    let jet = contour.eval_jet(x)?;
    let modulus = jet.r1.norm();
    if modulus <= CONTOUR_DERIVATIVE_TOLERANCE {
        return Err(Error::ContourSingularity { x, modulus });
    }
    let v = potential.eval(jet.r, x, POLE_TOLERANCE)?;
    let q2 = jet.r2 / jet.r1;
    let delta = 0.75 * q2 * q2 - 0.5 * jet.r3 / jet.r1;
    let weight = jet.r1 * jet.r1;
    Ok(Coefficients {
        weight,
        effective: weight * v + delta,
        delta,
    })
}

impl RectifiedProblem {
    pub fn at(&self, x: f64) -> Result<Coefficients> {
        coefficients_at(&self.contour, &self.potential, x)
    }
}

/// Pulls `-psi''(r) + V(r) psi = E psi` along `r(x)` back to the real axis via
/// `phi(x) = r'(x)^(-1/2) psi(r(x))`.
pub fn rectify(potential: &PotentialSpec, contour: &ContourSpec, grid: &GridSpec) -> Result<RectifiedProblem> {
    grid.validate()?;
    contour.validate()?;
    potential.validate()?;
    let mut weight = Vec::with_capacity(grid.n);
    let mut effective = Vec::with_capacity(grid.n);
    let mut delta = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let c = coefficients_at(contour, potential, x)?;
        weight.push(c.weight);
        effective.push(c.effective);
        delta.push(c.delta);
    }
    Ok(RectifiedProblem {
        grid: *grid,
        contour: contour.clone(),
        potential: potential.clone(),
        weight: GridFunction::new(*grid, weight)?,
        effective: GridFunction::new(*grid, effective)?,
        delta: GridFunction::new(*grid, delta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::potential::PotentialKind;

    #[test]
    fn line_shift_is_a_pure_shift() {
        let grid = GridSpec::new(-3.0, 3.0, 61).unwrap();
        let v = PotentialSpec::new(PotentialKind::Harmonic);
        let p = rectify(&v, &ContourSpec::line_shift(0.3).unwrap(), &grid).unwrap();
        for (i, x) in grid.points().into_iter().enumerate() {
            assert_eq!(p.weight.values()[i], Complex64::new(1.0, 0.0));
            assert_eq!(p.delta.values()[i], Complex64::new(0.0, 0.0));
            let r = Complex64::new(x, -0.3);
            assert_eq!(p.effective.values()[i], r * r);
        }
    }

    #[test]
    fn pole_on_contour_is_reported() {
        // the toboggan with eps = 1 never reaches 0, but a piecewise line through it does
        let grid = GridSpec::new(-1.0, 1.0, 21).unwrap();
        let through_origin = ContourSpec::Piecewise {
            segments: vec![crate::contours::Segment {
                from: -1.0,
                piece: crate::contours::Piece::Polynomial {
                    coefficients: vec![0.0.into(), 1.0.into()],
                },
            }],
        };
        let v = PotentialSpec::new(PotentialKind::BgPlus);
        assert!(matches!(rectify(&v, &through_origin, &grid), Err(Error::PotentialPole { .. })));
    }

    #[test]
    fn flat_contour_is_singular() {
        let grid = GridSpec::new(-1.0, 1.0, 21).unwrap();
        let flat = ContourSpec::Piecewise {
            segments: vec![crate::contours::Segment {
                from: -1.0,
                piece: crate::contours::Piece::Polynomial {
                    coefficients: vec![0.0.into(), 0.0.into(), 1.0.into()],
                },
            }],
        };
        let v = PotentialSpec::new(PotentialKind::Harmonic);
        assert!(matches!(rectify(&v, &flat, &grid), Err(Error::ContourSingularity { .. })));
    }
}
