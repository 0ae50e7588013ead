//! Superpotential calculus on the shifted line.
//!
//! Closed forms use `z = x - i eps` for the minus branch and `w = x + i eps`
//! for the plus branch:
//!
//! | kind       | value                    |
//! |------------|--------------------------|
//! | `PsiMinus` | `z exp(-i z^3 / 3)`      |
//! | `PsiPlus`  | `exp(i w^3 / 3) / w`     |
//! | `WMinus`   | `-(1/z - i z^2)`         |
//! | `WPlus`    | `1/w - i w^2`            |
//! | `VMinus`   | `-4 i z - z^4`           |
//! | `VPlus`    | `2 / w^2 - w^4`          |
//!
//! Both wave functions are zero modes: `V = W^2 - W'` on each branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{boundary_rows, differentiate, trapezoid_norm_sq, GridFunction, GridSpec};
use crate::{Error, Result};

const MODULE: &str = "susy";

/// Default nodal tolerance, relative to `max |psi|`.
pub const DEFAULT_NODAL_TOLERANCE: f64 = 1e-15;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    PsiMinus,
    PsiPlus,
    WMinus,
    WPlus,
    VMinus,
    VPlus,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::PsiMinus,
        ModelKind::PsiPlus,
        ModelKind::WMinus,
        ModelKind::WPlus,
        ModelKind::VMinus,
        ModelKind::VPlus,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormModel {
    pub kind: ModelKind,
    pub epsilon: f64,
}

impl ClosedFormModel {
    pub fn new(kind: ModelKind, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::validation(
                MODULE,
                format!("epsilon must be positive and finite, got {epsilon}"),
            ));
        }
        Ok(ClosedFormModel { kind, epsilon })
    }

    fn z(&self, x: f64) -> Complex64 {
        Complex64::new(x, -self.epsilon)
    }

    fn w(&self, x: f64) -> Complex64 {
        Complex64::new(x, self.epsilon)
    }

    /// Value at real `x`.
    pub fn value(&self, x: f64) -> Complex64 {
        let (z, w) = (self.z(x), self.w(x));
        match self.kind {
            ModelKind::PsiMinus => z * (-I * z.powi(3) / 3.0).exp(),
            ModelKind::PsiPlus => (I * w.powi(3) / 3.0).exp() / w,
            ModelKind::WMinus => -(z.inv() - I * z * z),
            ModelKind::WPlus => w.inv() - I * w * w,
            ModelKind::VMinus => -4.0 * I * z - z.powi(4),
            ModelKind::VPlus => 2.0 / (w * w) - w.powi(4),
        }
    }

    /// Exact first derivative in `x`.
    pub fn derivative(&self, x: f64) -> Complex64 {
        let (z, w) = (self.z(x), self.w(x));
        match self.kind {
            ModelKind::PsiMinus => (1.0 - I * z.powi(3)) * (-I * z.powi(3) / 3.0).exp(),
            ModelKind::PsiPlus => (I * w - (w * w).inv()) * (I * w.powi(3) / 3.0).exp(),
            ModelKind::WMinus => (z * z).inv() + 2.0 * I * z,
            ModelKind::WPlus => -(w * w).inv() - 2.0 * I * w,
            ModelKind::VMinus => -4.0 * I - 4.0 * z.powi(3),
            ModelKind::VPlus => -4.0 / w.powi(3) - 4.0 * w.powi(3),
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<GridFunction> {
        GridFunction::from_fn(*grid, |x| self.value(x))
    }
}

/// Closed-form value of `model` at `x`.
pub fn eval_model(model: &ClosedFormModel, x: f64) -> Result<Complex64> {
    if !x.is_finite() {
        return Err(Error::domain(MODULE, format!("x = {x} is not finite")));
    }
    ClosedFormModel::new(model.kind, model.epsilon)?;
    Ok(model.value(x))
}

/// `W = -psi'/psi` with fourth-order differences. Fails at the first sample
/// with `|psi| <= nodal_tolerance * max |psi|`.
pub fn superpotential_from_wavefunction(psi: &GridFunction) -> Result<GridFunction> {
    superpotential_with_tolerance(psi, DEFAULT_NODAL_TOLERANCE)
}

pub fn superpotential_with_tolerance(psi: &GridFunction, relative_tolerance: f64) -> Result<GridFunction> {
    let tolerance = relative_tolerance * psi.max_abs();
    if let Some((index, z)) = psi
        .values()
        .iter()
        .enumerate()
        .find(|(_, z)| z.norm() <= tolerance)
    {
        return Err(Error::NodalZero {
            index,
            modulus: z.norm(),
            tolerance,
        });
    }
    let d = differentiate(psi, 1, 4)?;
    let values = d
        .values()
        .iter()
        .zip(psi.values())
        .map(|(dp, p)| -dp / p)
        .collect();
    GridFunction::new(*psi.grid(), values)
}

/// Interior index range excluded from one-sided closures.
pub fn interior(grid: &GridSpec) -> std::ops::Range<usize> {
    let b = boundary_rows(4);
    b..grid.n - b
}

/// `max |(V - E0) - (W^2 - W')|` over interior points.
pub fn riccati_residual(w: &GridFunction, v: &GridFunction, e0: Complex64) -> Result<f64> {
    w.check_same_grid(v, MODULE)?;
    let dw = differentiate(w, 1, 4)?;
    Ok(interior(w.grid())
        .map(|i| {
            let wi = w.values()[i];
            ((v.values()[i] - e0) - (wi * wi - dw.values()[i])).norm()
        })
        .fold(0.0, f64::max))
}

/// `(W^2 - W' + E0, W^2 + W' + E0)`.
pub fn partner_potentials(w: &GridFunction, e0: Complex64) -> Result<(GridFunction, GridFunction)> {
    let dw = differentiate(w, 1, 4)?;
    let pair = |sign: f64| {
        let values = w
            .values()
            .iter()
            .zip(dw.values())
            .map(|(wi, di)| wi * wi + sign * di + e0)
            .collect();
        GridFunction::new(*w.grid(), values)
    };
    Ok((pair(-1.0)?, pair(1.0)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationResidual {
    /// `max |LHS - RHS|`.
    pub absolute: f64,
    /// `max |LHS - RHS| / max(1, |LHS|)`.
    pub relative: f64,
    /// Where the absolute maximum occurs.
    pub x_at_max: f64,
}

/// Compares `W+^2 - W+'` with `conj(W-^2 + W-')` pointwise using exact
/// derivatives.
pub fn verify_modified_relation(epsilon: f64, grid: &GridSpec) -> Result<RelationResidual> {
    grid.validate()?;
    let wp = ClosedFormModel::new(ModelKind::WPlus, epsilon)?;
    let wm = ClosedFormModel::new(ModelKind::WMinus, epsilon)?;
    let mut out = RelationResidual {
        absolute: 0.0,
        relative: 0.0,
        x_at_max: grid.x_min,
    };
    for x in grid.points() {
        let (p, dp) = (wp.value(x), wp.derivative(x));
        let (m, dm) = (wm.value(x), wm.derivative(x));
        let lhs = p * p - dp;
        let rhs = (m * m + dm).conj();
        let diff = (lhs - rhs).norm();
        if diff > out.absolute {
            out.absolute = diff;
            out.x_at_max = x;
        }
        out.relative = out.relative.max(diff / lhs.norm().max(1.0));
    }
    Ok(out)
}

/// `max |V - (W^2 - W')|` over the grid from closed forms on one branch.
pub fn closed_form_riccati_residual(epsilon: f64, grid: &GridSpec, plus: bool) -> Result<f64> {
    grid.validate()?;
    let (wk, vk) = if plus {
        (ModelKind::WPlus, ModelKind::VPlus)
    } else {
        (ModelKind::WMinus, ModelKind::VMinus)
    };
    let w = ClosedFormModel::new(wk, epsilon)?;
    let v = ClosedFormModel::new(vk, epsilon)?;
    Ok(grid
        .points()
        .into_iter()
        .map(|x| {
            let wx = w.value(x);
            (v.value(x) - (wx * wx - w.derivative(x))).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormProfile {
    /// Trapezoid `sqrt(int |psi|^2)` over the grid.
    pub norm: f64,
    /// `a` in `log |psi| ~ -a x^2 + ...`, fitted on the outer fifth of the grid.
    pub decay: f64,
}

/// Truncated norm and quadratic decay rate of a wave function model.
pub fn norm_profile(model: &ClosedFormModel, grid: &GridSpec) -> Result<NormProfile> {
    if !matches!(model.kind, ModelKind::PsiMinus | ModelKind::PsiPlus) {
        return Err(Error::validation(
            MODULE,
            format!("norm profile needs a wave function, got {:?}", model.kind),
        ));
    }
    let psi = model.sample(grid)?;
    let norm = trapezoid_norm_sq(&psi).sqrt();

    // least squares for log|psi| = c - a x^2 on |x| beyond 80% of the reach
    let reach = grid.x_min.abs().max(grid.x_max.abs());
    let (mut n, mut su, mut sy, mut suu, mut suy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, p) in grid.points().into_iter().zip(psi.values()) {
        if x.abs() < 0.8 * reach || p.norm() == 0.0 {
            continue;
        }
        let (u, y) = (x * x, p.norm().ln());
        n += 1.0;
        su += u;
        sy += y;
        suu += u * u;
        suy += u * y;
    }
    let denom = n * suu - su * su;
    if n < 2.0 || denom.abs() <= f64::EPSILON * suu * n {
        return Err(Error::validation(MODULE, "too few tail samples to fit a decay rate"));
    }
    let slope = (n * suy - su * sy) / denom;
    Ok(NormProfile { norm, decay: -slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(kind: ModelKind, eps: f64) -> ClosedFormModel {
        ClosedFormModel::new(kind, eps).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn closed_form_spot_values() {
        let at0 = |k| eval_model(&model(k, 1.0), 0.0).unwrap();
        assert!(close(at0(ModelKind::WMinus), Complex64::new(0.0, -2.0), 1e-15));
        assert!(close(at0(ModelKind::VMinus), Complex64::new(-5.0, 0.0), 1e-15));
        assert!(close(at0(ModelKind::VPlus), Complex64::new(-3.0, 0.0), 1e-15));
        let psi = at0(ModelKind::PsiMinus);
        assert!(close(psi, Complex64::new(0.0, -(1.0f64 / 3.0).exp()), 1e-15));
        assert!((psi.im + 1.395612).abs() < 1e-6);
        assert!(eval_model(&model(ModelKind::VPlus, 1.0), f64::NAN).is_err());
        assert!(ClosedFormModel::new(ModelKind::VPlus, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-5;
        for kind in ModelKind::ALL {
            let m = model(kind, 0.7);
            for x in [-2.0, -0.3, 0.0, 0.4, 1.9] {
                let fd = (m.value(x + h) - m.value(x - h)) / (2.0 * h);
                let exact = m.derivative(x);
                assert!((fd - exact).norm() < 1e-6 * exact.norm().max(1.0), "{kind:?} at {x}");
            }
        }
    }

    #[test]
    fn constant_wavefunction_has_zero_superpotential() {
        let grid = GridSpec::new(-1.0, 1.0, 33).unwrap();
        let psi = GridFunction::from_fn(grid, |_| Complex64::new(2.0, -1.0)).unwrap();
        let w = superpotential_from_wavefunction(&psi).unwrap();
        assert!(w.max_abs() < 1e-12);
    }

    #[test]
    fn nodal_zero_names_index() {
        let grid = GridSpec::new(-1.0, 1.0, 21).unwrap();
        let psi = GridFunction::from_fn(grid, |x| Complex64::new(x, 0.0)).unwrap();
        match superpotential_from_wavefunction(&psi) {
            Err(Error::NodalZero { index, .. }) => assert_eq!(index, 10),
            other => panic!("expected nodal zero, got {other:?}"),
        }
    }

    #[test]
    fn oscillator_partners_and_residuals() {
        let grid = GridSpec::new(-4.0, 4.0, 801).unwrap();
        let w = GridFunction::from_fn(grid, |x| Complex64::new(x, 0.0)).unwrap();
        let (vm, vp) = partner_potentials(&w, Complex64::new(0.0, 0.0)).unwrap();
        for (i, x) in grid.points().into_iter().enumerate() {
            assert!(close(vm.values()[i], Complex64::new(x * x - 1.0, 0.0), 1e-9));
            assert!(close(vp.values()[i], Complex64::new(x * x + 1.0, 0.0), 1e-9));
        }
        let zero = Complex64::new(0.0, 0.0);
        assert!(riccati_residual(&w, &vm, zero).unwrap() < 1e-8);
        let missing = GridFunction::from_fn(grid, |x| Complex64::new(x * x, 0.0)).unwrap();
        assert!((riccati_residual(&w, &missing, zero).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_superpotential_partners() {
        let grid = GridSpec::new(0.0, 1.0, 17).unwrap();
        let c = Complex64::new(0.5, 2.0);
        let w = GridFunction::from_fn(grid, |_| c).unwrap();
        let (vm, vp) = partner_potentials(&w, Complex64::new(0.0, 0.0)).unwrap();
        assert!(vm.values().iter().chain(vp.values()).all(|v| close(*v, c * c, 1e-12)));
    }

    #[test]
    fn riccati_rejects_grid_mismatch() {
        let a = GridFunction::from_fn(GridSpec::new(0.0, 1.0, 17).unwrap(), |_| 1.0.into()).unwrap();
        let b = GridFunction::from_fn(GridSpec::new(0.0, 1.0, 18).unwrap(), |_| 1.0.into()).unwrap();
        assert!(riccati_residual(&a, &b, 0.0.into()).is_err());
    }

    #[test]
    fn modified_relation_at_origin() {
        let grid = GridSpec::new(-1.0, 1.0, 17).unwrap();
        let r = verify_modified_relation(1.0, &grid).unwrap();
        assert!(r.absolute < 1e-13);
        assert!(verify_modified_relation(-1.0, &grid).is_err());
    }

    #[test]
    fn norm_profile_requires_wavefunction() {
        let grid = GridSpec::new(-6.0, 6.0, 401).unwrap();
        assert!(norm_profile(&model(ModelKind::WMinus, 1.0), &grid).is_err());
    }
}
