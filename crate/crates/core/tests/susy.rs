use num_complex::Complex64;
use proptest::prelude::*;
use toboggan_susy::grid::{GridFunction, GridSpec};
use toboggan_susy::susy::*;

fn model(kind: ModelKind, eps: f64) -> ClosedFormModel {
    ClosedFormModel::new(kind, eps).unwrap()
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

// indices with |x| <= reach
fn central(grid: &GridSpec, reach: f64) -> std::ops::Range<usize> {
    let pts = grid.points();
    let lo = pts.iter().position(|x| *x >= -reach).unwrap();
    let hi = pts.iter().rposition(|x| *x <= reach).unwrap() + 1;
    lo..hi
}

#[test]
fn gaussian_gives_linear_superpotential() {
    let grid = GridSpec::new(-8.0, 8.0, 2001).unwrap();
    let psi = GridFunction::from_fn(grid, |x| Complex64::new((-x * x / 2.0).exp(), 0.0)).unwrap();
    let w = superpotential_from_wavefunction(&psi).unwrap();
    let exact = GridFunction::from_fn(grid, |x| Complex64::new(x, 0.0)).unwrap();
    // fifth derivative of the Gaussian grows like x^5, so the fourth-order
    // truncation error leaves 1e-8 only in the core
    assert!(w.max_abs_diff_in(&exact, central(&grid, 2.0)) < 1e-8);
    assert!(w.max_abs_diff_in(&exact, interior(&grid)) < 1e-4);
}

#[test]
fn psi_minus_recovers_w_minus() {
    let grid = GridSpec::new(-5.0, 5.0, 4001).unwrap();
    let psi = model(ModelKind::PsiMinus, 1.0).sample(&grid).unwrap();
    let w = superpotential_from_wavefunction(&psi).unwrap();
    let exact = model(ModelKind::WMinus, 1.0).sample(&grid).unwrap();
    // the truncation error grows like |x|^10 h^4 here
    assert!(w.max_abs_diff_in(&exact, central(&grid, 3.0)) < 1e-7);
}

#[test]
fn w_minus_solves_riccati_with_v_minus() {
    let grid = GridSpec::new(-5.0, 5.0, 4001).unwrap();
    let w = model(ModelKind::WMinus, 1.0).sample(&grid).unwrap();
    let v = model(ModelKind::VMinus, 1.0).sample(&grid).unwrap();
    assert!(riccati_residual(&w, &v, zero()).unwrap() < 1e-7);
}

#[test]
fn w_minus_partner_pair() {
    let grid = GridSpec::new(-5.0, 5.0, 4001).unwrap();
    let w = model(ModelKind::WMinus, 1.0).sample(&grid).unwrap();
    let (vm, vp) = partner_potentials(&w, zero()).unwrap();
    let v_minus = model(ModelKind::VMinus, 1.0).sample(&grid).unwrap();
    let v_plus = GridFunction::from_fn(grid, |x| {
        let z = Complex64::new(x, -1.0);
        2.0 / (z * z) - z.powi(4)
    })
    .unwrap();
    assert!(vm.max_abs_diff_in(&v_minus, interior(&grid)) < 1e-7);
    assert!(vp.max_abs_diff_in(&v_plus, interior(&grid)) < 1e-7);
}

#[test]
fn closed_form_identities_hold_to_rounding() {
    let grid = GridSpec::new(-5.0, 5.0, 1001).unwrap();
    for eps in [0.25, 0.5, 1.0, 2.0] {
        assert!(closed_form_riccati_residual(eps, &grid, false).unwrap() < 1e-12);
        assert!(closed_form_riccati_residual(eps, &grid, true).unwrap() < 1e-12);
    }
}

#[test]
fn modified_relation_is_grid_independent() {
    for eps in [0.25, 1.0] {
        let coarse = verify_modified_relation(eps, &GridSpec::new(-5.0, 5.0, 1001).unwrap()).unwrap();
        let fine = verify_modified_relation(eps, &GridSpec::new(-5.0, 5.0, 2001).unwrap()).unwrap();
        assert!(coarse.absolute < 1e-12 && fine.absolute < 1e-12);
    }
    // at |x| ~ 8 both sides are ~ 4e3 so the absolute floor is ~ 1e-12
    let wide = verify_modified_relation(0.25, &GridSpec::new(-8.0, 8.0, 2001).unwrap()).unwrap();
    assert!(wide.relative < 1e-14, "{wide:?}");
}

#[test]
fn zero_mode_decay_rates() {
    let grid = GridSpec::new(-6.0, 6.0, 4001).unwrap();
    for kind in [ModelKind::PsiMinus, ModelKind::PsiPlus] {
        let p = norm_profile(&model(kind, 1.0), &grid).unwrap();
        assert!((p.decay - 1.0).abs() < 0.05, "{kind:?}: {p:?}");
    }
    let wide = GridSpec::new(-12.0, 12.0, 8001).unwrap();
    for kind in [ModelKind::PsiMinus, ModelKind::PsiPlus] {
        let a = norm_profile(&model(kind, 1.0), &grid).unwrap().norm;
        let b = norm_profile(&model(kind, 1.0), &wide).unwrap().norm;
        assert!((a - b).abs() < 1e-10, "{kind:?}: {a} vs {b}");
    }
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0f64..10.0, -10.0f64..10.0)
        .prop_filter("nonzero", |(a, b)| a.hypot(*b) > 1e-3)
        .prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superpotential_ignores_normalisation(c in complex(), eps in 0.3f64..2.0) {
        let grid = GridSpec::new(-3.0, 3.0, 301).unwrap();
        let psi = model(ModelKind::PsiMinus, eps).sample(&grid).unwrap();
        let scaled = psi.map(|_, v| c * v).unwrap();
        let a = superpotential_from_wavefunction(&psi).unwrap();
        let b = superpotential_from_wavefunction(&scaled).unwrap();
        prop_assert!(a.max_abs_diff_in(&b, 0..grid.n) < 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn minus_partner_satisfies_riccati(eps in 0.3f64..2.0, n in 201usize..801) {
        let grid = GridSpec::new(-3.0, 3.0, n).unwrap();
        let w = model(ModelKind::WMinus, eps).sample(&grid).unwrap();
        let (vm, _) = partner_potentials(&w, zero()).unwrap();
        let h = grid.spacing();
        prop_assert!(riccati_residual(&w, &vm, zero()).unwrap() < 10.0 * h * h);
    }

    #[test]
    fn modified_relation_holds_pointwise(x in -6.0f64..6.0, eps in 0.1f64..3.0) {
        let wp = model(ModelKind::WPlus, eps);
        let wm = model(ModelKind::WMinus, eps);
        let lhs = wp.value(x) * wp.value(x) - wp.derivative(x);
        let rhs = (wm.value(x) * wm.value(x) + wm.derivative(x)).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * lhs.norm().max(1.0));
    }
}
