use num_complex::Complex64;
use proptest::prelude::*;
use toboggan_susy::contours::*;
use toboggan_susy::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn family() -> impl Strategy<Value = ContourSpec> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|e| ContourSpec::line_shift(e).unwrap()),
        (0.1f64..3.0, 0u32..4).prop_map(|(e, n)| ContourSpec::toboggan(e, n).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jets_agree_with_central_differences(spec in family(), x in -3.0f64..3.0) {
        let h = 1e-4;
        let r = |t: f64| spec.eval(t).unwrap();
        let j = spec.eval_jet(x).unwrap();
        let d1 = (r(x + h) - r(x - h)) / (2.0 * h);
        let d2 = (r(x + h) - 2.0 * r(x) + r(x - h)) / (h * h);
        // wider step for the third difference, which divides rounding by h^3
        let k = 1e-3;
        let d3 = (r(x + 2.0 * k) - 2.0 * r(x + k) + 2.0 * r(x - k) - r(x - 2.0 * k)) / (2.0 * k * k * k);
        let rel = |a: Complex64, b: Complex64, s: f64| (a - b).norm() / b.norm().max(s);
        prop_assert!(rel(d1, j.r1, 1.0) < 1e-6);
        let scale = j.r.norm().max(1.0);
        prop_assert!(rel(d2, j.r2, scale) < 1e-6);
        prop_assert!(rel(d3, j.r3, scale) < 1e-4);
    }

    #[test]
    fn conjugation_is_an_involution(spec in family(), x in -10.0f64..10.0) {
        let once = conjugate_contour(&spec).unwrap();
        let twice = conjugate_contour(&once).unwrap();
        prop_assert_eq!(twice.eval(x).unwrap(), spec.eval(x).unwrap());
        prop_assert_eq!(once.eval(x).unwrap(), spec.eval(x).unwrap().conj());
    }

    #[test]
    fn unit_toboggan_is_the_shifted_line(e in 0.05f64..5.0, x in -100.0f64..100.0) {
        let t = ContourSpec::toboggan(e, 0).unwrap().eval(x).unwrap();
        let l = ContourSpec::line_shift(e).unwrap().eval(x).unwrap();
        prop_assert!((t - l).norm() <= 4.0 * f64::EPSILON * l.norm());
    }
}

#[test]
fn closed_form_values() {
    let j = ContourSpec::line_shift(1.0).unwrap().eval_jet(2.0).unwrap();
    assert_eq!(j.r, c(2.0, -1.0));
    assert_eq!((j.r1, j.r2, j.r3), (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
    let t = ContourSpec::toboggan(0.5, 1).unwrap();
    assert!((t.eval(0.0).unwrap() - c(0.0, -0.125)).norm() < 1e-15);
    let t_bar = conjugate_contour(&t).unwrap();
    assert!((t_bar.eval(0.0).unwrap() - c(0.0, 0.125)).norm() < 1e-15);
    let l_bar = conjugate_contour(&ContourSpec::line_shift(1.0).unwrap()).unwrap();
    assert_eq!(l_bar.eval(3.0).unwrap(), c(3.0, 1.0));
}

#[test]
fn half_turn_windings() {
    let w = winding(&ContourSpec::line_shift(1.0).unwrap(), c(0.0, 0.0), -50.0, 50.0, 2001).unwrap();
    // finite interval: (pi - 2 atan(1/50)) / 2 pi
    let exact = (std::f64::consts::PI - 2.0 * (1.0f64 / 50.0).atan()) / (2.0 * std::f64::consts::PI);
    assert!((w - exact).abs() < 1e-12);
    for n in 0..4u32 {
        let spec = ContourSpec::toboggan(1.0, n).unwrap();
        let w = winding(&spec, c(0.0, 0.0), -50.0, 50.0, 2001).unwrap();
        assert!((w - f64::from(2 * n + 1) * exact).abs() < 1e-10, "N={n}: {w}");
    }
}

#[test]
fn winding_approaches_half_integers() {
    let spec = ContourSpec::toboggan(1.0, 2).unwrap();
    let w = winding(&spec, c(0.0, 0.0), -1e4, 1e4, 20001).unwrap();
    assert!((w - 2.5).abs() < 1e-3);
}

#[test]
fn winding_near_branch_point_errors() {
    let spec = ContourSpec::line_shift(1.0).unwrap();
    let err = winding(&spec, c(0.5, -1.0), -2.0, 2.0, 101).unwrap_err();
    assert!(matches!(err, Error::Singularity { .. }));
    assert!(winding(&spec, c(0.0, 0.0), -2.0, 2.0, 1).is_err());
}

#[test]
fn contour_json_round_trip() {
    let spec: ContourSpec = serde_json::from_str(r#"{"family":"toboggan","epsilon":0.5,"winding":2}"#).unwrap();
    assert_eq!(spec, ContourSpec::toboggan(0.5, 2).unwrap());
    assert!(serde_json::from_str::<ContourSpec>(r#"{"family":"line_shift","epsilon":1,"extra":0}"#).is_err());
}
