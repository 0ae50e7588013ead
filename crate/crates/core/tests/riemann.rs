use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use toboggan_susy::riemann::*;
use toboggan_susy::Error;

fn word(max_m: usize, max_len: usize) -> impl Strategy<Value = HomotopyWord> {
    prop::collection::vec((1..=max_m, prop::bool::ANY), 0..=max_len).prop_map(|v| {
        HomotopyWord::new(v.into_iter().map(|(k, p)| Letter::new(k, if p { 1 } else { -1 })).collect())
    })
}

fn signs(m: usize) -> impl Strategy<Value = ConjugationChoice> {
    prop::collection::vec(prop::bool::ANY, m)
        .prop_map(|v| ConjugationChoice::new(v.into_iter().map(|p| if p { 1 } else { -1 }).collect()).unwrap())
}

// repeated scan until nothing cancels
fn naive_reduce(w: &HomotopyWord) -> HomotopyWord {
    let mut letters = w.letters.clone();
    loop {
        let hit = letters
            .windows(2)
            .position(|p| p[0].puncture == p[1].puncture && p[0].exponent == -p[1].exponent);
        match hit {
            Some(i) => {
                letters.drain(i..i + 2);
            }
            None => return HomotopyWord::new(letters),
        }
    }
}

fn conjugate_pair() -> BranchPointSet {
    BranchPointSet::new(vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduction_matches_naive_and_is_idempotent(w in word(3, 40)) {
        let r = reduce(&w, 3).unwrap();
        prop_assert_eq!(&r, &naive_reduce(&w));
        prop_assert!(r.is_reduced());
        prop_assert!(r.len() <= w.len());
        prop_assert_eq!(reduce(&r, 3).unwrap(), r);
    }

    #[test]
    fn abelianization_is_additive(u in word(3, 20), v in word(3, 20)) {
        let a = abelianize(&u, 3).unwrap();
        let b = abelianize(&v, 3).unwrap();
        let sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(abelianize(&u.concat(&v), 3).unwrap(), sum);
        prop_assert_eq!(abelianize(&reduce(&u, 3).unwrap(), 3).unwrap(), a);
    }

    #[test]
    fn plus_conjugation_reverses_orientation(w in word(2, 30)) {
        let set = conjugate_pair();
        let plus = ConjugationChoice::uniform(2, 1);
        let r = reduce(&w, 2).unwrap();
        let c = conjugate_word(&w, &set, &plus).unwrap();
        prop_assert_eq!(c.len(), r.len());
        let a = abelianize(&w, 2).unwrap();
        // mirror swaps the two punctures
        prop_assert_eq!(abelianize(&c, 2).unwrap(), vec![-a[1], -a[0]]);
        prop_assert_eq!(conjugate_word(&c, &set, &plus).unwrap(), r);
    }

    #[test]
    fn fixed_choice_is_an_involution_on_sheets(
        m in 1usize..=3,
        theta in prop::collection::vec(-20.0f64..20.0, 3),
        bits in prop::collection::vec(prop::bool::ANY, 3),
    ) {
        let rho = ConjugationChoice::new(bits[..m].iter().map(|&p| if p { 1 } else { -1 }).collect()).unwrap();
        let s = SheetState::new(theta[..m].to_vec()).unwrap();
        let back = apply_conjugation_sheets(&apply_conjugation_sheets(&s, &rho).unwrap(), &rho).unwrap();
        for (x, y) in back.theta.iter().zip(&s.theta) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn distinct_choices_compose_to_deck_translation(
        m in 1usize..=3,
        theta in prop::collection::vec(-20.0f64..20.0, 3),
        a in signs(3),
        b in signs(3),
    ) {
        let rho = ConjugationChoice::new(a.signs[..m].to_vec()).unwrap();
        let rho2 = ConjugationChoice::new(b.signs[..m].to_vec()).unwrap();
        let s = SheetState::new(theta[..m].to_vec()).unwrap();
        let out = apply_conjugation_sheets(&apply_conjugation_sheets(&s, &rho).unwrap(), &rho2).unwrap();
        let mut moved = false;
        for k in 0..m {
            let shift = 2.0 * PI * f64::from(rho.signs[k] - rho2.signs[k]);
            prop_assert!((out.theta[k] - s.theta[k] + shift).abs() <= 1e-12 * (1.0 + s.theta[k].abs()));
            moved |= shift != 0.0;
        }
        prop_assert_eq!(moved, rho != rho2);
    }
}

#[test]
fn plus_after_minus_shifts_two_sheets() {
    let s = SheetState::new(vec![0.0]).unwrap();
    let plus = ConjugationChoice::uniform(1, 1);
    let minus = ConjugationChoice::uniform(1, -1);
    // T(+) o T(-): minus acts first
    let out = apply_conjugation_sheets(&apply_conjugation_sheets(&s, &minus).unwrap(), &plus).unwrap();
    assert!((out.theta[0] - 4.0 * PI).abs() < 1e-15);
    assert_eq!(out.sheet(0) - s.sheet(0), 2);
}

#[test]
fn reduced_word_counts() {
    for (m, len) in [(1, 2), (1, 5), (2, 1), (2, 3), (2, 6)] {
        let c = enumerate_classes(m, len).unwrap();
        let expected: usize = 1 + (1..=len).map(|l| 2 * m * (2 * m - 1).pow(l as u32 - 1)).sum::<usize>();
        assert_eq!(c.total, expected, "m={m} len={len}");
        assert_eq!(c.words.len(), expected);
        assert_eq!(c.classes.iter().map(|k| k.count).sum::<usize>(), expected);
        assert!(c.words.iter().all(|w| w.letters.is_reduced() && w.length == w.letters.len()));
    }
    assert_eq!(enumerate_classes(2, 3).unwrap().total, 53);
}

#[test]
fn classes_group_by_winding() {
    let c = enumerate_classes(2, 4).unwrap();
    for w in &c.words {
        assert_eq!(abelianize(&w.letters, 2).unwrap(), w.winding);
    }
    let windings: Vec<&Vec<i64>> = c.words.iter().map(|w| &w.winding).collect();
    let mut sorted = windings.clone();
    sorted.sort();
    assert_eq!(windings, sorted);
}

#[test]
fn unsupported_enumeration_is_a_capability_error() {
    assert!(matches!(enumerate_classes(3, 2), Err(Error::Capability(_))));
    assert!(matches!(enumerate_classes(2, 13), Err(Error::Capability(_))));
}

#[test]
fn out_of_range_puncture_is_rejected() {
    let w = HomotopyWord::from_pairs(&[(3, 1)]);
    assert!(matches!(reduce(&w, 2), Err(Error::Validation { .. })));
    assert!(matches!(abelianize(&w, 2), Err(Error::Validation { .. })));
}

#[test]
fn mismatched_choice_length_is_rejected() {
    let set = conjugate_pair();
    let w = HomotopyWord::from_pairs(&[(1, 1)]);
    assert!(conjugate_word(&w, &set, &ConjugationChoice::uniform(1, 1)).is_err());
    let s = SheetState::new(vec![0.0, 1.0]).unwrap();
    assert!(apply_conjugation_sheets(&s, &ConjugationChoice::uniform(3, 1)).is_err());
}
