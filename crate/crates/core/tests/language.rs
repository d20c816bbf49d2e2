use proptest::prelude::*;

use bsf_core::{ShiftSpec, Symbol, Word};

fn brute_force_language(size: usize, forbidden: &[Vec<Symbol>], k: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let total = size.pow(k as u32);
    for mut code in 0..total {
        let mut w = vec![0 as Symbol; k];
        for slot in w.iter_mut().rev() {
            *slot = (code % size) as Symbol;
            code /= size;
        }
        let bad = forbidden
            .iter()
            .any(|f| f.len() <= k && w.windows(f.len()).any(|x| x == f.as_slice()));
        if !bad {
            out.push(w);
        }
    }
    out
}

fn forbidden_sets() -> impl Strategy<Value = (usize, Vec<Vec<Symbol>>)> {
    (2usize..=3).prop_flat_map(|size| {
        let word = prop::collection::vec(0..size as Symbol, 2..=3);
        (Just(size), prop::collection::vec(word, 1..=3))
    })
}

#[test]
fn fibonacci_counts_for_golden_mean() {
    let spec = ShiftSpec::golden_mean();
    let (mut a, mut b) = (1usize, 2usize);
    for k in 1..=16 {
        assert_eq!(spec.enumerate_language(k).unwrap().len(), b, "k = {k}");
        (a, b) = (b, a + b);
    }
}

#[test]
fn full_shift_counts() {
    let spec = ShiftSpec::full(3).unwrap();
    for k in 1..=6 {
        assert_eq!(spec.enumerate_language(k).unwrap().len(), 3usize.pow(k as u32));
    }
}

#[test]
fn enumeration_cap_is_reported() {
    let spec = ShiftSpec::full(2).unwrap().with_enumeration_cap(1 << 10);
    assert!(spec.enumerate_language(10).is_ok());
    assert!(matches!(
        spec.enumerate_language(11),
        Err(bsf_core::Error::EnumerationCap { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_brute_force((size, forbidden) in forbidden_sets(), k in 1usize..=6) {
        let spec = ShiftSpec::forbidden_words(size, forbidden.iter().cloned().map(Word::new).collect()).unwrap();
        let listed: Vec<Vec<Symbol>> = spec
            .enumerate_language(k)
            .unwrap()
            .words()
            .iter()
            .map(|w| w.as_slice().to_vec())
            .collect();
        prop_assert_eq!(listed, brute_force_language(size, &forbidden, k));
    }

    #[test]
    fn factors_of_allowed_words_are_allowed((size, forbidden) in forbidden_sets(), k in 2usize..=6) {
        let spec = ShiftSpec::forbidden_words(size, forbidden.into_iter().map(Word::new).collect()).unwrap();
        for w in spec.enumerate_language(k).unwrap().words() {
            for i in 0..k {
                for j in i + 1..=k {
                    prop_assert!(spec.is_allowed(&w.as_slice()[i..j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn paddings_join_allowed_words(
        a in prop::collection::vec(0u8..2, 1..8),
        b in prop::collection::vec(0u8..2, 1..8),
    ) {
        let spec = ShiftSpec::golden_mean();
        prop_assume!(spec.is_allowed(&a).unwrap() && spec.is_allowed(&b).unwrap());
        let u = spec.find_padding(&a, &b, 1).unwrap();
        let mut joined = a.clone();
        joined.extend_from_slice(u.as_slice());
        joined.extend_from_slice(&b);
        prop_assert!(u.len() <= 1);
        prop_assert!(spec.is_allowed(&joined).unwrap());
    }

    #[test]
    fn descriptions_round_trip((size, forbidden) in forbidden_sets()) {
        let spec = ShiftSpec::forbidden_words(size, forbidden.into_iter().map(Word::new).collect()).unwrap();
        let back: ShiftSpec = spec.describe().parse().unwrap();
        prop_assert_eq!(back.describe(), spec.describe());
    }
}

#[test]
fn golden_specification_constant_is_one() {
    assert_eq!(ShiftSpec::golden_mean().specification_constant(6, 4).unwrap(), 1);
    assert_eq!(ShiftSpec::full(2).unwrap().specification_constant(6, 4).unwrap(), 0);
}
