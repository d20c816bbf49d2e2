use std::sync::Arc;

use num::{BigInt, BigRational};
use proptest::prelude::*;

use bsf_core::constructor::{
    append_and_certify, build_checkpointed_stream, build_checkpointed_word, build_property_p_stream,
    in_realization_class, odot_concat, realization_length, realize_frequency_word, repetition_bound, Budget,
    PropertyPSchedule, TargetPlan, WindowRule,
};
use bsf_core::spectrum::enumerate_rational_targets;
use bsf_core::{Error, FrequencyVector, ShiftSpec, Symbol, Word};

fn golden() -> ShiftSpec {
    ShiftSpec::golden_mean().with_spec_constant(1)
}

fn full2() -> ShiftSpec {
    ShiftSpec::full(2).unwrap()
}

fn target(spec: &ShiftSpec, k: usize, s: &str) -> FrequencyVector {
    FrequencyVector::parse(Arc::new(spec.enumerate_language(k).unwrap()), s).unwrap()
}

/// Exact window-frequency distance, counted here.
fn distance(w: &[Symbol], q: &FrequencyVector) -> BigRational {
    let k = q.k();
    let den = BigInt::from(w.len() + 1 - k);
    q.iter()
        .map(|(b, qb)| {
            let c = w.windows(k).filter(|x| *x == b.as_slice()).count();
            let diff = BigRational::new(BigInt::from(c), den.clone()) - qb;
            if diff < BigRational::from_integer(0.into()) { -diff } else { diff }
        })
        .sum()
}

#[test]
fn padded_concatenation_keeps_words_allowed() {
    let spec = golden();
    let words: Vec<Word> = ["1", "01", "10", "1"].iter().map(|s| s.parse().unwrap()).collect();
    let w = odot_concat(&spec, &words).unwrap();
    assert!(spec.is_allowed(w.as_slice()).unwrap());
    assert!(w.len() <= 6 + 3);
}

#[test]
fn missing_specification_constant_is_an_input_error() {
    let q = target(&ShiftSpec::golden_mean(), 1, "1,0");
    let err = realize_frequency_word(&ShiftSpec::golden_mean(), &q, 1, 4).unwrap_err();
    assert_eq!(err, Error::MissingSpecificationConstant);
}

#[test]
fn infeasible_target_is_rejected() {
    let spec = golden();
    let q = target(&spec, 1, "2/5,3/5");
    let err = realize_frequency_word(&spec, &q, 1, 4).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err}");
}

#[test]
fn empty_plan_echoes_prefix() {
    let spec = golden();
    let plan = TargetPlan::new(Vec::new(), BigRational::new(1.into(), 10.into())).with_prefix("0100".parse().unwrap());
    let (w, cert) = build_checkpointed_word(&spec, &plan, &Budget::default()).unwrap();
    assert_eq!(w.to_string(), "0100");
    assert!(cert.entries.is_empty());
}

#[test]
fn constructions_are_deterministic() {
    let spec = golden();
    let make = || {
        let plan = TargetPlan::new(
            vec![target(&spec, 1, "1,0"), target(&spec, 1, "1/2,1/2")],
            BigRational::new(1.into(), 10.into()),
        )
        .cycling();
        let budget = Budget { max_symbols: 50_000, ..Budget::default() };
        build_checkpointed_stream(&spec, plan, &budget).unwrap().collect::<Vec<_>>()
    };
    assert_eq!(make(), make());
}

#[test]
fn checkpoint_certificates_match_recounted_distances() {
    let spec = golden();
    let targets = vec![target(&spec, 2, "1,0,0"), target(&spec, 2, "1/3,1/3,1/3")];
    let eps = BigRational::new(1.into(), 10.into());
    let plan = TargetPlan::new(targets.clone(), eps.clone()).with_prefix("0101".parse().unwrap());
    let (w, cert) = build_checkpointed_word(&spec, &plan, &Budget::default()).unwrap();
    assert!(w.as_slice().starts_with(&[0, 1, 0, 1]));
    assert!(spec.is_allowed(w.as_slice()).unwrap());
    for e in &cert.entries {
        let d = distance(&w.as_slice()[..e.n as usize], &targets[e.target_index]);
        assert_eq!(d, e.distance);
        assert!(d <= eps);
    }
}

#[test]
fn stream_stops_at_symbol_budget() {
    let spec = full2();
    let targets = vec![target(&spec, 1, "1,0"), target(&spec, 1, "0,1")];
    let plan = TargetPlan::new(targets, BigRational::new(1.into(), 4.into())).cycling();
    let budget = Budget { max_symbols: 12_345, ..Budget::default() };
    let mut s = build_checkpointed_stream(&spec, plan, &budget).unwrap();
    assert_eq!(s.by_ref().count(), 12_345);
    assert!(matches!(s.termination(), Some(Error::Budget { what: "symbol", .. })));
}

#[test]
fn property_p_windows_stay_close() {
    let spec = golden();
    let targets = vec![target(&spec, 1, "1,0"), target(&spec, 1, "1/2,1/2")];
    let schedule = PropertyPSchedule::new(targets, 10, WindowRule::WindowFactor(4));
    let budget = Budget { max_symbols: 300_000, ..Budget::default() };
    let mut s = build_property_p_stream(&spec, schedule, &budget).unwrap();
    let w: Vec<Symbol> = s.by_ref().collect();
    let certs = bsf_core::constructor::window_certificates(&s.certificates());
    assert!(!certs.is_empty());
    for c in certs {
        let q: Vec<f64> = c.target.entries().iter().map(|x| num::ToPrimitive::to_f64(x).unwrap()).collect();
        let mut ones = 0u64;
        for (i, &x) in w[..c.window_end as usize].iter().enumerate() {
            ones += x as u64;
            let n = i as u64 + 1;
            if n > c.j {
                let f1 = ones as f64 / n as f64;
                let d = (1.0 - f1 - q[0]).abs() + (f1 - q[1]).abs();
                assert!(d < 1.0 / c.tuple.h as f64, "n={n} d={d}");
            }
        }
    }
}

fn instance() -> impl Strategy<Value = (bool, usize, u64, usize, u64)> {
    (any::<bool>(), 1usize..=2, 3u64..=9, 0usize..1000, 0u64..1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn realized_words_meet_the_contract((is_golden, k, n, pick, _) in instance()) {
        let spec = if is_golden { golden() } else { full2() };
        let all = enumerate_rational_targets(&spec, k, 5).unwrap().targets;
        let q = &all[pick % all.len()];
        let w = realize_frequency_word(&spec, q, k, n).unwrap();
        prop_assert!(w.len() as u64 >= realization_length(k, n, q.len()));
        prop_assert!(spec.is_allowed(w.as_slice()).unwrap());
        prop_assert!(distance(w.as_slice(), q) <= BigRational::new(1.into(), (n as i64).into()));
        prop_assert!(in_realization_class(&spec, w.as_slice(), q, n).unwrap());
    }

    #[test]
    fn appended_repetitions_stay_within_four_over_n((is_golden, k, n, pick, seed) in instance(), t in 1usize..30) {
        let spec = if is_golden { golden() } else { full2() };
        let all = enumerate_rational_targets(&spec, k, 5).unwrap().targets;
        let q = &all[pick % all.len()];
        let mut omega = Vec::new();
        let mut state = seed;
        while omega.len() < t {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let s = ((state >> 33) & 1) as Symbol;
            omega.push(if is_golden && omega.last() == Some(&1) { 0 } else { s });
        }
        let gamma = realize_frequency_word(&spec, q, k, n).unwrap();
        let ell = repetition_bound(t as u64, gamma.len() as u64, k);
        let c = append_and_certify(&spec, &Word::new(omega.clone()), &gamma, q, n, ell).unwrap();
        prop_assert!(c.word.as_slice().starts_with(&omega));
        prop_assert!(spec.is_allowed(c.word.as_slice()).unwrap());
        let d = distance(c.word.as_slice(), q);
        prop_assert_eq!(&d, &c.distance);
        prop_assert!(d <= BigRational::new(4.into(), (n as i64).into()));
    }

    #[test]
    fn allowed_prefixes_are_preserved(prefix in prop::collection::vec(0u8..2, 1..12)) {
        let spec = golden();
        let mut p = prefix;
        for i in 1..p.len() {
            if p[i - 1] == 1 { p[i] = 0; }
        }
        let plan = TargetPlan::new(vec![target(&spec, 1, "2/3,1/3")], BigRational::new(1.into(), 5.into()))
            .with_prefix(Word::new(p.clone()));
        let (w, cert) = build_checkpointed_word(&spec, &plan, &Budget::default()).unwrap();
        prop_assert!(w.as_slice().starts_with(&p));
        prop_assert!(spec.is_allowed(w.as_slice()).unwrap());
        prop_assert_eq!(cert.entries.len(), 1);
    }
}

#[test]
fn cycling_two_targets_makes_every_letter_diverge() {
    let spec = golden();
    let plan = TargetPlan::new(
        vec![target(&spec, 1, "1,0"), target(&spec, 1, "1/2,1/2")],
        BigRational::new(1.into(), 10.into()),
    )
    .cycling();
    let budget = Budget { max_symbols: 200_000, ..Budget::default() };
    let w: Vec<Symbol> = build_checkpointed_stream(&spec, plan, &budget).unwrap().collect();
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    let mut count = 0usize;
    for (i, &s) in w.iter().enumerate() {
        count += s as usize;
        if i >= 80 {
            let f = count as f64 / (i + 1) as f64;
            lo = lo.min(f);
            hi = hi.max(f);
        }
    }
    assert!(hi - lo >= 0.3, "oscillation {}", hi - lo);
}
