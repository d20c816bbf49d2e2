use std::sync::Arc;

use num::{BigInt, BigRational, Zero};
use proptest::prelude::*;

use bsf_core::freqstats::{
    block_frequency, cesaro_trajectory, cesaro_trajectory_f64, detect_accumulation, frequency_vector,
    Evaluation,
};
use bsf_core::{DenominatorMode, FrequencyVector, ShiftSpec, Symbol};

fn rat(p: usize, q: usize) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// `P^(r)(n)` straight from the definition, every order and length.
fn by_definition(w: &[Symbol], k: usize, blocks: &[Vec<Symbol>], r_max: usize) -> Vec<Vec<Vec<BigRational>>> {
    let mut levels = vec![(1..=w.len())
        .map(|n| {
            blocks
                .iter()
                .map(|b| {
                    let c = if n >= k { w[..n].windows(k).filter(|x| *x == b.as_slice()).count() } else { 0 };
                    rat(c, n)
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()];
    for r in 1..=r_max {
        let prev = &levels[r - 1];
        let next = (1..=w.len())
            .map(|n| {
                (0..blocks.len())
                    .map(|b| prev[..n].iter().fold(BigRational::zero(), |a, v| a + &v[b]) / BigRational::from_integer(n.into()))
                    .collect()
            })
            .collect();
        levels.push(next);
    }
    levels
}

#[test]
fn alternating_word_example() {
    let spec = ShiftSpec::full(2).unwrap();
    let w = [0u8, 1, 0, 1];
    let points = cesaro_trajectory(w, 1, 1, &spec, &[4]).unwrap();
    let first = points.iter().find(|p| p.r == 1).unwrap();
    assert_eq!(first.vector.entries()[0], rat(2, 3));
}

#[test]
fn paper_n_entries_sum_to_window_share() {
    let spec = ShiftSpec::golden_mean();
    let w = [0u8, 1, 0, 0, 1, 0, 1, 0, 0];
    for k in 1..=3 {
        let p = frequency_vector(&w, k, &spec, DenominatorMode::PaperN).unwrap();
        assert_eq!(p.sum(), rat(w.len() + 1 - k, w.len()));
        let f = frequency_vector(&w, k, &spec, DenominatorMode::FittedWindows).unwrap();
        assert_eq!(f.sum(), rat(1, 1));
    }
    assert_eq!(block_frequency(&w, &[0, 0], DenominatorMode::PaperN).unwrap(), rat(2, 9));
    assert!(block_frequency(&w[..1], &[0, 0], DenominatorMode::PaperN).is_err());
}

#[test]
fn accumulation_detects_both_targets() {
    let spec = ShiftSpec::full(2).unwrap();
    let blocks = Arc::new(spec.enumerate_language(1).unwrap());
    let targets = vec![
        FrequencyVector::parse(blocks.clone(), "1,0").unwrap(),
        FrequencyVector::parse(blocks, "0,1").unwrap(),
    ];
    let mut w = vec![0u8; 100];
    w.extend(vec![1u8; 900]);
    w.extend(vec![0u8; 9000]);
    let report =
        detect_accumulation(w.iter().copied(), 1, 0, &spec, &targets, 0.25, 10_000, Evaluation::Every).unwrap();
    assert!(report.hit_count(0) > 0 && report.hit_count(1) > 0);
    assert_eq!(report.visit_count(0), 2);
    assert_eq!(report.evaluated_to, 10_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn streaming_matches_definition(w in prop::collection::vec(0u8..2, 1..40), k in 1usize..=2) {
        let spec = ShiftSpec::full(2).unwrap();
        let blocks: Vec<Vec<Symbol>> = spec.enumerate_language(k).unwrap().words().iter().map(|b| b.as_slice().to_vec()).collect();
        let checkpoints: Vec<u64> = (1..=w.len() as u64).collect();
        let fast = cesaro_trajectory(w.iter().copied(), k, 3, &spec, &checkpoints).unwrap();
        let slow = by_definition(&w, k, &blocks, 3);
        prop_assert_eq!(fast.len(), 4 * w.len());
        for p in &fast {
            prop_assert_eq!(p.vector.entries(), slow[p.r][p.n as usize - 1].as_slice());
        }
    }

    #[test]
    fn float_tower_tracks_exact(w in prop::collection::vec(0u8..2, 1..200)) {
        let spec = ShiftSpec::golden_mean();
        let mut w = w;
        for i in 1..w.len() {
            if w[i - 1] == 1 { w[i] = 0; }
        }
        let cps = [w.len() as u64];
        let exact = cesaro_trajectory(w.iter().copied(), 1, 2, &spec, &cps).unwrap();
        let float = cesaro_trajectory_f64(w.iter().copied(), 1, 2, &spec, &cps).unwrap();
        for (e, f) in exact.iter().zip(&float) {
            for (a, b) in e.vector.entries().iter().zip(f.vector.entries()) {
                prop_assert!((num::ToPrimitive::to_f64(a).unwrap() - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn averages_stay_in_the_simplex_hull(w in prop::collection::vec(0u8..3, 1..60)) {
        let spec = ShiftSpec::full(3).unwrap();
        let cps: Vec<u64> = (1..=w.len() as u64).collect();
        for p in cesaro_trajectory(w.iter().copied(), 1, 2, &spec, &cps).unwrap() {
            prop_assert!(p.vector.entries().iter().all(|x| *x >= BigRational::zero()));
            prop_assert_eq!(p.vector.sum(), rat(1, 1));
        }
    }
}
