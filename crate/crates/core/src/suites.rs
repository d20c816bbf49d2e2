//! Named self-check suites run by the command-line `verify` command.
//!
//! Each suite exercises one family of guarantees end to end and reports one
//! line per case. Suites are deterministic for a given seed.

use std::sync::Arc;

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beta::{BetaSystem, QuadraticNumber};
use crate::constructor::{
    append_and_certify, build_checkpointed_stream, build_checkpointed_word, build_property_p_stream,
    cesaro_inheritance_check, in_realization_class, realization_length, repetition_bound,
    stage_precision, window_certificates, Budget, PropertyPSchedule, Realizer, TargetPlan,
    WindowCertificate, WindowRule,
};
use crate::error::{Error, Result};
use crate::freqstats::{cesaro_trajectory, detect_accumulation, Evaluation, FrequencyVector};
use crate::shiftspace::{ShiftSpec, Symbol, Word};
use crate::spectrum::{
    invariant_polytope, is_in_spectrum, letter_frequency_spread, parry_measure, polytope_vertices,
};

pub const SUITES: &[&str] = &[
    "golden-spectrum",
    "beta-fixtures",
    "language-counts",
    "zn-contract",
    "lemma-frequency-word",
    "distributions",
    "letter-divergence",
    "property-p",
    "cesaro-inheritance",
    "parry",
    "cesaro-exactness",
];

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Window factor for `cesaro-inheritance`; below 64 the suite runs as a
    /// negative control.
    pub window_factor: u64,
    pub budget: Budget,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 1,
            window_factor: 64,
            budget: Budget {
                max_symbols: 30_000_000,
                max_stages: 64,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn case(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CaseResult {
    CaseResult {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<CaseResult>,
    /// In a negative control the suite succeeds when some case fails.
    pub negative_control: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }

    pub fn succeeded(&self) -> bool {
        if self.negative_control {
            self.failures() > 0
        } else {
            !self.cases.is_empty() && self.failures() == 0
        }
    }
}

/// Runs one suite by name, or every suite for `"all"` (in parallel).
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    if name == "all" {
        return SUITES
            .par_iter()
            .map(|s| run_one(s, opts))
            .collect::<Result<Vec<_>>>();
    }
    Ok(vec![run_one(name, opts)?])
}

fn run_one(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut negative_control = false;
    let cases = match name {
        "golden-spectrum" => golden_spectrum()?,
        "beta-fixtures" => beta_fixtures()?,
        "language-counts" => language_counts()?,
        "zn-contract" => zn_contract(opts.seed)?,
        "lemma-frequency-word" => lemma_frequency_word(opts.seed)?,
        "distributions" => distributions()?,
        "letter-divergence" => letter_divergence()?,
        "property-p" => property_p()?,
        "cesaro-inheritance" => {
            negative_control = opts.window_factor < 64;
            cesaro_inheritance(opts.window_factor, &opts.budget)?
        }
        "parry" => parry(opts.seed)?,
        "cesaro-exactness" => cesaro_exactness(opts.seed)?,
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown suite {name:?}; known suites: {}, all",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        cases,
        negative_control,
    })
}

fn golden() -> ShiftSpec {
    ShiftSpec::golden_mean().with_spec_constant(1)
}

fn full2() -> ShiftSpec {
    ShiftSpec::full(2).expect("full shift")
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn targets(spec: &ShiftSpec, k: usize, list: &[&str]) -> Result<Vec<FrequencyVector>> {
    let blocks = Arc::new(spec.enumerate_language(k)?);
    list.iter()
        .map(|s| FrequencyVector::parse(blocks.clone(), s))
        .collect()
}

fn golden_spectrum() -> Result<Vec<CaseResult>> {
    let spec = golden();
    let blocks = Arc::new(spec.enumerate_language(1)?);
    let mut wrong = Vec::new();
    let mut checked = 0;
    for d in 1..=24i64 {
        for a in 0..=d {
            let q = FrequencyVector::probability(blocks.clone(), vec![rat(d - a, d), rat(a, d)])?;
            let expected = 2 * a <= d;
            if is_in_spectrum(&q, &spec, 1)? != expected {
                wrong.push(q.to_string());
            }
            checked += 1;
        }
    }
    let fixed = targets(&spec, 1, &["1/2,1/2", "1,0"])?;
    let accepted = fixed
        .iter()
        .map(|q| is_in_spectrum(q, &spec, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        case(
            "frequency of 1 at most 1/2",
            wrong.is_empty(),
            format!("{checked} targets, misclassified: {wrong:?}"),
        ),
        case(
            "(1/2,1/2) and (1,0) accepted",
            accepted.iter().all(|&x| x),
            format!("{accepted:?}"),
        ),
    ])
}

fn beta_fixtures() -> Result<Vec<CaseResult>> {
    let sys = BetaSystem::golden();
    let phi = QuadraticNumber::golden();
    let inv = phi
        .recip()
        .ok_or_else(|| Error::InvalidInput("β is zero".into()))?;
    let inv2 = inv.mul(&inv)?;
    let mut out = Vec::new();
    for (label, x, lead) in [("1/β", inv, 0usize), ("1/β²", inv2, 1usize)] {
        let digits = sys.greedy_expansion(&x, 20)?;
        let expected: Word = (0..20).map(|i| Symbol::from(i == lead)).collect();
        out.push(case(
            format!("greedy digits of {label}"),
            digits == expected,
            digits.to_string(),
        ));
        let (value, _) = sys.symbolic_to_point(&digits)?;
        let err = (value - x.to_f64()).abs();
        out.push(case(
            format!("{label} reconstructed"),
            err <= 1e-9,
            format!("error {err:.3e}"),
        ));
    }
    let two = BetaSystem::integer(2)?;
    let d = two.greedy_expansion_f64(0.75, 4)?;
    out.push(case("binary 0.75", d.to_string() == "1100", d.to_string()));
    Ok(out)
}

fn language_counts() -> Result<Vec<CaseResult>> {
    let spec = golden();
    let fib = [2usize, 3, 5, 8, 13, 21, 34, 55];
    let mut out = Vec::new();
    for (k, &f) in (1..=8).zip(&fib) {
        let listed = spec.enumerate_language(k)?.len();
        let mut brute = 0;
        for code in 0u32..(1 << k) {
            let w: Vec<Symbol> = (0..k).map(|i| ((code >> (k - 1 - i)) & 1) as Symbol).collect();
            if !w.windows(2).any(|p| p == [1, 1]) {
                brute += 1;
            }
        }
        out.push(case(
            format!("|L_{k}|"),
            listed == f && brute == f,
            format!("enumerated {listed}, brute force {brute}, expected {f}"),
        ));
    }
    Ok(out)
}

fn random_target(rng: &mut ChaCha8Rng, spec: &ShiftSpec, k: usize, q_max: u64) -> Result<FrequencyVector> {
    let all = invariant_polytope(spec, k)?.rational_targets(q_max)?.targets;
    Ok(all[rng.random_range(0..all.len())].clone())
}

fn zn_contract(seed: u64) -> Result<Vec<CaseResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut max_len = 0;
    for i in 0..50 {
        let spec = if i % 2 == 0 { golden() } else { full2() };
        let k = 1 + (i / 2) % 2;
        let n = rng.random_range(3..=10u64);
        let q = random_target(&mut rng, &spec, k, 6)?;
        let mut realizer = Realizer::new(&spec, k)?;
        let w = realizer.realize(&q, n)?.word();
        max_len = max_len.max(w.len());
        let long = w.len() as u64 >= realization_length(k, n, q.len());
        if !(long && in_realization_class(&spec, &w, &q, n)?) {
            failures.push(format!("{spec} k={k} n={n} q={q}"));
        }
    }
    Ok(vec![case(
        "50 realizations meet length and distance bounds",
        failures.is_empty(),
        format!("longest word {max_len}; failures: {failures:?}"),
    )])
}

/// A uniformly extended random allowed word of length `t`.
pub fn random_allowed_word(rng: &mut impl Rng, spec: &ShiftSpec, t: usize) -> Result<Word> {
    let mut w = Word::empty();
    while w.len() < t {
        let options: Vec<Symbol> = (0..spec.alphabet_size() as Symbol)
            .filter(|&s| {
                let mut c = w.clone();
                c.push(s);
                spec.is_allowed(&c).unwrap_or(false)
            })
            .collect();
        if options.is_empty() {
            return Err(Error::Infeasible("allowed word cannot be extended".into()));
        }
        w.push(options[rng.random_range(0..options.len())]);
    }
    Ok(w)
}

fn lemma_frequency_word(seed: u64) -> Result<Vec<CaseResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::new();
    for i in 0..100usize {
        let spec = if i % 2 == 0 { golden() } else { full2() };
        let k = 1 + (i / 2) % 2;
        let n = rng.random_range(4..=12u64);
        let t = rng.random_range(1..=20usize);
        let q = random_target(&mut rng, &spec, k, 6)?;
        let omega = random_allowed_word(&mut rng, &spec, t)?;
        instances.push((spec, k, n, q, omega));
    }
    let results: Vec<Result<(f64, f64)>> = instances
        .par_iter()
        .map(|(spec, k, n, q, omega)| {
            let gamma = Realizer::new(spec, *k)?.realize(q, *n)?.word();
            let ell = repetition_bound(omega.len() as u64, gamma.len() as u64, *k);
            let c = append_and_certify(spec, omega, &gamma, q, *n, ell)?;
            Ok((c.distance.to_f64().unwrap_or(f64::NAN), 4.0 / *n as f64))
        })
        .collect();
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok((d, b)) => {
                passed += 1;
                worst = worst.max(d / b);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    Ok(vec![case(
        "distance at most 4/n",
        passed == 100,
        format!("{passed}/100 bound checks pass; worst distance/bound {worst:.4}; errors: {errors:?}"),
    )])
}

fn distributions() -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    let spec = golden();
    for (k, list, eps) in [
        (1usize, vec!["1,0", "1/2,1/2"], rat(1, 20)),
        (2usize, vec!["1,0,0", "0,1/2,1/2"], rat(1, 10)),
    ] {
        let plan = TargetPlan::new(targets(&spec, k, &list)?, eps.clone());
        let (word, cert) = build_checkpointed_word(&spec, &plan, &Budget::default())?;
        let size = spec.enumerate_language(k)?.len();
        let mut ok = spec.is_allowed(&word)? && cert.entries.len() == 2;
        let mut prev = 0;
        let mut details = Vec::new();
        for e in &cert.entries {
            let rule = stage_precision(prev, k, 1, size, &eps)?;
            ok &= e.distance <= eps && e.precision == rule;
            ok &= e.stage_len >= realization_length(k, e.precision, size);
            details.push(format!(
                "n_{}={} l={} distance={:.6}",
                e.stage,
                e.n,
                e.precision,
                e.distance.to_f64().unwrap_or(f64::NAN)
            ));
            prev = e.n;
        }
        out.push(case(format!("golden k={k} ε={eps}"), ok, details.join(", ")));
    }
    Ok(out)
}

/// Max minus min of each letter's frequency over `n` in `[from, len]`.
pub fn letter_oscillation(word: &[Symbol], alphabet: usize, from: usize) -> Vec<f64> {
    let mut counts = vec![0u64; alphabet];
    let mut lo = vec![f64::INFINITY; alphabet];
    let mut hi = vec![f64::NEG_INFINITY; alphabet];
    for (i, &s) in word.iter().enumerate() {
        counts[s as usize] += 1;
        let n = i + 1;
        if n >= from {
            for a in 0..alphabet {
                let f = counts[a] as f64 / n as f64;
                lo[a] = lo[a].min(f);
                hi[a] = hi[a].max(f);
            }
        }
    }
    hi.iter().zip(&lo).map(|(h, l)| h - l).collect()
}

fn letter_divergence() -> Result<Vec<CaseResult>> {
    let spec = golden();
    let spread = letter_frequency_spread(&spec)?;
    let gap = spread.min_gap();
    let plan = TargetPlan::new(targets(&spec, 1, &["1,0", "1/2,1/2"])?, rat(1, 10)).cycling();
    let budget = Budget {
        max_symbols: 1_000_000,
        ..Budget::default()
    };
    let mut stream = build_checkpointed_stream(&spec, plan, &budget)?;
    let word: Vec<Symbol> = stream.by_ref().collect();
    let first = stream
        .certificates()
        .first()
        .map(|c| c.end())
        .unwrap_or(u64::MAX);
    let osc = letter_oscillation(&word, 2, first as usize);
    Ok(vec![
        case(
            "every letter frequency varies over the spectrum",
            spread.every_letter_varies() && gap >= rat(1, 2),
            format!("minimum gap {gap}"),
        ),
        case(
            "oscillation at least 0.3 per letter",
            word.len() == 1_000_000 && osc.iter().all(|&o| o >= 0.3),
            format!("n = {}, from n = {first}: {osc:?}", word.len()),
        ),
    ])
}

/// Hits that fall inside a certified window of the same target.
pub fn certified_hits(report: &crate::freqstats::AccumulationReport, certs: &[WindowCertificate]) -> Vec<usize> {
    (0..report.targets.len())
        .map(|t| {
            report.hits[t]
                .iter()
                .filter(|h| {
                    certs.iter().any(|c| {
                        c.tuple.target_index == t && h.n > c.j && h.n <= c.window_end
                    })
                })
                .count()
        })
        .collect()
}

fn vertex_targets(spec: &ShiftSpec) -> Result<Vec<FrequencyVector>> {
    Ok(polytope_vertices(spec, 1)?.into_iter().map(|v| v.vector).collect())
}

fn property_p() -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    for spec in [full2(), golden()] {
        let ts = vertex_targets(&spec)?;
        let schedule = PropertyPSchedule::new(ts.clone(), 10, WindowRule::WindowFactor(8));
        let budget = Budget {
            max_symbols: 1_000_000,
            ..Budget::default()
        };
        let mut stream = build_property_p_stream(&spec, schedule, &budget)?;
        let word: Vec<Symbol> = stream.by_ref().collect();
        let certs = window_certificates(&stream.certificates());
        let report = detect_accumulation(
            word.iter().copied(),
            1,
            0,
            &spec,
            &ts,
            0.1,
            1_000_000,
            Evaluation::Every,
        )?;
        let hits = certified_hits(&report, &certs);
        out.push(case(
            format!("{spec}: certified visits per target"),
            hits.iter().all(|&h| h >= 2) && certs.iter().all(|c| c.sup_distance < c.epsilon),
            format!("{} windows, certified hits {hits:?}", certs.len()),
        ));
    }
    Ok(out)
}

fn cesaro_inheritance(w: u64, budget: &Budget) -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    for spec in [full2(), golden()] {
        let ts = vertex_targets(&spec)?;
        let schedule = PropertyPSchedule::new(ts, 10, WindowRule::WindowFactor(w));
        let mut stream = build_property_p_stream(&spec, schedule, budget)?;
        let word: Vec<Symbol> = stream.by_ref().collect();
        let certs = window_certificates(&stream.certificates());
        let report = cesaro_inheritance_check(word.iter().copied(), &spec, 1, &certs, 1e-9)?;
        for e in &report.entries {
            out.push(case(
                format!("{spec} stage {} window end {}", e.stage, e.n),
                e.within_bound && e.inherited,
                format!(
                    "order {} distance {:.6} bound {:.6} ε {}{}",
                    e.order,
                    e.distance,
                    e.bound,
                    e.epsilon,
                    if e.short_window { " (short window)" } else { "" }
                ),
            ));
        }
    }
    Ok(out)
}

fn parry(seed: u64) -> Result<Vec<CaseResult>> {
    let spec = golden();
    let mu = parry_measure(&spec)?;
    let beta = (1.0 + 5f64.sqrt()) / 2.0;
    let pi0 = beta * beta / (1.0 + beta * beta);
    let pi = mu.stationary();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = mu.sample_path(&mut rng, 1_000_000);
    let ones = path.iter().filter(|&&s| s == 1).count() as f64 / path.len() as f64;
    Ok(vec![
        case(
            "stationary vector",
            (pi[0] - pi0).abs() <= 1e-9 && (pi[1] - (1.0 - pi0)).abs() <= 1e-9,
            format!("({:.12}, {:.12})", pi[0], pi[1]),
        ),
        case(
            "entropy log β",
            (mu.entropy() - beta.ln()).abs() <= 1e-9,
            format!("{:.12} nats", mu.entropy()),
        ),
        case(
            "sampled frequency of 1",
            (ones - (1.0 - pi0)).abs() <= 0.01 && spec.is_allowed(&path)?,
            format!("{ones:.6}"),
        ),
    ])
}

/// Iterated averages by the defining recursion, over the fixed common
/// denominator `L = lcm(1..=|word|)`: `P^(r)(n) = X_r(n) / L^(r+1)` with
/// `X_r(n) = (L/n) Σ_{j<=n} X_{r-1}(j)`.
pub struct CesaroOracle {
    // powers[r] = L^(r+1)
    powers: Vec<BigInt>,
    // numerators[r][n-1][b]
    numerators: Vec<Vec<Vec<BigInt>>>,
}

impl CesaroOracle {
    pub fn new(word: &[Symbol], k: usize, r_max: usize, index_words: &[Word]) -> Self {
        let lcm = (1..=word.len().max(1)).fold(BigInt::one(), |acc, i| acc.lcm(&BigInt::from(i)));
        let blocks = index_words.len();
        let mut numerators = vec![Vec::with_capacity(word.len()); r_max + 1];
        let mut counts = vec![0u64; blocks];
        let mut sums = vec![vec![BigInt::zero(); blocks]; r_max + 1];
        for n in 1..=word.len() {
            if n >= k {
                let w = &word[n - k..n];
                if let Some(b) = index_words.iter().position(|x| x.as_slice() == w) {
                    counts[b] += 1;
                }
            }
            let scale = &lcm / BigInt::from(n);
            let mut row: Vec<BigInt> = counts.iter().map(|&c| BigInt::from(c) * &scale).collect();
            for r in 1..=r_max {
                for (sum, x) in sums[r].iter_mut().zip(&row) {
                    *sum += x;
                }
                numerators[r - 1].push(row);
                row = sums[r].iter().map(|u| u * &scale).collect();
            }
            numerators[r_max].push(row);
        }
        let powers = (1..=r_max + 1).map(|e| num::pow(lcm.clone(), e)).collect();
        CesaroOracle { powers, numerators }
    }

    /// Whether `value` equals `P^(r)(n)` for block `b`.
    pub fn matches(&self, r: usize, n: u64, b: usize, value: &BigRational) -> bool {
        let x = &self.numerators[r][n as usize - 1][b];
        value.numer() * &self.powers[r] == x * value.denom()
    }
}

fn matches_oracle(points: &[crate::freqstats::TrajectoryPoint<BigRational>], oracle: &CesaroOracle) -> bool {
    points.iter().all(|p| {
        p.vector
            .entries()
            .iter()
            .enumerate()
            .all(|(b, v)| oracle.matches(p.r, p.n, b, v))
    })
}

fn cesaro_exactness(seed: u64) -> Result<Vec<CaseResult>> {
    let spec = full2();
    let words = spec.enumerate_language(1)?.words().to_vec();
    let checkpoints: Vec<u64> = (1..=12).collect();
    let all_ok = (0u32..1 << 12)
        .into_par_iter()
        .map(|code| -> Result<bool> {
            let w: Vec<Symbol> = (0..12).map(|i| ((code >> (11 - i)) & 1) as Symbol).collect();
            let fast = cesaro_trajectory(w.iter().copied(), 1, 3, &spec, &checkpoints)?;
            Ok(fast.len() == 4 * 12 && matches_oracle(&fast, &CesaroOracle::new(&w, 1, 3, &words)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let long_words: Vec<Vec<Symbol>> = (0..100)
        .map(|_| (0..2000).map(|_| rng.random_range(0..2)).collect())
        .collect();
    let checkpoints_long: Vec<u64> = (1..=2000).filter(|&n| n <= 64 || n % 16 == 0 || n % 997 == 0).collect();
    let long_ok = long_words
        .par_iter()
        .map(|w| -> Result<bool> {
            let fast = cesaro_trajectory(w.iter().copied(), 1, 3, &spec, &checkpoints_long)?;
            Ok(fast.len() == 4 * checkpoints_long.len() && matches_oracle(&fast, &CesaroOracle::new(w, 1, 3, &words)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        case(
            "all binary words of length 12, orders 0..=3",
            all_ok.iter().all(|&x| x),
            format!("{} words", all_ok.len()),
        ),
        case(
            "random words of length 2000",
            long_ok.iter().all(|&x| x),
            format!("{} words, {} checkpoints each", long_ok.len(), checkpoints_long.len()),
        ),
    ])
}
