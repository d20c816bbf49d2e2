//! Single-pass accumulators for the iterated Cesàro averages
//! `P^(r)(n) = (1/n) Σ_{j<=n} P^(r-1)(j)` of block frequencies, with
//! `P^(0)(n)` the `PaperN` frequency vector of the first `n` symbols.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};

use super::{BlockIndex, RollingWindow, DenominatorMode, FrequencyVector, Scalar};
use crate::beta::prime_power_base;
use crate::error::{Error, Result};
use crate::shiftspace::{LanguageSlice, ShiftSpec, Symbol};

/// A streaming accumulator for `P^(0..=R)`.
pub trait CesaroAccumulator {
    type Value: Scalar;

    fn push(&mut self, s: Symbol) -> Result<()>;

    /// Symbols consumed so far.
    fn consumed(&self) -> u64;

    fn max_order(&self) -> usize;

    fn blocks(&self) -> &Arc<LanguageSlice>;

    /// `P^(r)` at the current length; all zeros before the first symbol.
    fn vector(&self, r: usize) -> FrequencyVector<Self::Value>;
}

/// Exact accumulator.
///
/// With `D = lcm(1..=n)` every running sum `S_r(n) = Σ_{j<=n} P^(r-1)(j)` has
/// the form `M_r / D^r` for an integer `M_r`, so the state is one integer per
/// block and order. When `n` is a prime power `p^e`, `D` gains a factor `p`
/// and each `M_r` is rescaled by `p^r`.
#[derive(Clone, Debug)]
pub struct ExactCesaroTower {
    index: Arc<BlockIndex>,
    window: RollingWindow,
    max_order: usize,
    n: u64,
    lcm: BigInt,
    counts: Vec<u64>,
    // numerators[r - 1][b] = M_r for block b.
    numerators: Vec<Vec<BigInt>>,
    reduce: bool,
}

impl ExactCesaroTower {
    pub fn new(spec: &ShiftSpec, k: usize, max_order: usize) -> Result<Self> {
        Ok(Self::with_index(Arc::new(BlockIndex::new(spec, k)?), max_order))
    }

    pub fn with_index(index: Arc<BlockIndex>, max_order: usize) -> Self {
        let len = index.len();
        ExactCesaroTower {
            index,
            window: RollingWindow::new(),
            max_order,
            n: 0,
            lcm: BigInt::one(),
            counts: vec![0; len],
            numerators: vec![vec![BigInt::zero(); len]; max_order],
            reduce: true,
        }
    }

    /// Skip gcd reduction in [`CesaroAccumulator::vector`]. Values stay exact
    /// and compare by value; reducing thousands-of-bits fractions at every
    /// checkpoint otherwise dominates the run time.
    pub fn unreduced(mut self) -> Self {
        self.reduce = false;
        self
    }

    /// `P^(r)` for block index `b` as an unreduced numerator/denominator pair.
    pub fn raw_value(&self, r: usize, b: usize) -> (BigInt, BigInt) {
        let n = BigInt::from(self.n.max(1));
        if r == 0 {
            return (BigInt::from(self.counts[b]), n);
        }
        let den = n * num::pow(self.lcm.clone(), r);
        (self.numerators[r - 1][b].clone(), den)
    }
}

impl CesaroAccumulator for ExactCesaroTower {
    type Value = BigRational;

    fn push(&mut self, s: Symbol) -> Result<()> {
        if let Some(b) = self.window.push(&self.index, s)? {
            self.counts[b] += 1;
        }
        self.n += 1;
        if let Some(p) = prime_power_base(self.n) {
            self.lcm *= p;
            let mut factor = BigInt::one();
            for layer in self.numerators.iter_mut() {
                factor *= p;
                for m in layer.iter_mut() {
                    if !m.is_zero() {
                        *m *= &factor;
                    }
                }
            }
        }
        if self.max_order == 0 {
            return Ok(());
        }
        // M_r += M_{r-1} · D/n, lowest order first so M_{r-1} is already at step n.
        let scale = &self.lcm / BigInt::from(self.n);
        for b in 0..self.counts.len() {
            let mut below = BigInt::from(self.counts[b]);
            for layer in self.numerators.iter_mut() {
                if !below.is_zero() {
                    layer[b] += &below * &scale;
                }
                below = layer[b].clone();
            }
        }
        Ok(())
    }

    fn consumed(&self) -> u64 {
        self.n
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn blocks(&self) -> &Arc<LanguageSlice> {
        self.index.blocks()
    }

    fn vector(&self, r: usize) -> FrequencyVector<BigRational> {
        assert!(r <= self.max_order, "order {r} exceeds the tower's {}", self.max_order);
        let entries = (0..self.counts.len())
            .map(|b| {
                if self.n == 0 {
                    return <BigRational as Zero>::zero();
                }
                let (num, den) = self.raw_value(r, b);
                if self.reduce {
                    BigRational::new(num, den)
                } else {
                    BigRational::new_raw(num, den)
                }
            })
            .collect();
        FrequencyVector::new_unchecked(self.blocks().clone(), entries, DenominatorMode::PaperN)
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Floating-point accumulator for long streams. Running sums use compensated
/// summation; the absolute error stays around `1e-9` per `1e8` symbols.
#[derive(Clone, Debug)]
pub struct FloatCesaroTower {
    index: Arc<BlockIndex>,
    window: RollingWindow,
    max_order: usize,
    n: u64,
    counts: Vec<u64>,
    sums: Vec<Vec<CompensatedSum>>,
    // Current P^(r) values, refreshed on every push.
    values: Vec<Vec<f64>>,
}

impl FloatCesaroTower {
    pub fn new(spec: &ShiftSpec, k: usize, max_order: usize) -> Result<Self> {
        Ok(Self::with_index(Arc::new(BlockIndex::new(spec, k)?), max_order))
    }

    pub fn with_index(index: Arc<BlockIndex>, max_order: usize) -> Self {
        let len = index.len();
        FloatCesaroTower {
            index,
            window: RollingWindow::new(),
            max_order,
            n: 0,
            counts: vec![0; len],
            sums: vec![vec![CompensatedSum::default(); len]; max_order],
            values: vec![vec![0.0; len]; max_order + 1],
        }
    }

    /// `P^(r)` for block index `b` at the current length.
    pub fn value(&self, r: usize, b: usize) -> f64 {
        self.values[r][b]
    }

    /// `P^(r)` entries at the current length.
    pub fn values(&self, r: usize) -> &[f64] {
        &self.values[r]
    }
}

impl CesaroAccumulator for FloatCesaroTower {
    type Value = f64;

    fn push(&mut self, s: Symbol) -> Result<()> {
        if let Some(b) = self.window.push(&self.index, s)? {
            self.counts[b] += 1;
        }
        self.n += 1;
        let n = self.n as f64;
        for b in 0..self.counts.len() {
            self.values[0][b] = self.counts[b] as f64 / n;
            for r in 1..=self.max_order {
                let below = self.values[r - 1][b];
                let sum = &mut self.sums[r - 1][b];
                sum.add(below);
                self.values[r][b] = sum.total() / n;
            }
        }
        Ok(())
    }

    fn consumed(&self) -> u64 {
        self.n
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn blocks(&self) -> &Arc<LanguageSlice> {
        self.index.blocks()
    }

    fn vector(&self, r: usize) -> FrequencyVector<f64> {
        FrequencyVector::new_unchecked(
            self.blocks().clone(),
            self.values[r].clone(),
            DenominatorMode::PaperN,
        )
    }
}

/// `P^(r)` at checkpoint `n`.
#[derive(Clone, Debug)]
pub struct TrajectoryPoint<T: Scalar> {
    pub n: u64,
    pub r: usize,
    pub vector: FrequencyVector<T>,
}

/// A trajectory that stopped early, with the points computed before the failure.
#[derive(Debug)]
pub struct TrajectoryError<T: Scalar> {
    pub error: Error,
    pub partial: Vec<TrajectoryPoint<T>>,
}

impl<T: Scalar> fmt::Display for TrajectoryError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} points computed)", self.error, self.partial.len())
    }
}

impl<T: Scalar> std::error::Error for TrajectoryError<T> {}

impl<T: Scalar> From<TrajectoryError<T>> for Error {
    fn from(e: TrajectoryError<T>) -> Error {
        e.error
    }
}

/// Feeds `stream` into `acc`, recording every order at each checkpoint.
pub fn run_trajectory<A: CesaroAccumulator>(
    acc: &mut A,
    stream: impl IntoIterator<Item = Symbol>,
    checkpoints: &[u64],
) -> Result<Vec<TrajectoryPoint<A::Value>>, TrajectoryError<A::Value>> {
    let mut out = Vec::new();
    let fail = |error, out| Err(TrajectoryError { error, partial: out });
    if let Some(bad) = checkpoints.windows(2).find(|w| w[0] >= w[1]) {
        return fail(
            Error::InvalidInput(format!("checkpoints must increase strictly ({} then {})", bad[0], bad[1])),
            out,
        );
    }
    if checkpoints.first() == Some(&0) {
        return fail(Error::InvalidInput("checkpoints start at n = 1".into()), out);
    }
    let mut stream = stream.into_iter();
    for &target in checkpoints {
        while acc.consumed() < target {
            match stream.next() {
                Some(s) => {
                    if let Err(e) = acc.push(s) {
                        return fail(e, out);
                    }
                }
                None => {
                    let available = acc.consumed();
                    return fail(
                        Error::Truncated {
                            available,
                            requested: target,
                        },
                        out,
                    );
                }
            }
        }
        for r in 0..=acc.max_order() {
            out.push(TrajectoryPoint {
                n: target,
                r,
                vector: acc.vector(r),
            });
        }
    }
    Ok(out)
}

/// Exact iterated Cesàro averages of `stream` at each checkpoint, for orders
/// `0..=max_order`. Entries are exact but not reduced to lowest terms.
pub fn cesaro_trajectory(
    stream: impl IntoIterator<Item = Symbol>,
    k: usize,
    max_order: usize,
    spec: &ShiftSpec,
    checkpoints: &[u64],
) -> Result<Vec<TrajectoryPoint<BigRational>>, TrajectoryError<BigRational>> {
    let mut tower = ExactCesaroTower::new(spec, k, max_order)
        .map_err(|error| TrajectoryError {
            error,
            partial: Vec::new(),
        })?
        .unreduced();
    run_trajectory(&mut tower, stream, checkpoints)
}

/// Floating-point variant of [`cesaro_trajectory`] for long streams.
pub fn cesaro_trajectory_f64(
    stream: impl IntoIterator<Item = Symbol>,
    k: usize,
    max_order: usize,
    spec: &ShiftSpec,
    checkpoints: &[u64],
) -> Result<Vec<TrajectoryPoint<f64>>, TrajectoryError<f64>> {
    let mut tower = FloatCesaroTower::new(spec, k, max_order).map_err(|error| TrajectoryError {
        error,
        partial: Vec::new(),
    })?;
    run_trajectory(&mut tower, stream, checkpoints)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn alternating(n: usize) -> Vec<Symbol> {
        (0..n).map(|i| (i % 2) as Symbol).collect()
    }

    #[test]
    fn first_order_example() {
        let full = ShiftSpec::full(2).unwrap();
        let points = cesaro_trajectory(alternating(4), 1, 1, &full, &[4]).unwrap();
        let p1 = points.iter().find(|p| p.r == 1).unwrap();
        assert_eq!(p1.vector.entries()[0], r(2, 3));
        // Matches the float tower.
        let f = cesaro_trajectory_f64(alternating(4), 1, 1, &full, &[4]).unwrap();
        assert!((f[1].vector.entries()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_stream_is_fixed() {
        let full = ShiftSpec::full(2).unwrap();
        let points = cesaro_trajectory(vec![0; 30], 1, 3, &full, &[1, 7, 30]).unwrap();
        for p in points {
            assert_eq!(p.vector.entries()[0], r(1, 1), "n = {}, r = {}", p.n, p.r);
        }
    }

    #[test]
    fn second_order_converges_on_alternating() {
        let full = ShiftSpec::full(2).unwrap();
        let points = cesaro_trajectory_f64(alternating(10_000), 1, 2, &full, &[10_000]).unwrap();
        assert!((points[2].vector.entries()[0] - 0.5).abs() < 1e-2);
    }

    #[test]
    fn truncation_keeps_partial_results() {
        let full = ShiftSpec::full(2).unwrap();
        let err = cesaro_trajectory(alternating(5), 1, 1, &full, &[2, 4, 8]).unwrap_err();
        assert_eq!(err.partial.len(), 4);
        assert_eq!(
            err.error,
            Error::Truncated {
                available: 5,
                requested: 8
            }
        );
        assert!(cesaro_trajectory(alternating(5), 1, 1, &full, &[3, 3]).is_err());
    }

    #[test]
    fn blocks_longer_than_prefix_count_as_zero() {
        let golden = ShiftSpec::golden_mean();
        let points = cesaro_trajectory(vec![0, 1, 0], 2, 1, &golden, &[1, 3]).unwrap();
        assert!(points[0].vector.entries().iter().all(|e| e.is_zero()));
        // n = 3: windows 01, 10 → P^(0) = (0, 1/3, 1/3).
        assert_eq!(points[2].vector.entries(), &[r(0, 1), r(1, 3), r(1, 3)]);
    }
}
