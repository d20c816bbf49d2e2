//! Block counting, frequency vectors, iterated Cesàro averages and empirical
//! accumulation reports.
//!
//! Frequencies come in two flavours (see [`DenominatorMode`]): trajectories
//! divide by the prefix length `n`, while probability vectors of finite words
//! divide by the number of length-`k` windows.

mod accumulation;
mod tower;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};

pub use accumulation::{detect_accumulation, AccumulationReport, Evaluation, Hit, Visit};
pub use tower::{
    cesaro_trajectory, cesaro_trajectory_f64, run_trajectory, CesaroAccumulator,
    ExactCesaroTower, FloatCesaroTower, TrajectoryError, TrajectoryPoint,
};

use crate::error::{Error, Result};
use crate::shiftspace::{check_symbols, LanguageSlice, ShiftSpec, Symbol, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DenominatorMode {
    /// Divide occurrence counts by the prefix length `n`; entries sum to `(n-k+1)/n`.
    PaperN,
    /// Divide by the number of windows `n-k+1`; entries sum to 1.
    FittedWindows,
}

impl DenominatorMode {
    fn denominator(self, n: usize, k: usize) -> usize {
        match self {
            DenominatorMode::PaperN => n,
            DenominatorMode::FittedWindows => n + 1 - k,
        }
    }
}

/// Numeric entry type of a [`FrequencyVector`].
pub trait Scalar: Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn ratio(num: u64, den: u64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn abs_diff(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn abs_diff(&self, other: &Self) -> Self {
        (self - other).abs()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn abs_diff(&self, other: &Self) -> Self {
        (self - other).abs()
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// A vector indexed by the allowed blocks `L_k`.
#[derive(Clone, Debug)]
pub struct FrequencyVector<T: Scalar = BigRational> {
    blocks: Arc<LanguageSlice>,
    entries: Vec<T>,
    mode: DenominatorMode,
}

impl<T: Scalar> FrequencyVector<T> {
    pub fn new(blocks: Arc<LanguageSlice>, entries: Vec<T>, mode: DenominatorMode) -> Result<Self> {
        if entries.len() != blocks.len() {
            return Err(Error::InvalidInput(format!(
                "{} entries for {} blocks",
                entries.len(),
                blocks.len()
            )));
        }
        if entries.iter().any(|e| *e < T::zero()) {
            return Err(Error::InvalidInput("frequency entries must be >= 0".into()));
        }
        Ok(FrequencyVector {
            blocks,
            entries,
            mode,
        })
    }

    pub(crate) fn new_unchecked(
        blocks: Arc<LanguageSlice>,
        entries: Vec<T>,
        mode: DenominatorMode,
    ) -> Self {
        debug_assert_eq!(entries.len(), blocks.len());
        FrequencyVector {
            blocks,
            entries,
            mode,
        }
    }

    pub fn k(&self) -> usize {
        self.blocks.k()
    }

    pub fn blocks(&self) -> &Arc<LanguageSlice> {
        &self.blocks
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn mode(&self) -> DenominatorMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, block: &[Symbol]) -> Option<&T> {
        self.blocks.index_of(block).map(|i| &self.entries[i])
    }

    pub fn sum(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, e| acc.plus(e))
    }

    pub fn to_f64(&self) -> FrequencyVector<f64> {
        FrequencyVector {
            blocks: self.blocks.clone(),
            entries: self.entries.iter().map(Scalar::to_f64).collect(),
            mode: self.mode,
        }
    }

    pub fn with_mode(mut self, mode: DenominatorMode) -> Self {
        self.mode = mode;
        self
    }

    /// Pairs of block and entry in block order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &T)> {
        self.blocks.iter().zip(&self.entries)
    }
}

impl FrequencyVector<BigRational> {
    /// A probability vector over `blocks` (`FittedWindows` mode).
    pub fn probability(blocks: Arc<LanguageSlice>, entries: Vec<BigRational>) -> Result<Self> {
        Self::new(blocks, entries, DenominatorMode::FittedWindows)
    }

    /// Parses comma separated entries such as `1/2,1/2` or `0.75, 0.25`.
    pub fn parse(blocks: Arc<LanguageSlice>, s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(crate::beta::parse_rational)
            .collect::<Result<Vec<_>>>()?;
        Self::probability(blocks, entries)
    }
}

impl<T: Scalar> fmt::Display for FrequencyVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

fn same_index(p: &LanguageSlice, q: &LanguageSlice) -> bool {
    std::ptr::eq(p, q) || p == q
}

/// `Σ_b |p_b − q_b|`.
pub fn l1_distance<T: Scalar>(p: &FrequencyVector<T>, q: &FrequencyVector<T>) -> Result<T> {
    if !same_index(&p.blocks, &q.blocks) {
        return Err(Error::InvalidInput(format!(
            "frequency vectors are indexed by different block sets (k = {} and k = {})",
            p.k(),
            q.k()
        )));
    }
    Ok(p
        .entries
        .iter()
        .zip(&q.entries)
        .fold(T::zero(), |acc, (a, b)| acc.plus(&a.abs_diff(b))))
}

/// Float distance between a float vector and an exact one with the same index.
pub fn l1_distance_mixed(p: &FrequencyVector<f64>, q: &FrequencyVector) -> Result<f64> {
    if !same_index(&p.blocks, &q.blocks) {
        return Err(Error::InvalidInput("frequency vectors are indexed differently".into()));
    }
    Ok(p
        .entries
        .iter()
        .zip(&q.entries)
        .map(|(a, b)| (a - Scalar::to_f64(b)).abs())
        .sum())
}

/// Occurrences of `b` at offsets `0..=|prefix|-|b|`, over the mode's denominator.
pub fn block_frequency(prefix: &[Symbol], b: &[Symbol], mode: DenominatorMode) -> Result<BigRational> {
    let k = b.len();
    if k == 0 {
        return Err(Error::InvalidInput("block must be nonempty".into()));
    }
    if k > prefix.len() {
        return Err(Error::InvalidInput(format!(
            "block length {k} exceeds prefix length {}",
            prefix.len()
        )));
    }
    let count = prefix.windows(k).filter(|w| *w == b).count();
    Ok(BigRational::ratio(count as u64, mode.denominator(prefix.len(), k) as u64))
}

/// Block-frequency vector of an allowed `prefix` over `L_k` of `spec`.
pub fn frequency_vector(
    prefix: &[Symbol],
    k: usize,
    spec: &ShiftSpec,
    mode: DenominatorMode,
) -> Result<FrequencyVector> {
    if k == 0 || k > prefix.len() {
        return Err(Error::InvalidInput(format!(
            "block length {k} must be in 1..={}",
            prefix.len()
        )));
    }
    if !spec.is_allowed(prefix)? {
        return Err(Error::InvalidInput(format!(
            "prefix {:?} is not allowed in {spec}",
            Word::from(prefix)
        )));
    }
    let index = BlockIndex::new(spec, k)?;
    frequency_vector_in(&index, prefix, mode)
}

/// Like [`frequency_vector`] with a prebuilt index; does not re-check the
/// prefix beyond its length-`k` windows.
pub fn frequency_vector_in(
    index: &BlockIndex,
    prefix: &[Symbol],
    mode: DenominatorMode,
) -> Result<FrequencyVector> {
    let k = index.k();
    if k > prefix.len() {
        return Err(Error::InvalidInput(format!(
            "block length {k} exceeds prefix length {}",
            prefix.len()
        )));
    }
    let counts = index.count(prefix)?;
    let den = mode.denominator(prefix.len(), k) as u64;
    let entries = counts.iter().map(|&c| BigRational::ratio(c, den)).collect();
    Ok(FrequencyVector::new_unchecked(index.blocks().clone(), entries, mode))
}

/// Lookup from length-`k` windows to their position in `L_k`.
#[derive(Clone, Debug)]
pub struct BlockIndex {
    blocks: Arc<LanguageSlice>,
    alphabet_size: usize,
    lookup: Lookup,
}

#[derive(Clone, Debug)]
enum Lookup {
    Table(Vec<u32>),
    Map(HashMap<u64, u32>),
}

const TABLE_LIMIT: u128 = 1 << 20;
const ABSENT: u32 = u32::MAX;

impl BlockIndex {
    pub fn new(spec: &ShiftSpec, k: usize) -> Result<Self> {
        let blocks = Arc::new(spec.enumerate_language(k)?);
        Self::from_blocks(blocks, spec.alphabet_size())
    }

    pub fn from_blocks(blocks: Arc<LanguageSlice>, alphabet_size: usize) -> Result<Self> {
        let k = blocks.k();
        if k == 0 {
            return Err(Error::InvalidInput("block length k must be >= 1".into()));
        }
        let space = (alphabet_size as u128).checked_pow(k as u32);
        if space.is_none_or(|s| s > u64::MAX as u128) {
            return Err(Error::DimensionCap {
                dimension: k,
                cap: (64.0 / (alphabet_size as f64).log2()).floor() as usize,
            });
        }
        let code = |w: &Word| w.iter().fold(0u64, |c, &s| c * alphabet_size as u64 + s as u64);
        let lookup = match space {
            Some(s) if s <= TABLE_LIMIT => {
                let mut table = vec![ABSENT; s as usize];
                for (i, w) in blocks.iter().enumerate() {
                    table[code(w) as usize] = i as u32;
                }
                Lookup::Table(table)
            }
            _ => Lookup::Map(
                blocks
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (code(w), i as u32))
                    .collect(),
            ),
        };
        Ok(BlockIndex {
            blocks,
            alphabet_size,
            lookup,
        })
    }

    pub fn k(&self) -> usize {
        self.blocks.k()
    }

    pub fn blocks(&self) -> &Arc<LanguageSlice> {
        &self.blocks
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn lookup_code(&self, code: u64) -> Option<usize> {
        let i = match &self.lookup {
            Lookup::Table(t) => t[code as usize],
            Lookup::Map(m) => *m.get(&code)?,
        };
        (i != ABSENT).then_some(i as usize)
    }

    /// Window counts of `word`; fails if a window is not in `L_k`.
    pub fn count(&self, word: &[Symbol]) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.len()];
        let mut window = RollingWindow::new();
        for &s in word {
            if let Some(i) = window.push(self, s)? {
                counts[i] += 1;
            }
        }
        Ok(counts)
    }
}

/// Rolling window over a symbol stream reporting the index of each complete
/// length-`k` window.
#[derive(Clone, Copy, Debug, Default)]
pub struct RollingWindow {
    code: u64,
    filled: usize,
}

impl RollingWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, index: &BlockIndex, s: Symbol) -> Result<Option<usize>> {
        let n = index.alphabet_size as u64;
        let k = index.k();
        check_symbols(&[s], index.alphabet_size)?;
        if self.filled == k {
            // Drop the oldest symbol.
            self.code %= n.pow(k as u32 - 1);
        }
        self.code = self.code * n + s as u64;
        self.filled = (self.filled + 1).min(k);
        if self.filled < k {
            return Ok(None);
        }
        match index.lookup_code(self.code) {
            Some(i) => Ok(Some(i)),
            None => Err(Error::InvalidInput(format!(
                "window {} is not an allowed block",
                Word::new(decode(self.code, n, k))
            ))),
        }
    }
}

fn decode(mut code: u64, n: u64, k: usize) -> Vec<Symbol> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = (code % n) as Symbol;
        code /= n;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn block_frequency_examples() {
        let p = w("010101");
        assert_eq!(block_frequency(&p, &w("01"), DenominatorMode::FittedWindows).unwrap(), r(3, 5));
        assert_eq!(block_frequency(&p, &w("01"), DenominatorMode::PaperN).unwrap(), r(3, 6));
        assert!(block_frequency(&w("0000"), &w("1"), DenominatorMode::PaperN).unwrap().is_zero());
        assert!(block_frequency(&w("01"), &w("010"), DenominatorMode::PaperN).is_err());
    }

    #[test]
    fn frequency_vector_examples() {
        let full = ShiftSpec::full(2).unwrap();
        let golden = ShiftSpec::golden_mean();
        let fw = DenominatorMode::FittedWindows;
        let v = frequency_vector(&w("0101"), 1, &full, fw).unwrap();
        assert_eq!(v.entries(), &[r(1, 2), r(1, 2)]);
        let v = frequency_vector(&w("000"), 1, &golden, fw).unwrap();
        assert_eq!(v.entries(), &[r(1, 1), r(0, 1)]);
        let v = frequency_vector(&w("0101"), 2, &golden, fw).unwrap();
        assert_eq!(v.entries(), &[r(0, 1), r(2, 3), r(1, 3)]);
        assert!(frequency_vector(&w("0110"), 1, &golden, fw).is_err());
        let v = frequency_vector(&w("0101"), 2, &golden, DenominatorMode::PaperN).unwrap();
        assert_eq!(v.sum(), r(3, 4));
    }

    #[test]
    fn l1_examples() {
        let golden = ShiftSpec::golden_mean();
        let b1 = Arc::new(golden.enumerate_language(1).unwrap());
        let b2 = Arc::new(golden.enumerate_language(2).unwrap());
        let p = FrequencyVector::probability(b1.clone(), vec![r(1, 1), r(0, 1)]).unwrap();
        let q = FrequencyVector::probability(b1, vec![r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(l1_distance(&p, &q).unwrap(), r(1, 1));
        assert!(l1_distance(&p, &p).unwrap().is_zero());
        let a = FrequencyVector::probability(b2.clone(), vec![r(0, 1), r(2, 3), r(1, 3)]).unwrap();
        let b = FrequencyVector::parse(b2, "1/3,1/3,1/3").unwrap();
        assert_eq!(l1_distance(&a, &b).unwrap(), r(2, 3));
        assert!(l1_distance(&p, &a).is_err());
    }

    #[test]
    fn counter_rejects_disallowed_windows() {
        let golden = ShiftSpec::golden_mean();
        let index = BlockIndex::new(&golden, 2).unwrap();
        assert!(index.count(&w("0110")).is_err());
        assert_eq!(index.count(&w("01001")).unwrap(), vec![1, 2, 1]);
    }
}
