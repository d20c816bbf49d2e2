//! Alphabets, words, language oracles and the padding machinery behind the
//! specification property.
//!
//! A [`ShiftSpec`] describes a one-sided shift space through its language:
//! the full shift, a subshift of finite type given by forbidden words, or a
//! β-shift (Parry admissibility against the quasi-greedy expansion of 1).
//! All operations here are pure; specs are immutable once built.

mod word;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

pub use word::{Symbol, Word};
pub(crate) use word::check_symbols;

use crate::beta::BetaSystem;
use crate::error::{Error, Result};

/// Default cap on the number of candidate words `N^k` an enumeration may touch.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 22;

#[derive(Clone, Debug)]
pub enum ShiftKind {
    Full,
    /// Subshift of finite type: a word is allowed iff none of these occurs as a factor.
    ForbiddenWords(Vec<Word>),
    /// β-shift, truncated to the system's comparison depth.
    Beta(Arc<BetaSystem>),
}

#[derive(Clone, Debug)]
pub struct ShiftSpec {
    alphabet_size: usize,
    kind: ShiftKind,
    spec_constant: Option<usize>,
    enumeration_cap: u128,
}

impl ShiftSpec {
    /// Full shift over `alphabet_size` letters. Its specification constant is 0.
    pub fn full(alphabet_size: usize) -> Result<Self> {
        check_alphabet_size(alphabet_size)?;
        Ok(ShiftSpec {
            alphabet_size,
            kind: ShiftKind::Full,
            spec_constant: Some(0),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn forbidden_words(alphabet_size: usize, forbidden: Vec<Word>) -> Result<Self> {
        check_alphabet_size(alphabet_size)?;
        let mut forbidden = forbidden;
        for w in &forbidden {
            if w.is_empty() {
                return Err(Error::InvalidInput("forbidden words must be nonempty".into()));
            }
            w.check_alphabet(alphabet_size)?;
        }
        forbidden.sort();
        forbidden.dedup();
        if forbidden.is_empty() {
            return Self::full(alphabet_size);
        }
        Ok(ShiftSpec {
            alphabet_size,
            kind: ShiftKind::ForbiddenWords(forbidden),
            spec_constant: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// The golden-mean shift: binary words without `11`.
    pub fn golden_mean() -> Self {
        Self::forbidden_words(2, vec![Word::new(vec![1, 1])]).expect("valid golden-mean spec")
    }

    pub fn beta(system: BetaSystem) -> Self {
        ShiftSpec {
            alphabet_size: system.alphabet_size(),
            kind: ShiftKind::Beta(Arc::new(system)),
            spec_constant: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn spec_constant(&self) -> Option<usize> {
        self.spec_constant
    }

    pub fn enumeration_cap(&self) -> u128 {
        self.enumeration_cap
    }

    pub fn with_enumeration_cap(mut self, cap: u128) -> Self {
        self.enumeration_cap = cap;
        self
    }

    /// Sets the specification constant without checking it.
    pub fn with_spec_constant(mut self, j: usize) -> Self {
        self.spec_constant = Some(j);
        self
    }

    /// Computes the specification constant by exhaustive probing (see
    /// [`ShiftSpec::specification_constant`]) and records it.
    pub fn with_computed_spec_constant(mut self, probe_len: usize, j_max: usize) -> Result<Self> {
        let j = self.specification_constant(probe_len, j_max)?;
        self.spec_constant = Some(j);
        Ok(self)
    }

    /// Number of symbols on each side of a junction that can influence
    /// admissibility of `a·u·b` once `a` and `b` are known to be allowed.
    pub fn context_len(&self) -> usize {
        match &self.kind {
            ShiftKind::Full => 0,
            ShiftKind::ForbiddenWords(f) => f.iter().map(|w| w.len()).max().unwrap_or(1) - 1,
            ShiftKind::Beta(sys) => sys.depth(),
        }
    }

    /// Returns the equivalent forbidden-word description, converting a β-shift
    /// through its SFT approximation at the system depth.
    pub fn to_finite_type(&self) -> ShiftSpec {
        match &self.kind {
            ShiftKind::Beta(sys) => {
                let mut sft = sys.sft_approximation(sys.depth());
                sft.spec_constant = self.spec_constant;
                sft.enumeration_cap = self.enumeration_cap;
                sft
            }
            _ => self.clone(),
        }
    }

    /// Length of the longest forbidden word of the finite-type description (1
    /// for the full shift). Blocks of this length determine admissibility.
    pub fn memory(&self) -> usize {
        match &self.to_finite_type().kind {
            ShiftKind::ForbiddenWords(f) => f.iter().map(|w| w.len()).max().unwrap_or(1),
            _ => 1,
        }
    }

    /// Membership of `w` in the language of the shift.
    pub fn is_allowed(&self, w: &[Symbol]) -> Result<bool> {
        check_symbols(w, self.alphabet_size)?;
        Ok(self.is_allowed_unchecked(w))
    }

    pub(crate) fn is_allowed_unchecked(&self, w: &[Symbol]) -> bool {
        match &self.kind {
            ShiftKind::Full => true,
            ShiftKind::ForbiddenWords(forbidden) => !forbidden
                .iter()
                .any(|f| f.len() <= w.len() && w.windows(f.len()).any(|win| win == f.as_slice())),
            ShiftKind::Beta(sys) => sys.parry_admissible(w),
        }
    }

    /// Whether `w` has a forbidden factor ending at its last symbol. Assumes
    /// `w[..len-1]` is allowed.
    fn last_symbol_ok(&self, w: &[Symbol]) -> bool {
        match &self.kind {
            ShiftKind::Full => true,
            ShiftKind::ForbiddenWords(forbidden) => {
                !forbidden.iter().any(|f| w.ends_with(f.as_slice()))
            }
            ShiftKind::Beta(sys) => sys.parry_admissible(w),
        }
    }

    /// All allowed words of length `k` in lexicographic order.
    pub fn enumerate_language(&self, k: usize) -> Result<LanguageSlice> {
        if k == 0 {
            return Err(Error::InvalidInput("block length k must be >= 1".into()));
        }
        self.check_enumeration(k)?;
        Ok(LanguageSlice::new_unchecked(k, self.enumerate_unchecked(k)))
    }

    /// Like [`enumerate_language`](Self::enumerate_language) but also accepts
    /// `k = 0`, giving `[ε]`.
    pub(crate) fn language_with_empty(&self, k: usize) -> Result<LanguageSlice> {
        if k == 0 {
            return Ok(LanguageSlice::new_unchecked(0, vec![Word::empty()]));
        }
        self.enumerate_language(k)
    }

    fn check_enumeration(&self, k: usize) -> Result<()> {
        let requested = (self.alphabet_size as u128)
            .checked_pow(k as u32)
            .unwrap_or(u128::MAX);
        if requested > self.enumeration_cap {
            return Err(Error::EnumerationCap {
                requested,
                cap: self.enumeration_cap,
            });
        }
        Ok(())
    }

    fn enumerate_unchecked(&self, k: usize) -> Vec<Word> {
        // Depth-first extension of allowed prefixes; factor closure makes the pruning exact.
        let mut out = Vec::new();
        let mut prefix: Vec<Symbol> = Vec::with_capacity(k);
        self.extend_prefix(&mut prefix, k, &mut out);
        out
    }

    fn extend_prefix(&self, prefix: &mut Vec<Symbol>, k: usize, out: &mut Vec<Word>) {
        if prefix.len() == k {
            out.push(Word::from(prefix.as_slice()));
            return;
        }
        for s in 0..self.alphabet_size as Symbol {
            prefix.push(s);
            if self.last_symbol_ok(prefix) {
                self.extend_prefix(prefix, k, out);
            }
            prefix.pop();
        }
    }

    /// Shortest, then lexicographically least, `u` with `|u| <= j_max` such
    /// that `a·u·b` is allowed.
    pub fn find_padding(&self, a: &[Symbol], b: &[Symbol], j_max: usize) -> Result<Word> {
        for w in [a, b] {
            if !self.is_allowed(w)? {
                return Err(Error::InvalidInput(format!(
                    "padding endpoint {} is not allowed",
                    Word::from(w)
                )));
            }
        }
        self.find_padding_unchecked(a, b, j_max)
    }

    /// Padding search that trusts `a` and `b` to be allowed and only inspects
    /// the junction context.
    pub(crate) fn find_padding_unchecked(
        &self,
        a: &[Symbol],
        b: &[Symbol],
        j_max: usize,
    ) -> Result<Word> {
        if a.is_empty() || b.is_empty() || matches!(self.kind, ShiftKind::Full) {
            return Ok(Word::empty());
        }
        let ctx = self.context_len();
        let a_tail = &a[a.len().saturating_sub(ctx)..];
        let b_head = &b[..b.len().min(ctx)];
        let mut candidate = Vec::with_capacity(a_tail.len() + j_max + b_head.len());
        for len in 0..=j_max {
            let mut u = vec![0 as Symbol; len];
            loop {
                candidate.clear();
                candidate.extend_from_slice(a_tail);
                candidate.extend_from_slice(&u);
                candidate.extend_from_slice(b_head);
                if self.is_allowed_unchecked(&candidate) {
                    return Ok(Word::new(u));
                }
                if !increment(&mut u, self.alphabet_size) {
                    break;
                }
            }
        }
        Err(Error::NotConnectable {
            left: Word::from(a_tail).to_string(),
            right: Word::from(b_head).to_string(),
            j_max,
        })
    }

    /// Smallest `j <= j_max` such that every pair of allowed words of length
    /// `1..=probe_len` can be joined with a padding of length at most `j`.
    pub fn specification_constant(&self, probe_len: usize, j_max: usize) -> Result<usize> {
        if matches!(self.kind, ShiftKind::Full) || probe_len == 0 {
            return Ok(0);
        }
        let ctx = self.context_len();
        let mut heads: HashSet<Vec<Symbol>> = HashSet::new();
        let mut tails: HashSet<Vec<Symbol>> = HashSet::new();
        for len in 1..=probe_len {
            for w in self.enumerate_language(len)?.words() {
                heads.insert(w[..w.len().min(ctx)].to_vec());
                tails.insert(w[w.len().saturating_sub(ctx)..].to_vec());
            }
        }
        let mut heads: Vec<_> = heads.into_iter().collect();
        let mut tails: Vec<_> = tails.into_iter().collect();
        heads.sort();
        tails.sort();
        let mut cache: HashMap<(&[Symbol], &[Symbol]), usize> = HashMap::new();
        let mut worst = 0;
        for a in &tails {
            for b in &heads {
                let len = match cache.get(&(a.as_slice(), b.as_slice())) {
                    Some(&l) => l,
                    None => {
                        let l = self.find_padding_unchecked(a, b, j_max)?.len();
                        cache.insert((a.as_slice(), b.as_slice()), l);
                        l
                    }
                };
                worst = worst.max(len);
            }
        }
        Ok(worst)
    }

    /// Compact textual description, e.g. `full:2`, `sft:2:11`, `beta:golden@64`.
    pub fn describe(&self) -> String {
        match &self.kind {
            ShiftKind::Full => format!("full:{}", self.alphabet_size),
            ShiftKind::ForbiddenWords(f) => {
                let words: Vec<String> = f.iter().map(word_token).collect();
                format!("sft:{}:{}", self.alphabet_size, words.join(","))
            }
            ShiftKind::Beta(sys) => format!("beta:{}@{}", sys.label(), sys.depth()),
        }
    }
}

impl std::str::FromStr for ShiftSpec {
    type Err = Error;

    /// Parses the forms produced by [`ShiftSpec::describe`] plus the aliases
    /// `golden` and `beta:<β>[@D]` (see [`BetaSystem::parse`]). Forbidden
    /// words are digit strings, or `.`-separated integers for large alphabets.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("golden") {
            return Ok(Self::golden_mean());
        }
        let bad = || Error::InvalidInput(format!("unrecognized shift description {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let size = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        match kind {
            "full" => Self::full(size(rest)?),
            "sft" => {
                let (n, words) = rest.split_once(':').ok_or_else(bad)?;
                let words = words
                    .split(',')
                    .filter(|w| !w.trim().is_empty())
                    .map(parse_word_token)
                    .collect::<Result<Vec<_>>>()?;
                Self::forbidden_words(size(n)?, words)
            }
            "beta" => Ok(Self::beta(BetaSystem::parse(rest)?)),
            _ => Err(bad()),
        }
    }
}

fn parse_word_token(t: &str) -> Result<Word> {
    let t = t.trim();
    if t.contains('.') {
        t.split('.')
            .map(|p| {
                p.parse::<Symbol>()
                    .map_err(|_| Error::InvalidInput(format!("bad symbol {p:?} in {t:?}")))
            })
            .collect()
    } else {
        t.parse()
    }
}

fn word_token(w: &Word) -> String {
    if w.iter().all(|&s| s < 10) {
        w.to_string()
    } else {
        let parts: Vec<String> = w.iter().map(|s| s.to_string()).collect();
        parts.join(".")
    }
}

impl fmt::Display for ShiftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn check_alphabet_size(n: usize) -> Result<()> {
    if n == 0 || n > Symbol::MAX as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "alphabet size must be in 1..=256, got {n}"
        )));
    }
    Ok(())
}

/// Odometer increment in base `radix`; false on wrap-around.
pub(crate) fn increment(digits: &mut [Symbol], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        if (*d as usize) + 1 < radix {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

/// The allowed words of one length, sorted and without duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSlice {
    k: usize,
    words: Vec<Word>,
}

impl LanguageSlice {
    pub(crate) fn new_unchecked(k: usize, words: Vec<Word>) -> Self {
        debug_assert!(words.windows(2).all(|p| p[0] < p[1]));
        LanguageSlice { k, words }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, block: &[Symbol]) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_slice().cmp(block)).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.words.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn words(slice: &LanguageSlice) -> Vec<String> {
        slice.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn allowed_examples() {
        let full = ShiftSpec::full(2).unwrap();
        assert!(full.is_allowed(&w("0110")).unwrap());
        let golden = ShiftSpec::golden_mean();
        assert!(!golden.is_allowed(&w("11")).unwrap());
        assert!(golden.is_allowed(&w("0101001")).unwrap());
        assert!(golden.is_allowed(&Word::empty()).unwrap());
    }

    #[test]
    fn out_of_range_symbol_is_input_error() {
        let golden = ShiftSpec::golden_mean();
        assert!(matches!(
            golden.is_allowed(&w("012")),
            Err(Error::SymbolOutOfRange { symbol: 2, .. })
        ));
    }

    #[test]
    fn enumerate_examples() {
        let full = ShiftSpec::full(2).unwrap();
        assert_eq!(words(&full.enumerate_language(2).unwrap()), ["00", "01", "10", "11"]);
        let golden = ShiftSpec::golden_mean();
        assert_eq!(
            words(&golden.enumerate_language(3).unwrap()),
            ["000", "001", "010", "100", "101"]
        );
        assert_eq!(words(&golden.enumerate_language(1).unwrap()), ["0", "1"]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let spec = ShiftSpec::full(4).unwrap().with_enumeration_cap(1000);
        assert!(spec.enumerate_language(4).is_ok());
        assert_eq!(
            spec.enumerate_language(5).unwrap_err(),
            Error::EnumerationCap {
                requested: 1024,
                cap: 1000
            }
        );
        assert!(spec.enumerate_language(0).is_err());
    }

    #[test]
    fn padding_examples() {
        let full = ShiftSpec::full(2).unwrap();
        assert_eq!(full.find_padding(&w("1"), &w("1"), 0).unwrap(), Word::empty());
        let golden = ShiftSpec::golden_mean();
        assert_eq!(golden.find_padding(&w("1"), &w("1"), 2).unwrap(), w("0"));
        assert_eq!(golden.find_padding(&w("0"), &w("1"), 2).unwrap(), Word::empty());
        assert!(matches!(
            golden.find_padding(&w("1"), &w("1"), 0),
            Err(Error::NotConnectable { .. })
        ));
        assert!(golden.find_padding(&w("11"), &w("1"), 2).is_err());
    }

    #[test]
    fn padding_is_shortest_then_least() {
        // Forbid 00, 010 and 11 over {0,1,2}: joining 1 and 1 needs one symbol; 0 and 2 both
        // work for length 1, the least is chosen.
        let spec =
            ShiftSpec::forbidden_words(3, vec![w("00"), w("11"), w("010")]).unwrap();
        assert_eq!(spec.find_padding(&w("1"), &w("1"), 3).unwrap(), w("0"));
        assert_eq!(spec.find_padding(&w("0"), &w("0"), 3).unwrap(), w("2"));
    }

    #[test]
    fn specification_constants() {
        assert_eq!(ShiftSpec::full(3).unwrap().specification_constant(4, 4).unwrap(), 0);
        assert_eq!(ShiftSpec::golden_mean().specification_constant(4, 4).unwrap(), 1);
        // The alternating shift (00 and 11 forbidden) can always be joined with one symbol.
        let alternating = ShiftSpec::forbidden_words(2, vec![w("00"), w("11")]).unwrap();
        assert_eq!(alternating.specification_constant(4, 4).unwrap(), 1);
        // 0 can never be followed by 1: not connectable.
        let absorbing = ShiftSpec::forbidden_words(2, vec![w("01")]).unwrap();
        assert!(matches!(
            absorbing.specification_constant(3, 3),
            Err(Error::NotConnectable { .. })
        ));
    }

    #[test]
    fn describe_round_trips_through_display() {
        assert_eq!(ShiftSpec::golden_mean().describe(), "sft:2:11");
        assert_eq!(ShiftSpec::full(3).unwrap().to_string(), "full:3");
        for d in ["full:3", "sft:2:11", "sft:3:02,11", "sft:12:10.11", "beta:golden@64", "beta:3/2@20"] {
            assert_eq!(d.parse::<ShiftSpec>().unwrap().describe(), d);
        }
        assert_eq!("golden".parse::<ShiftSpec>().unwrap().describe(), "sft:2:11");
        assert!("sft:2".parse::<ShiftSpec>().is_err());
        assert!("circle:2".parse::<ShiftSpec>().is_err());
    }
}
