//! β-expansions: greedy digits, the quasi-greedy expansion of 1, Parry
//! admissibility, finite-type approximations, and the maps between digit
//! words and points of `[0, 1]`.
//!
//! All digit generation runs in exact arithmetic over `Q(√d)`, which covers
//! integer, rational and quadratic bases. Decisions are therefore never made
//! on rounded values; the only precision failure is running past the bit
//! budget for the exact representation.

mod quadratic;

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational, ToPrimitive};

pub use quadratic::{parse_rational, QuadraticNumber};
pub(crate) use quadratic::prime_power_base;

use crate::error::{Error, Result};
use crate::shiftspace::{check_symbols, ShiftSpec, Symbol, Word};

/// Default comparison depth for admissibility checks.
pub const DEFAULT_DEPTH: usize = 64;

/// Default cap on the bit length of exact intermediate values.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 14;

#[derive(Clone)]
pub struct BetaSystem {
    beta: QuadraticNumber,
    beta_f64: f64,
    dstar: Vec<Symbol>,
    depth: usize,
    bit_budget: u64,
    label: String,
}

impl BetaSystem {
    /// Builds a system for an exact `β > 1` with comparison depth `depth`.
    pub fn new(beta: QuadraticNumber, depth: usize, label: impl Into<String>) -> Result<Self> {
        Self::with_bit_budget(beta, depth, label, DEFAULT_BIT_BUDGET)
    }

    pub fn with_bit_budget(
        beta: QuadraticNumber,
        depth: usize,
        label: impl Into<String>,
        bit_budget: u64,
    ) -> Result<Self> {
        if beta.cmp_exact(&QuadraticNumber::integer(1))? != Ordering::Greater {
            return Err(Error::InvalidInput(format!("beta must exceed 1, got {beta}")));
        }
        if depth == 0 {
            return Err(Error::InvalidInput("comparison depth must be >= 1".into()));
        }
        if beta.floor() > BigInt::from(Symbol::MAX) {
            return Err(Error::InvalidInput(format!("beta {beta} needs more than 256 digits")));
        }
        let mut sys = BetaSystem {
            beta_f64: beta.to_f64(),
            beta,
            dstar: Vec::new(),
            depth,
            bit_budget,
            label: label.into(),
        };
        sys.dstar = sys.compute_quasi_greedy(depth)?;
        if !is_self_admissible(&sys.dstar) {
            return Err(Error::Precision(format!(
                "computed d*(1) for {} is not self-admissible",
                sys.label
            )));
        }
        Ok(sys)
    }

    /// The golden mean `(1+√5)/2`.
    pub fn golden() -> Self {
        Self::new(QuadraticNumber::golden(), DEFAULT_DEPTH, "golden").expect("golden mean system")
    }

    pub fn integer(n: u32) -> Result<Self> {
        Self::new(QuadraticNumber::integer(n as i64), DEFAULT_DEPTH, n.to_string())
    }

    pub fn rational(beta: BigRational) -> Result<Self> {
        let label = beta.to_string();
        Self::new(QuadraticNumber::rational(beta), DEFAULT_DEPTH, label)
    }

    /// Uses the exact binary value of `beta`.
    pub fn from_f64(beta: f64) -> Result<Self> {
        Self::new(QuadraticNumber::from_f64(beta)?, DEFAULT_DEPTH, beta.to_string())
    }

    /// Parses `golden`, an integer, `p/q`, or a decimal literal, optionally
    /// followed by `@D` for the comparison depth.
    pub fn parse(s: &str) -> Result<Self> {
        let (value, depth) = match s.split_once('@') {
            Some((v, d)) => (
                v.trim(),
                d.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad depth in {s:?}")))?,
            ),
            None => (s.trim(), DEFAULT_DEPTH),
        };
        let beta = if value.eq_ignore_ascii_case("golden") {
            QuadraticNumber::golden()
        } else {
            QuadraticNumber::rational(parse_rational(value)?)
        };
        Self::new(beta, depth, value)
    }

    /// Same system with a different comparison depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        Self::with_bit_budget(self.beta.clone(), depth, self.label.clone(), self.bit_budget)
    }

    pub fn beta(&self) -> &QuadraticNumber {
        &self.beta
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta_f64
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `⌈β⌉`: digits run over `0..⌈β⌉`.
    pub fn alphabet_size(&self) -> usize {
        let f = self.beta.floor().to_usize().expect("checked at construction");
        if self.beta.is_rational() && BigRational::from_integer(f.into()) == *self.beta.rational_part()
        {
            f
        } else {
            f + 1
        }
    }

    /// `d*_β(1)` truncated to the comparison depth.
    pub fn dstar(&self) -> &[Symbol] {
        &self.dstar
    }

    fn check_bits(&self, x: &QuadraticNumber) -> Result<()> {
        if x.bits() > self.bit_budget {
            return Err(Error::Precision(format!(
                "exact representation exceeds {} bits",
                self.bit_budget
            )));
        }
        Ok(())
    }

    /// One step of `x ↦ βx mod 1`: returns the digit and the new point.
    fn step(&self, x: &QuadraticNumber) -> Result<(Symbol, QuadraticNumber)> {
        let y = self.beta.mul(x)?;
        let d = y.floor();
        let next = y.sub(&QuadraticNumber::rational(BigRational::from_integer(d.clone())))?;
        self.check_bits(&next)?;
        let d = d
            .to_u8()
            .ok_or_else(|| Error::Precision("digit out of range".into()))?;
        Ok((d, next))
    }

    /// First `n` greedy digits of `x ∈ [0, 1)`.
    pub fn greedy_expansion(&self, x: &QuadraticNumber, n: usize) -> Result<Word> {
        if x.signum() == Ordering::Less
            || x.cmp_exact(&QuadraticNumber::integer(1))? != Ordering::Less
        {
            return Err(Error::InvalidInput(format!("x = {x} is outside [0, 1)")));
        }
        let mut digits = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            let (d, next) = self.step(&cur)?;
            digits.push(d);
            cur = next;
        }
        Ok(Word::new(digits))
    }

    /// Greedy expansion of the exact binary value of `x`.
    pub fn greedy_expansion_f64(&self, x: f64, n: usize) -> Result<Word> {
        self.greedy_expansion(&QuadraticNumber::from_f64(x)?, n)
    }

    /// First `n` digits of the quasi-greedy expansion `d*_β(1)`.
    pub fn quasi_greedy_of_one(&self, n: usize) -> Result<Word> {
        if n <= self.dstar.len() {
            return Ok(Word::from(&self.dstar[..n]));
        }
        self.compute_quasi_greedy(n).map(Word::new)
    }

    fn compute_quasi_greedy(&self, n: usize) -> Result<Vec<Symbol>> {
        // Greedy expansion of 1 itself: the first step uses β·1 directly.
        let mut digits = Vec::with_capacity(n);
        let mut cur = QuadraticNumber::integer(1);
        while digits.len() < n {
            let (d, next) = self.step(&cur)?;
            digits.push(d);
            if next.is_zero() {
                // Terminating expansion d_1..d_m: switch to (d_1..d_{m-1}(d_m - 1))^∞.
                let last = digits.len() - 1;
                digits[last] -= 1;
                let period = digits.clone();
                while digits.len() < n {
                    let i = digits.len() % period.len();
                    digits.push(period[i]);
                }
                break;
            }
            cur = next;
        }
        digits.truncate(n);
        Ok(digits)
    }

    /// Every suffix of `w` is lexicographically `<= d*_β(1)`, comparing to
    /// depth `min(|suffix|, D)`. Symbols outside the alphabet are rejected.
    pub fn parry_admissible(&self, w: &[Symbol]) -> bool {
        if check_symbols(w, self.alphabet_size()).is_err() {
            return false;
        }
        (0..w.len()).all(|start| {
            let s = &w[start..];
            let len = s.len().min(self.depth);
            s[..len] <= self.dstar[..len]
        })
    }

    /// Finite-type approximation at depth `D`: the minimal words of length
    /// `<= D` rejected by Parry admissibility become forbidden words.
    pub fn sft_approximation(&self, depth: usize) -> ShiftSpec {
        let sys = if depth == self.depth {
            self.clone()
        } else {
            self.with_depth(depth.max(1)).expect("depth change keeps a valid system")
        };
        let n = sys.alphabet_size();
        let mut forbidden = Vec::new();
        // Every violation starts with d*_1..d*_{i-1} c for some c > d*_i.
        for i in 0..sys.depth.min(sys.dstar.len()) {
            for c in (sys.dstar[i] as usize + 1)..n {
                let mut w = sys.dstar[..i].to_vec();
                w.push(c as Symbol);
                if sys.parry_admissible(&w[1..]) {
                    forbidden.push(Word::new(w));
                }
            }
        }
        ShiftSpec::forbidden_words(n, forbidden).expect("forbidden words are in range")
    }

    /// Longest run of zeros in `d*_β(1)` up to the comparison depth. The
    /// β-shift has the specification property iff these runs stay bounded.
    pub fn max_zero_run(&self) -> usize {
        self.dstar
            .split(|&d| d != 0)
            .map(|run| run.len())
            .max()
            .unwrap_or(0)
    }

    /// Exact `Σ d_h β^{-h}`.
    pub fn value_exact(&self, w: &[Symbol]) -> Result<QuadraticNumber> {
        let inv = self.beta.recip().expect("beta > 1");
        let mut acc = QuadraticNumber::integer(0);
        // Horner from the last digit: acc = (d_h + acc) / β.
        for &d in w.iter().rev() {
            acc = acc.add_integer(d as i64).mul(&inv)?;
            self.check_bits(&acc)?;
        }
        Ok(acc)
    }

    /// `Σ d_h β^{-h}` as a float together with the tail bound `β^{-|w|}`.
    pub fn symbolic_to_point(&self, w: &[Symbol]) -> Result<(f64, f64)> {
        check_symbols(w, self.alphabet_size())?;
        let value = match self.value_exact(w) {
            Ok(v) => v.to_f64(),
            // Past the exact budget the float sum is still accurate to rounding.
            Err(Error::Precision(_)) => w
                .iter()
                .rev()
                .fold(0.0, |acc, &d| (acc + d as f64) / self.beta_f64),
            Err(e) => return Err(e),
        };
        Ok((value, self.beta_f64.powi(-(w.len().min(i32::MAX as usize) as i32))))
    }

    /// Closure of the set of points whose greedy expansion starts with `w`.
    pub fn cylinder_interval(&self, w: &[Symbol]) -> Result<CylinderInterval> {
        if !self.parry_admissible(w) {
            check_symbols(w, self.alphabet_size())?;
            return Err(Error::InvalidInput(format!(
                "{} is not admissible for beta = {}",
                Word::from(w),
                self.label
            )));
        }
        let lower = self.value_exact(w)?;
        // After reading w the remaining orbit point ranges over [0, T^i(1)),
        // where i is the length of the current run along d*_β(1).
        let i = self.automaton_state(w);
        let mut tail = QuadraticNumber::integer(1).sub(&self.value_exact(&self.dstar[..i])?)?;
        let mut scale = QuadraticNumber::integer(1);
        let inv = self.beta.recip().expect("beta > 1");
        for _ in 0..i {
            tail = tail.mul(&self.beta)?;
        }
        for _ in 0..w.len() {
            scale = scale.mul(&inv)?;
        }
        let upper = lower.add(&tail.mul(&scale)?)?;
        self.check_bits(&upper)?;
        Ok(CylinderInterval {
            lower: lower.to_f64(),
            upper: upper.to_f64(),
            lower_exact: lower,
            upper_exact: upper,
            digits: Word::from(w),
        })
    }

    /// State of the standard β-shift automaton after reading admissible `w`:
    /// the number of leading digits of `d*_β(1)` matched by the current run.
    /// A run that matches the whole stored prefix stays at the depth.
    fn automaton_state(&self, w: &[Symbol]) -> usize {
        let mut state = 0usize;
        for &a in w {
            state = match self.dstar.get(state) {
                Some(&d) if a == d => state + 1,
                None => state,
                _ => 0,
            };
        }
        state
    }
}

fn is_self_admissible(dstar: &[Symbol]) -> bool {
    (1..dstar.len()).all(|s| dstar[s..] <= dstar[..dstar.len() - s])
}

impl fmt::Debug for BetaSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BetaSystem")
            .field("beta", &self.beta)
            .field("depth", &self.depth)
            .field("dstar", &Word::from(self.dstar.as_slice()))
            .finish()
    }
}

/// Closed interval `[lower, upper]` of points whose expansion starts with `digits`.
#[derive(Clone, Debug)]
pub struct CylinderInterval {
    pub lower: f64,
    pub upper: f64,
    pub digits: Word,
    lower_exact: QuadraticNumber,
    upper_exact: QuadraticNumber,
}

impl CylinderInterval {
    pub fn lower_exact(&self) -> &QuadraticNumber {
        &self.lower_exact
    }

    pub fn upper_exact(&self) -> &QuadraticNumber {
        &self.upper_exact
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Exact containment of `other` in `self`.
    pub fn contains(&self, other: &CylinderInterval) -> bool {
        let lo = other.lower_exact.cmp_exact(&self.lower_exact);
        let hi = other.upper_exact.cmp_exact(&self.upper_exact);
        matches!(lo, Ok(Ordering::Greater | Ordering::Equal))
            && matches!(hi, Ok(Ordering::Less | Ordering::Equal))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn golden_greedy_examples() {
        let sys = BetaSystem::golden();
        let inv = sys.beta().recip().unwrap();
        assert_eq!(sys.greedy_expansion(&inv, 5).unwrap(), w("10000"));
        let inv2 = inv.mul(&inv).unwrap();
        assert_eq!(sys.greedy_expansion(&inv2, 5).unwrap(), w("01000"));
    }

    #[test]
    fn binary_greedy() {
        let sys = BetaSystem::integer(2).unwrap();
        assert_eq!(sys.greedy_expansion(&QuadraticNumber::ratio(3, 4), 4).unwrap(), w("1100"));
        assert!(matches!(
            sys.greedy_expansion(&QuadraticNumber::integer(1), 4),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn quasi_greedy_examples() {
        assert_eq!(BetaSystem::golden().quasi_greedy_of_one(6).unwrap(), w("101010"));
        assert_eq!(BetaSystem::integer(2).unwrap().quasi_greedy_of_one(4).unwrap(), w("1111"));
        assert_eq!(BetaSystem::integer(3).unwrap().quasi_greedy_of_one(4).unwrap(), w("2222"));
        // Past the stored depth the periodic rule still applies.
        let long = BetaSystem::golden().quasi_greedy_of_one(100).unwrap();
        assert!(long.chunks(2).all(|c| c == [1, 0]));
    }

    #[test]
    fn rational_base_quasi_greedy_is_greedy() {
        // β = 3/2: 1 = 1·(2/3) + ... the expansion of 1 never terminates.
        let sys = BetaSystem::rational(BigRational::new(3.into(), 2.into())).unwrap();
        assert_eq!(sys.alphabet_size(), 2);
        let d = sys.quasi_greedy_of_one(8).unwrap();
        assert_eq!(d[0], 1);
        assert!(is_self_admissible(&d));
    }

    #[test]
    fn admissibility_examples() {
        let golden = BetaSystem::golden();
        assert!(!golden.parry_admissible(&w("11")));
        assert!(golden.parry_admissible(&w("1010")));
        assert!(golden.parry_admissible(&Word::empty()));
        let two = BetaSystem::integer(2).unwrap();
        assert!(two.parry_admissible(&w("111011")));
        assert!(!two.parry_admissible(&w("2")));
    }

    #[test]
    fn sft_approximations() {
        let golden = BetaSystem::golden();
        for depth in [2, 5, 64] {
            assert_eq!(golden.sft_approximation(depth).describe(), "sft:2:11");
        }
        assert_eq!(BetaSystem::integer(2).unwrap().sft_approximation(7).describe(), "full:2");
    }

    #[test]
    fn points_and_cylinders() {
        let golden = BetaSystem::golden();
        let (x, err) = golden.symbolic_to_point(&w("10000")).unwrap();
        assert!((x - 0.618_033_988_749_895).abs() < 1e-15);
        assert!(err < 0.1);
        let (y, _) = golden.symbolic_to_point(&w("01000")).unwrap();
        assert!((y - 0.381_966_011_250_105).abs() < 1e-15);

        let c = golden.cylinder_interval(&w("1")).unwrap();
        assert!((c.lower - 0.618_033_988_749_895).abs() < 1e-15);
        assert_eq!(c.upper_exact(), &QuadraticNumber::integer(1));
        let c0 = BetaSystem::integer(2).unwrap().cylinder_interval(&w("0")).unwrap();
        assert_eq!((c0.lower, c0.upper), (0.0, 0.5));
        let e = golden.cylinder_interval(&[]).unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 1.0));
        assert!(golden.cylinder_interval(&w("11")).is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(BetaSystem::parse("golden").unwrap().alphabet_size(), 2);
        assert_eq!(BetaSystem::parse("3").unwrap().alphabet_size(), 3);
        let s = BetaSystem::parse("1.8@12").unwrap();
        assert_eq!(s.depth(), 12);
        assert_eq!(s.alphabet_size(), 2);
        assert!(BetaSystem::parse("1").is_err());
        assert!(BetaSystem::parse("0.5").is_err());
    }
}
