//! Finite words with prescribed block frequencies, and the frequency
//! guarantee for appending many copies of such a word.

use std::sync::Arc;

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use super::concat::{check_allowed, Joiner};
use super::pattern::Pattern;
use super::Budget;
use crate::error::{Error, Result};
use crate::freqstats::{BlockIndex, DenominatorMode, FrequencyVector};
use crate::shiftspace::{ShiftSpec, Symbol, Word};
use crate::spectrum::InvariantPolytope;

/// `⌈t (1 + γ_len / k)⌉`, the number of copies of a word of length `γ_len`
/// that suffices to wash out a prefix of length `t`.
pub fn repetition_bound(t: u64, gamma_len: u64, k: usize) -> u64 {
    let k = k as u64;
    (t * (k + gamma_len)).div_ceil(k)
}

/// Minimum length `k · n · |L_k|` of a word realizing a target at precision `n`.
pub fn realization_length(k: usize, n: u64, language_size: usize) -> u64 {
    k as u64 * n * language_size as u64
}

/// A word, kept in compact form, whose length-`k` block frequencies are
/// within `1/n` of a target.
#[derive(Clone, Debug)]
pub struct Realization {
    pattern: Arc<Pattern>,
    cycles: Vec<Word>,
    repetitions: u64,
    precision: u64,
    distance: BigRational,
}

impl Realization {
    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    /// The closed walks whose powers make up the word, one per connected
    /// piece of the target's support.
    pub fn cycles(&self) -> &[Word] {
        &self.cycles
    }

    pub fn repetitions(&self) -> u64 {
        self.repetitions
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    /// Exact `FittedWindows` distance to the target.
    pub fn distance(&self) -> &BigRational {
        &self.distance
    }

    pub fn len(&self) -> u64 {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    pub fn word(&self) -> Word {
        self.pattern.materialize()
    }
}

/// Reusable state for realizing targets on one shift at one block length.
#[derive(Debug)]
pub struct Realizer {
    joiner: Joiner,
    polytope: InvariantPolytope,
    index: Arc<BlockIndex>,
    max_len: u64,
}

impl Realizer {
    /// Requires the specification constant to be set on `spec`.
    pub fn new(spec: &ShiftSpec, k: usize) -> Result<Self> {
        let joiner = Joiner::new(spec)?;
        let polytope = InvariantPolytope::new(joiner.spec(), k)?;
        let index = Arc::new(BlockIndex::from_blocks(
            polytope.blocks().clone(),
            spec.alphabet_size(),
        )?);
        Ok(Realizer {
            joiner,
            polytope,
            index,
            max_len: Budget::default().max_symbols,
        })
    }

    /// Largest word length a realization may reach.
    pub fn with_max_len(mut self, max_len: u64) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn k(&self) -> usize {
        self.polytope.k()
    }

    pub fn spec(&self) -> &ShiftSpec {
        self.joiner.spec()
    }

    pub fn spec_constant(&self) -> usize {
        self.joiner.spec_constant()
    }

    pub fn index(&self) -> &Arc<BlockIndex> {
        &self.index
    }

    pub fn polytope(&self) -> &InvariantPolytope {
        &self.polytope
    }

    pub(crate) fn joiner(&mut self) -> &mut Joiner {
        &mut self.joiner
    }

    pub(crate) fn check_target(&self, q: &FrequencyVector) -> Result<()> {
        if q.blocks().words() != self.polytope.blocks().words() {
            return Err(Error::InvalidInput(format!(
                "target is indexed by blocks of length {}, expected the {} allowed blocks of length {}",
                q.k(),
                self.polytope.blocks().len(),
                self.k()
            )));
        }
        Ok(())
    }

    /// Builds a word of length at least `k·n·|L_k|` whose `FittedWindows`
    /// frequency vector is within `1/n` of `q` (exactly).
    ///
    /// The target is lifted to a circulation on the allowed blocks of length
    /// `max(k, memory)`, scaled to integer multiplicities, and each connected
    /// piece of its support is traced as one closed walk. The word is
    /// `c_1^s ⊙ … ⊙ c_r^s` with `s` doubled until the length and distance
    /// requirements hold.
    pub fn realize(&mut self, q: &FrequencyVector, n: u64) -> Result<Realization> {
        self.check_target(q)?;
        if n == 0 {
            return Err(Error::InvalidInput("precision n must be >= 1".into()));
        }
        let circulation = self.polytope.lift(q.entries()).ok_or_else(|| {
            Error::Infeasible(format!(
                "{q} is not the block-frequency vector of any invariant measure"
            ))
        })?;
        let multiplicities = integer_multiplicities(&circulation)?;
        let cycles = self.euler_cycles(&multiplicities);
        let k = self.k();
        let min_len = realization_length(k, n, self.index.len());
        let period: u64 = cycles.iter().map(|c| c.len() as u64).sum();
        let mut s = min_len.div_ceil(period).max(1);
        let threshold = BigRational::new(BigInt::one(), BigInt::from(n));
        loop {
            let pattern = self.power_pattern(&cycles, s)?;
            let len = pattern.len();
            if len > self.max_len {
                return Err(Error::Budget {
                    what: "realized word length",
                    limit: self.max_len,
                });
            }
            if len >= min_len {
                let counts = pattern.counts(&self.index)?;
                let distance = distance_from_counts(&counts, len, k, q.entries(), DenominatorMode::FittedWindows);
                if distance <= threshold {
                    return Ok(Realization {
                        pattern,
                        cycles,
                        repetitions: s,
                        precision: n,
                        distance,
                    });
                }
            }
            s = s.saturating_mul(2);
        }
    }

    fn power_pattern(&mut self, cycles: &[Word], s: u64) -> Result<Arc<Pattern>> {
        let ctx = self.joiner.context_len();
        let mut parts: Vec<Arc<Pattern>> = Vec::with_capacity(2 * cycles.len());
        let mut tail: Vec<Symbol> = Vec::new();
        for c in cycles {
            let piece = Pattern::repeat(Pattern::literal(c.clone()), Word::empty(), s);
            let u = self.joiner.padding(&tail, &piece.head(ctx))?;
            tail.extend_from_slice(&u);
            tail.extend(piece.tail(ctx));
            let drop = tail.len().saturating_sub(ctx);
            tail.drain(..drop);
            parts.push(Pattern::literal(u));
            parts.push(piece);
        }
        Ok(Pattern::concat(parts))
    }

    /// One closed walk per connected component of the support, traced with
    /// Hierholzer's algorithm taking out-edges in block order. Each walk is
    /// returned as the first symbols of its edges.
    fn euler_cycles(&self, mult: &[u64]) -> Vec<Word> {
        let p = &self.polytope;
        let nodes = p.nodes().len();
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (e, &m) in mult.iter().enumerate() {
            if m > 0 {
                let (a, b) = (p.edge_source(e), p.edge_target(e));
                out_edges[a].push(e);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        let edges = p.edges().words();
        let mut remaining = mult.to_vec();
        let mut next = vec![0usize; nodes];
        let mut seen_roots = Vec::new();
        let mut cycles = Vec::new();
        for e0 in 0..mult.len() {
            if mult[e0] == 0 {
                continue;
            }
            let root = find(&mut parent, p.edge_source(e0));
            if seen_roots.contains(&root) {
                continue;
            }
            seen_roots.push(root);
            let mut stack: Vec<(usize, Option<usize>)> = vec![(p.edge_source(e0), None)];
            let mut circuit = Vec::new();
            while let Some(&(v, via)) = stack.last() {
                while next[v] < out_edges[v].len() && remaining[out_edges[v][next[v]]] == 0 {
                    next[v] += 1;
                }
                if next[v] < out_edges[v].len() {
                    let e = out_edges[v][next[v]];
                    remaining[e] -= 1;
                    stack.push((p.edge_target(e), Some(e)));
                } else {
                    stack.pop();
                    if let Some(e) = via {
                        circuit.push(e);
                    }
                }
            }
            circuit.reverse();
            cycles.push(circuit.iter().map(|&e| edges[e][0]).collect());
        }
        cycles
    }
}

fn integer_multiplicities(p: &[BigRational]) -> Result<Vec<u64>> {
    let den = p.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    p.iter()
        .map(|x| {
            (x.numer() * (&den / x.denom())).to_u64().ok_or_else(|| {
                Error::InvalidInput("target denominators are too large to realize".into())
            })
        })
        .collect()
}

/// Exact l1 distance between the frequencies given by window counts of a
/// word of length `len` and the target entries.
pub(crate) fn distance_from_counts(
    counts: &[u64],
    len: u64,
    k: usize,
    q: &[BigRational],
    mode: DenominatorMode,
) -> BigRational {
    let den = match mode {
        DenominatorMode::PaperN => len,
        DenominatorMode::FittedWindows => len + 1 - k as u64,
    };
    let den = BigInt::from(den);
    counts
        .iter()
        .zip(q)
        .map(|(&c, qb)| (BigRational::new(BigInt::from(c), den.clone()) - qb).abs())
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Builds a word in `Z_n(q, k)`: length at least `k·n·|L_k|` and
/// `FittedWindows` frequency vector within `1/n` of `q`.
pub fn realize_frequency_word(spec: &ShiftSpec, q: &FrequencyVector, k: usize, n: u64) -> Result<Word> {
    if q.k() != k {
        return Err(Error::InvalidInput(format!(
            "target has block length {}, requested {k}",
            q.k()
        )));
    }
    let mut realizer = Realizer::new(spec, k)?;
    Ok(realizer.realize(q, n)?.word())
}

/// Exact check that `gamma` lies in `Z_n(q, k)`.
pub fn in_realization_class(spec: &ShiftSpec, gamma: &[Symbol], q: &FrequencyVector, n: u64) -> Result<bool> {
    let k = q.k();
    if !spec.is_allowed(gamma)? {
        return Ok(false);
    }
    let index = BlockIndex::from_blocks(q.blocks().clone(), spec.alphabet_size())?;
    if (gamma.len() as u64) < realization_length(k, n, index.len()) {
        return Ok(false);
    }
    let counts = index.count(gamma)?;
    let d = distance_from_counts(&counts, gamma.len() as u64, k, q.entries(), DenominatorMode::FittedWindows);
    Ok(d <= BigRational::new(BigInt::one(), BigInt::from(n)))
}

/// `ω ⊙ γ^{⊙ℓ}` together with its exact distance to `q`.
#[derive(Clone, Debug)]
pub struct CertifiedWord {
    pub word: Word,
    pub distance: BigRational,
    pub bound: BigRational,
}

/// Appends `ell` copies of `gamma ∈ Z_n(q, k)` to `omega` and checks that the
/// result is within `4/n` of `q`. Requires `ell` at least
/// [`repetition_bound`]`(|ω|, |γ|, k)`; a measured distance above `4/n` is
/// reported as a bound violation.
pub fn append_and_certify(
    spec: &ShiftSpec,
    omega: &Word,
    gamma: &Word,
    q: &FrequencyVector,
    n: u64,
    ell: u64,
) -> Result<CertifiedWord> {
    let k = q.k();
    let mut joiner = Joiner::new(spec)?;
    check_allowed(joiner.spec(), omega)?;
    if !in_realization_class(joiner.spec(), gamma, q, n)? {
        return Err(Error::InvalidInput(format!(
            "γ of length {} is not in Z_{n} for the target",
            gamma.len()
        )));
    }
    let needed = repetition_bound(omega.len() as u64, gamma.len() as u64, k);
    if ell < needed {
        return Err(Error::InvalidInput(format!(
            "{ell} copies given, at least {needed} are required"
        )));
    }
    let ctx = joiner.context_len();
    let g = Pattern::literal(gamma.clone());
    let first = joiner.padding(omega, gamma)?;
    let body = if gamma.len() >= ctx {
        let sep = joiner.padding(gamma, gamma)?;
        Pattern::repeat(g, sep, ell)
    } else {
        let mut acc = Word::empty();
        let mut tail = omega.clone().into_inner();
        tail.extend_from_slice(&first);
        for _ in 0..ell {
            if !acc.is_empty() {
                let u = joiner.padding(&tail, gamma)?;
                acc.extend_from_slice(&u);
                tail.extend_from_slice(&u);
            }
            acc.extend_from_slice(gamma);
            tail.extend_from_slice(gamma);
            let drop = tail.len().saturating_sub(ctx);
            tail.drain(..drop);
        }
        Pattern::literal(acc)
    };
    let whole = Pattern::concat(vec![Pattern::literal(omega.clone()), Pattern::literal(first), body]);
    let limit = Budget::default().max_symbols;
    if whole.len() > limit {
        return Err(Error::Budget {
            what: "certified word length",
            limit,
        });
    }
    let index = BlockIndex::from_blocks(q.blocks().clone(), spec.alphabet_size())?;
    let counts = whole.counts(&index)?;
    let distance = distance_from_counts(&counts, whole.len(), k, q.entries(), DenominatorMode::FittedWindows);
    let bound = BigRational::new(BigInt::from(4), BigInt::from(n));
    if distance > bound {
        return Err(Error::BoundViolation {
            context: format!("appending {ell} copies of a length-{} word", gamma.len()),
            measured: distance.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(CertifiedWord {
        word: whole.materialize(),
        distance,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> ShiftSpec {
        ShiftSpec::golden_mean().with_spec_constant(1)
    }

    fn target(spec: &ShiftSpec, k: usize, s: &str) -> FrequencyVector {
        let blocks = Arc::new(spec.enumerate_language(k).unwrap());
        FrequencyVector::parse(blocks, s).unwrap()
    }

    #[test]
    fn repetition_bounds() {
        assert_eq!(repetition_bound(10, 20, 2), 110);
        assert_eq!(repetition_bound(1, 3, 3), 2);
        assert_eq!(repetition_bound(50, 30, 3), 550);
    }

    #[test]
    fn golden_half_half() {
        let spec = golden();
        let q = target(&spec, 1, "1/2,1/2");
        let mut r = Realizer::new(&spec, 1).unwrap();
        let real = r.realize(&q, 4).unwrap();
        let w = real.word();
        assert!(w.len() >= 8);
        assert!(spec.is_allowed(&w).unwrap());
        assert!(in_realization_class(&spec, &w, &q, 4).unwrap());
        assert_eq!(real.cycles().len(), 1);
    }

    #[test]
    fn golden_mixture_and_vertex() {
        let spec = golden();
        for (s, n) in [("3/4,1/4", 10), ("1,0", 7), ("2/3,1/3", 50)] {
            let q = target(&spec, 1, s);
            let w = realize_frequency_word(&spec, &q, 1, n).unwrap();
            assert!(in_realization_class(&spec, &w, &q, n).unwrap(), "{s}");
        }
    }

    #[test]
    fn full_shift_disconnected_support() {
        // Half the time in 00, half in 11: two separate loops joined by ⊙.
        let spec = ShiftSpec::full(2).unwrap();
        let q = target(&spec, 2, "1/2,0,0,1/2");
        let mut r = Realizer::new(&spec, 2).unwrap();
        let real = r.realize(&q, 20).unwrap();
        assert_eq!(real.cycles().len(), 2);
        assert!(in_realization_class(&spec, &real.word(), &q, 20).unwrap());
    }

    #[test]
    fn infeasible_target() {
        let spec = golden();
        let q = target(&spec, 1, "1/3,2/3");
        assert!(matches!(
            realize_frequency_word(&spec, &q, 1, 5),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn certified_append() {
        let spec = ShiftSpec::full(2).unwrap();
        let q = target(&spec, 1, "1/2,1/2");
        let gamma: Word = "01010101".parse().unwrap();
        let omega: Word = "0".parse().unwrap();
        let ell = repetition_bound(1, 8, 1);
        let c = append_and_certify(&spec, &omega, &gamma, &q, 4, ell).unwrap();
        assert!(c.distance <= BigRational::one());
        assert!(append_and_certify(&spec, &omega, &gamma, &q, 4, ell - 1).is_err());
    }
}
