use std::collections::BTreeMap;
use std::sync::Arc;

use num::integer::gcd;
use num::{BigRational, One, Signed, Zero};

use super::lp::feasible_point;
use crate::error::{Error, Result};
use crate::freqstats::{DenominatorMode, FrequencyVector};
use crate::shiftspace::{LanguageSlice, ShiftSpec, Symbol, Word};

/// Largest `|L_k|` accepted by vertex enumeration.
pub const VERTEX_DIMENSION_CAP: usize = 12;

/// Largest number of simple cycles enumerated before giving up.
pub const CYCLE_CAP: usize = 1 << 16;

/// Largest number of candidate compositions scanned for rational targets.
pub const TARGET_CANDIDATE_CAP: u128 = 1 << 20;

/// Shift-invariant probability vectors on `L_k`.
///
/// Membership is decided at the lift level `K = max(k, memory)`, where every
/// path in the graph with nodes `L_{K-1}` and edges `L_K` spells an allowed
/// word: a vector on `L_k` belongs to the polytope iff it is the `k`-prefix
/// marginal of a normalized nonnegative circulation on that graph.
#[derive(Clone, Debug)]
pub struct InvariantPolytope {
    k: usize,
    lift: usize,
    blocks: Arc<LanguageSlice>,
    edges: Arc<LanguageSlice>,
    nodes: Arc<LanguageSlice>,
    // Per edge: source node, target node, index of its k-prefix in `blocks`.
    source: Vec<usize>,
    target: Vec<usize>,
    marginal: Vec<usize>,
}

/// One linear equation `Σ coeff · p_w = rhs` over the lifted blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(Word, i64)>,
    pub rhs: BigRational,
    pub label: String,
}

/// A vertex with a simple cycle realizing it.
#[derive(Clone, Debug)]
pub struct Vertex {
    pub vector: FrequencyVector,
    pub cycle: Word,
}

#[derive(Clone, Debug)]
pub struct RationalTargetEnumeration {
    pub denominator_bound: u64,
    pub targets: Vec<FrequencyVector>,
}

/// Range of each letter's frequency over the polytope for `k = 1`.
#[derive(Clone, Debug)]
pub struct LetterSpread {
    pub ranges: Vec<(BigRational, BigRational)>,
    /// For each letter, the indices into `vertices` attaining its min and max.
    pub witnesses: Vec<(usize, usize)>,
    pub vertices: Vec<Vertex>,
}

impl LetterSpread {
    /// Every letter takes two different frequencies on the polytope.
    pub fn every_letter_varies(&self) -> bool {
        self.ranges.iter().all(|(lo, hi)| lo < hi)
    }

    /// Smallest per-letter gap `max − min`.
    pub fn min_gap(&self) -> BigRational {
        self.ranges
            .iter()
            .map(|(lo, hi)| hi - lo)
            .min()
            .unwrap_or_else(BigRational::zero)
    }
}

/// The invariant polytope of `spec` on `L_k`. β-shifts use their finite-type
/// approximation at the system depth.
pub fn invariant_polytope(spec: &ShiftSpec, k: usize) -> Result<InvariantPolytope> {
    InvariantPolytope::new(spec, k)
}

impl InvariantPolytope {
    pub fn new(spec: &ShiftSpec, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("block length k must be >= 1".into()));
        }
        let sft = spec.to_finite_type();
        let lift = k.max(sft.memory());
        let blocks = Arc::new(sft.enumerate_language(k)?);
        let edges = if lift == k {
            blocks.clone()
        } else {
            Arc::new(sft.enumerate_language(lift)?)
        };
        let nodes = Arc::new(sft.language_with_empty(lift - 1)?);
        let lookup = |slice: &LanguageSlice, w: &[Symbol]| {
            slice.index_of(w).expect("factors of allowed words are allowed")
        };
        let mut source = Vec::with_capacity(edges.len());
        let mut target = Vec::with_capacity(edges.len());
        let mut marginal = Vec::with_capacity(edges.len());
        for w in edges.iter() {
            source.push(lookup(&nodes, &w[..lift - 1]));
            target.push(lookup(&nodes, &w[1..]));
            marginal.push(lookup(&blocks, &w[..k]));
        }
        Ok(InvariantPolytope {
            k,
            lift,
            blocks,
            edges,
            nodes,
            source,
            target,
            marginal,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The block length `K` at which constraints are written.
    pub fn lift_level(&self) -> usize {
        self.lift
    }

    pub fn blocks(&self) -> &Arc<LanguageSlice> {
        &self.blocks
    }

    /// `L_K`, the edges of the transition graph.
    pub fn edges(&self) -> &Arc<LanguageSlice> {
        &self.edges
    }

    /// `L_{K-1}`, the nodes of the transition graph.
    pub fn nodes(&self) -> &Arc<LanguageSlice> {
        &self.nodes
    }

    pub fn edge_source(&self, e: usize) -> usize {
        self.source[e]
    }

    pub fn edge_target(&self, e: usize) -> usize {
        self.target[e]
    }

    /// Normalization and flow balance on the lifted blocks.
    pub fn constraints(&self) -> Vec<LinearConstraint> {
        let mut out = vec![LinearConstraint {
            terms: self.edges.iter().map(|w| (w.clone(), 1)).collect(),
            rhs: BigRational::one(),
            label: "normalization".into(),
        }];
        for (v, node) in self.nodes.iter().enumerate() {
            let mut coeff: BTreeMap<usize, i64> = BTreeMap::new();
            for e in 0..self.edges.len() {
                if self.source[e] == v {
                    *coeff.entry(e).or_default() += 1;
                }
                if self.target[e] == v {
                    *coeff.entry(e).or_default() -= 1;
                }
            }
            let terms: Vec<(Word, i64)> = coeff
                .into_iter()
                .filter(|&(_, c)| c != 0)
                .map(|(e, c)| (self.edges.words()[e].clone(), c))
                .collect();
            if !terms.is_empty() {
                out.push(LinearConstraint {
                    terms,
                    rhs: BigRational::zero(),
                    label: format!("balance at {node}"),
                });
            }
        }
        out
    }

    fn check_index(&self, q: &FrequencyVector) -> Result<()> {
        if q.blocks().as_ref() != self.blocks.as_ref() {
            return Err(Error::InvalidInput(format!(
                "vector {q} is not indexed by L_{} of this shift",
                self.k
            )));
        }
        Ok(())
    }

    /// Exact membership of `q`.
    pub fn contains(&self, q: &FrequencyVector) -> Result<bool> {
        self.check_index(q)?;
        Ok(self.lift(q.entries()).is_some())
    }

    /// A circulation on `L_K` whose `k`-marginal is `q`, if `q` is in the polytope.
    pub fn lift(&self, q: &[BigRational]) -> Option<Vec<BigRational>> {
        if q.len() != self.blocks.len() || q.iter().any(|x| x.is_negative()) {
            return None;
        }
        if q.iter().fold(BigRational::zero(), |acc, x| acc + x) != BigRational::one() {
            return None;
        }
        if self.lift == self.k {
            return self.is_balanced(q).then(|| q.to_vec());
        }
        let cols = self.edges.len();
        let mut a = Vec::with_capacity(self.nodes.len() + self.blocks.len());
        let mut b = Vec::with_capacity(a.capacity());
        for v in 0..self.nodes.len() {
            let mut row = vec![BigRational::zero(); cols];
            for e in 0..cols {
                if self.source[e] == v {
                    row[e] += BigRational::one();
                }
                if self.target[e] == v {
                    row[e] -= BigRational::one();
                }
            }
            a.push(row);
            b.push(BigRational::zero());
        }
        for (u, qu) in q.iter().enumerate() {
            let row = (0..cols)
                .map(|e| {
                    if self.marginal[e] == u {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            a.push(row);
            b.push(qu.clone());
        }
        feasible_point(&a, &b)
    }

    /// Flow balance of a vector indexed by the edges.
    pub fn is_balanced(&self, p: &[BigRational]) -> bool {
        let mut net = vec![BigRational::zero(); self.nodes.len()];
        for (e, x) in p.iter().enumerate() {
            net[self.source[e]] += x;
            net[self.target[e]] -= x;
        }
        net.iter().all(Zero::is_zero)
    }

    /// All simple cycles of the transition graph as cycle words (the first
    /// symbol of each edge, in order), each starting at its least node.
    pub fn simple_cycles(&self) -> Result<Vec<Word>> {
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for e in 0..self.edges.len() {
            out_edges[self.source[e]].push(e);
        }
        let mut cycles = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut path_edges = Vec::new();
        for start in 0..self.nodes.len() {
            self.cycles_from(start, start, &out_edges, &mut on_path, &mut path_edges, &mut cycles)?;
        }
        Ok(cycles)
    }

    fn cycles_from(
        &self,
        start: usize,
        v: usize,
        out_edges: &[Vec<usize>],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        cycles: &mut Vec<Word>,
    ) -> Result<()> {
        on_path[v] = true;
        for &e in &out_edges[v] {
            let t = self.target[e];
            if t == start {
                path.push(e);
                let word = path.iter().map(|&e| self.edges.words()[e][0]).collect();
                cycles.push(word);
                path.pop();
                if cycles.len() > CYCLE_CAP {
                    return Err(Error::Budget {
                        what: "simple cycle",
                        limit: CYCLE_CAP as u64,
                    });
                }
            } else if t > start && !on_path[t] {
                path.push(e);
                self.cycles_from(start, t, out_edges, on_path, path, cycles)?;
                path.pop();
            }
        }
        on_path[v] = false;
        Ok(())
    }

    /// Cyclic `k`-block frequencies of the periodic word `c^∞`.
    pub fn cycle_vector(&self, cycle: &[Symbol]) -> Result<FrequencyVector> {
        let len = cycle.len();
        if len == 0 {
            return Err(Error::InvalidInput("cycle word must be nonempty".into()));
        }
        let mut counts = vec![0u64; self.blocks.len()];
        let mut window = vec![0; self.k];
        for i in 0..len {
            for (j, slot) in window.iter_mut().enumerate() {
                *slot = cycle[(i + j) % len];
            }
            let idx = self.blocks.index_of(&window).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{} is not a cycle of the shift",
                    Word::from(cycle)
                ))
            })?;
            counts[idx] += 1;
        }
        let entries = counts
            .iter()
            .map(|&c| BigRational::new(c.into(), (len as u64).into()))
            .collect();
        FrequencyVector::new(self.blocks.clone(), entries, DenominatorMode::FittedWindows)
    }

    /// Exact vertex list, each with a shortest simple cycle realizing it,
    /// sorted by decreasing entries.
    pub fn vertices(&self) -> Result<Vec<Vertex>> {
        if self.blocks.len() > VERTEX_DIMENSION_CAP {
            return Err(Error::DimensionCap {
                dimension: self.blocks.len(),
                cap: VERTEX_DIMENSION_CAP,
            });
        }
        let mut candidates: BTreeMap<Vec<BigRational>, Word> = BTreeMap::new();
        for c in self.simple_cycles()? {
            let v = self.cycle_vector(&c)?.into_entries();
            let keep = match candidates.get(&v) {
                Some(old) => (c.len(), &c) < (old.len(), old),
                None => true,
            };
            if keep {
                candidates.insert(v, c);
            }
        }
        let points: Vec<(Vec<BigRational>, Word)> = candidates.into_iter().collect();
        let mut out = Vec::new();
        for (i, (v, c)) in points.iter().enumerate() {
            let others: Vec<&Vec<BigRational>> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| &p.0)
                .collect();
            if !in_convex_hull(v, &others) {
                out.push(Vertex {
                    vector: FrequencyVector::new_unchecked(
                        self.blocks.clone(),
                        v.clone(),
                        DenominatorMode::FittedWindows,
                    ),
                    cycle: c.clone(),
                });
            }
        }
        out.sort_by(|a, b| b.vector.entries().cmp(a.vector.entries()));
        Ok(out)
    }

    /// All members with common denominator `d <= q_max`, ordered by increasing
    /// `d` and then lexicographically (ascending).
    pub fn rational_targets(&self, q_max: u64) -> Result<RationalTargetEnumeration> {
        if q_max == 0 {
            return Err(Error::InvalidInput("denominator bound must be >= 1".into()));
        }
        let dim = self.blocks.len();
        let requested = (1..=q_max).fold(0u128, |acc, d| {
            acc.saturating_add(binomial(d as u128 + dim as u128 - 1, dim as u128 - 1))
        });
        if requested > TARGET_CANDIDATE_CAP {
            return Err(Error::EnumerationCap {
                requested,
                cap: TARGET_CANDIDATE_CAP,
            });
        }
        let mut targets = Vec::new();
        let mut parts = vec![0u64; dim];
        for d in 1..=q_max {
            compositions(d, 0, &mut parts, &mut |parts| {
                // Keep only vectors whose lowest common denominator is exactly d.
                if parts.iter().fold(d, |g, &a| gcd(g, a)) != 1 {
                    return;
                }
                let entries: Vec<BigRational> = parts
                    .iter()
                    .map(|&a| BigRational::new(a.into(), d.into()))
                    .collect();
                if self.lift(&entries).is_some() {
                    targets.push(FrequencyVector::new_unchecked(
                        self.blocks.clone(),
                        entries,
                        DenominatorMode::FittedWindows,
                    ));
                }
            });
        }
        Ok(RationalTargetEnumeration {
            denominator_bound: q_max,
            targets,
        })
    }
}

/// Ascending-lexicographic compositions of `total` into `parts.len()` nonnegative parts.
fn compositions(total: u64, pos: usize, parts: &mut [u64], visit: &mut impl FnMut(&[u64])) {
    if pos + 1 == parts.len() {
        parts[pos] = total;
        visit(parts);
        return;
    }
    for a in 0..=total {
        parts[pos] = a;
        compositions(total - a, pos + 1, parts, visit);
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Whether `v` is a convex combination of `points` (exact LP).
pub(crate) fn in_convex_hull(v: &[BigRational], points: &[&Vec<BigRational>]) -> bool {
    if points.is_empty() {
        return false;
    }
    let dim = v.len();
    let mut a: Vec<Vec<BigRational>> = (0..dim)
        .map(|i| points.iter().map(|p| p[i].clone()).collect())
        .collect();
    a.push(vec![BigRational::one(); points.len()]);
    let mut b = v.to_vec();
    b.push(BigRational::one());
    feasible_point(&a, &b).is_some()
}

/// Exact membership of `q` in the invariant polytope on `L_k`.
pub fn is_in_spectrum(q: &FrequencyVector, spec: &ShiftSpec, k: usize) -> Result<bool> {
    InvariantPolytope::new(spec, k)?.contains(q)
}

pub fn polytope_vertices(spec: &ShiftSpec, k: usize) -> Result<Vec<Vertex>> {
    InvariantPolytope::new(spec, k)?.vertices()
}

pub fn enumerate_rational_targets(
    spec: &ShiftSpec,
    k: usize,
    q_max: u64,
) -> Result<RationalTargetEnumeration> {
    InvariantPolytope::new(spec, k)?.rational_targets(q_max)
}

/// Per-letter frequency ranges over the single-letter polytope. Alternating
/// between two targets that differ in every letter forces every letter
/// frequency to diverge.
pub fn letter_frequency_spread(spec: &ShiftSpec) -> Result<LetterSpread> {
    let polytope = InvariantPolytope::new(spec, 1)?;
    let vertices = polytope.vertices()?;
    let letters = polytope.blocks().len();
    let mut ranges = Vec::with_capacity(letters);
    let mut witnesses = Vec::with_capacity(letters);
    for i in 0..letters {
        let values = vertices.iter().map(|v| &v.vector.entries()[i]);
        let (lo_at, lo) = values
            .clone()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .expect("the polytope has a vertex");
        let (hi_at, hi) = values.enumerate().max_by(|a, b| a.1.cmp(b.1)).unwrap();
        ranges.push((lo.clone(), hi.clone()));
        witnesses.push((lo_at, hi_at));
    }
    Ok(LetterSpread {
        ranges,
        witnesses,
        vertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn vector(spec: &ShiftSpec, k: usize, s: &str) -> FrequencyVector {
        let blocks = Arc::new(spec.enumerate_language(k).unwrap());
        FrequencyVector::parse(blocks, s).unwrap()
    }

    fn entries(vs: &[Vertex]) -> Vec<Vec<BigRational>> {
        vs.iter().map(|v| v.vector.entries().to_vec()).collect()
    }

    #[test]
    fn golden_spectrum_membership() {
        let golden = ShiftSpec::golden_mean();
        assert!(is_in_spectrum(&vector(&golden, 1, "0.6,0.4"), &golden, 1).unwrap());
        assert!(!is_in_spectrum(&vector(&golden, 1, "0.4,0.6"), &golden, 1).unwrap());
        assert!(is_in_spectrum(&vector(&golden, 1, "1/2,1/2"), &golden, 1).unwrap());
        assert!(is_in_spectrum(&vector(&golden, 1, "1,0"), &golden, 1).unwrap());
        let full = ShiftSpec::full(3).unwrap();
        assert!(is_in_spectrum(&vector(&full, 2, &["1/9"; 9].join(",")), &full, 2).unwrap());
    }

    #[test]
    fn golden_polytope_structure() {
        let golden = ShiftSpec::golden_mean();
        let p1 = invariant_polytope(&golden, 1).unwrap();
        assert_eq!(p1.lift_level(), 2);
        let p2 = invariant_polytope(&golden, 2).unwrap();
        assert_eq!(p2.blocks().len(), 3);
        // Balance at node 0 reads p_01 = p_10 (the loop 00 cancels).
        let balance = &p2.constraints()[1];
        assert_eq!(balance.terms, vec![("01".parse().unwrap(), 1), ("10".parse().unwrap(), -1)]);
        let full = invariant_polytope(&ShiftSpec::full(2).unwrap(), 1).unwrap();
        assert_eq!(full.lift_level(), 1);
        assert_eq!(full.constraints().len(), 1);
    }

    #[test]
    fn vertex_examples() {
        let full = ShiftSpec::full(2).unwrap();
        assert_eq!(
            entries(&polytope_vertices(&full, 1).unwrap()),
            vec![vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]]
        );
        let golden = ShiftSpec::golden_mean();
        let v1 = polytope_vertices(&golden, 1).unwrap();
        assert_eq!(entries(&v1), vec![vec![r(1, 1), r(0, 1)], vec![r(1, 2), r(1, 2)]]);
        assert_eq!(v1[1].cycle.to_string(), "01");
        let v2 = entries(&polytope_vertices(&golden, 2).unwrap());
        assert!(v2.contains(&vec![r(1, 1), r(0, 1), r(0, 1)]));
        assert!(v2.contains(&vec![r(0, 1), r(1, 2), r(1, 2)]));
    }

    #[test]
    fn rational_target_examples() {
        let full = ShiftSpec::full(2).unwrap();
        let t = entries_of(&enumerate_rational_targets(&full, 1, 2).unwrap());
        assert_eq!(
            t,
            vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)], vec![r(1, 2), r(1, 2)]]
        );
        let golden = ShiftSpec::golden_mean();
        let t = entries_of(&enumerate_rational_targets(&golden, 1, 2).unwrap());
        assert_eq!(t, vec![vec![r(1, 1), r(0, 1)], vec![r(1, 2), r(1, 2)]]);
        let t = entries_of(&enumerate_rational_targets(&golden, 1, 4).unwrap());
        assert!(t.contains(&vec![r(3, 4), r(1, 4)]));
        assert!(!t.contains(&vec![r(1, 4), r(3, 4)]));
    }

    fn entries_of(e: &RationalTargetEnumeration) -> Vec<Vec<BigRational>> {
        e.targets.iter().map(|t| t.entries().to_vec()).collect()
    }

    #[test]
    fn letter_spread() {
        let golden = letter_frequency_spread(&ShiftSpec::golden_mean()).unwrap();
        assert!(golden.every_letter_varies());
        assert_eq!(golden.min_gap(), r(1, 2));
        let one = letter_frequency_spread(&ShiftSpec::full(1).unwrap()).unwrap();
        assert!(!one.every_letter_varies());
    }

    #[test]
    fn dimension_cap() {
        let full = ShiftSpec::full(2).unwrap();
        assert!(matches!(polytope_vertices(&full, 4), Err(Error::DimensionCap { .. })));
    }
}
