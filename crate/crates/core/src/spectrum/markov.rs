use std::sync::Arc;

use rand::Rng;

use super::polytope::InvariantPolytope;
use crate::error::{Error, Result};
use crate::freqstats::{DenominatorMode, FrequencyVector};
use crate::shiftspace::{LanguageSlice, ShiftSpec, Symbol, Word};

const POWER_TOLERANCE: f64 = 1e-15;
const POWER_MAX_ITERATIONS: usize = 1_000_000;

/// A stationary Markov measure on the transition graph with nodes `L_{K-1}`
/// and edges `L_K`, `K = max(2, memory)`. Entropies are in nats.
#[derive(Clone, Debug)]
pub struct MarkovMeasure {
    polytope: InvariantPolytope,
    // transition[e] = P(source(e) → target(e)), indexed by edge.
    transition: Vec<f64>,
    stationary: Vec<f64>,
    perron_root: Option<f64>,
}

fn graph(spec: &ShiftSpec) -> Result<InvariantPolytope> {
    let memory = spec.to_finite_type().memory();
    InvariantPolytope::new(spec, memory.max(2))
}

/// Strong connectivity of the graph given by `(source, target)` edge lists.
fn strongly_connected(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(s, t) in edges {
                let (from, to) = if forward { (s, t) } else { (t, s) };
                if from == v && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen.iter().all(|&b| b)
    };
    nodes > 0 && reach(true) && reach(false)
}

/// Power iteration on `M + I` (aperiodic, same Perron vector). Returns the
/// normalized eigenvector and the eigenvalue of `M`.
fn perron_vector(nodes: usize, entries: &[(usize, usize, f64)]) -> Result<(Vec<f64>, f64)> {
    let mut v = vec![1.0 / nodes as f64; nodes];
    let mut next = vec![0.0; nodes];
    for _ in 0..POWER_MAX_ITERATIONS {
        next.copy_from_slice(&v);
        for &(i, j, a) in entries {
            next[i] += a * v[j];
        }
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= norm);
        let change: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut v, &mut next);
        if change < POWER_TOLERANCE * nodes as f64 {
            // v is normalized to sum 1, so the eigenvalue of M + I is the norm.
            let mut mv = vec![0.0; nodes];
            for &(i, j, a) in entries {
                mv[i] += a * v[j];
            }
            let lambda = mv.iter().sum::<f64>() / v.iter().sum::<f64>();
            return Ok((v, lambda));
        }
    }
    Err(Error::Budget {
        what: "power iteration",
        limit: POWER_MAX_ITERATIONS as u64,
    })
}

/// Maximal-entropy (Parry) measure of an irreducible shift.
pub fn parry_measure(spec: &ShiftSpec) -> Result<MarkovMeasure> {
    let g = graph(spec)?;
    let nodes = g.nodes().len();
    let edge_list: Vec<(usize, usize)> = (0..g.edges().len())
        .map(|e| (g.edge_source(e), g.edge_target(e)))
        .collect();
    if !strongly_connected(nodes, &edge_list) {
        return Err(Error::NotIrreducible);
    }
    let right: Vec<(usize, usize, f64)> = edge_list.iter().map(|&(s, t)| (s, t, 1.0)).collect();
    let left: Vec<(usize, usize, f64)> = edge_list.iter().map(|&(s, t)| (t, s, 1.0)).collect();
    let (v, lambda) = perron_vector(nodes, &right)?;
    let (u, _) = perron_vector(nodes, &left)?;
    let transition = edge_list
        .iter()
        .map(|&(s, t)| v[t] / (lambda * v[s]))
        .collect();
    let mut stationary: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
    let total: f64 = stationary.iter().sum();
    stationary.iter_mut().for_each(|x| *x /= total);
    Ok(MarkovMeasure {
        polytope: g,
        transition,
        stationary,
        perron_root: Some(lambda),
    })
}

impl MarkovMeasure {
    /// Markov measure with transition probabilities proportional to positive
    /// `weights` per edge of `L_K` (in [`MarkovMeasure::edges`] order).
    pub fn from_weights(spec: &ShiftSpec, weights: &[f64]) -> Result<Self> {
        let g = graph(spec)?;
        if weights.len() != g.edges().len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "need {} positive edge weights",
                g.edges().len()
            )));
        }
        let nodes = g.nodes().len();
        let edge_list: Vec<(usize, usize)> = (0..g.edges().len())
            .map(|e| (g.edge_source(e), g.edge_target(e)))
            .collect();
        if !strongly_connected(nodes, &edge_list) {
            return Err(Error::NotIrreducible);
        }
        let mut out_weight = vec![0.0; nodes];
        for (e, &(s, _)) in edge_list.iter().enumerate() {
            out_weight[s] += weights[e];
        }
        let transition: Vec<f64> = edge_list
            .iter()
            .enumerate()
            .map(|(e, &(s, _))| weights[e] / out_weight[s])
            .collect();
        // Stationary vector: Perron vector of Pᵀ.
        let entries: Vec<(usize, usize, f64)> = edge_list
            .iter()
            .zip(&transition)
            .map(|(&(s, t), &p)| (t, s, p))
            .collect();
        let (stationary, _) = perron_vector(nodes, &entries)?;
        Ok(MarkovMeasure {
            polytope: g,
            transition,
            stationary,
            perron_root: None,
        })
    }

    /// Nodes `L_{K-1}`.
    pub fn nodes(&self) -> &Arc<LanguageSlice> {
        self.polytope.nodes()
    }

    /// Edges `L_K`.
    pub fn edges(&self) -> &Arc<LanguageSlice> {
        self.polytope.edges()
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Perron root of the adjacency matrix, for the Parry measure.
    pub fn perron_root(&self) -> Option<f64> {
        self.perron_root
    }

    /// `max |πP − π|` over nodes.
    pub fn stationarity_defect(&self) -> f64 {
        let mut pi_p = vec![0.0; self.stationary.len()];
        for (e, &p) in self.transition.iter().enumerate() {
            pi_p[self.polytope.edge_target(e)] +=
                self.stationary[self.polytope.edge_source(e)] * p;
        }
        pi_p.iter()
            .zip(&self.stationary)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Closed form `−Σ π_i P_ij log P_ij`.
    pub fn entropy(&self) -> f64 {
        -self
            .transition
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(e, &p)| self.stationary[self.polytope.edge_source(e)] * p * p.ln())
            .sum::<f64>()
    }

    /// Probability of every allowed word of length `len`, in `L_len` order.
    pub fn block_probabilities(&self, spec: &ShiftSpec, len: usize) -> Result<FrequencyVector<f64>> {
        let blocks = Arc::new(spec.to_finite_type().enumerate_language(len)?);
        let entries = blocks
            .iter()
            .map(|w| self.word_probability(w))
            .collect::<Result<Vec<_>>>()?;
        FrequencyVector::new(blocks, entries, DenominatorMode::FittedWindows)
    }

    /// `μ([w])`.
    pub fn word_probability(&self, w: &[Symbol]) -> Result<f64> {
        let m = self.polytope.lift_level() - 1;
        if w.len() < m {
            // Sum over extensions to a node.
            let mut total = 0.0;
            for (i, node) in self.nodes().iter().enumerate() {
                if node.starts_with(w) {
                    total += self.stationary[i];
                }
            }
            return Ok(total);
        }
        let Some(start) = self.nodes().index_of(&w[..m]) else {
            return Ok(0.0);
        };
        let mut p = self.stationary[start];
        for window in w.windows(m + 1) {
            match self.edges().index_of(window) {
                Some(e) => p *= self.transition[e],
                None => return Ok(0.0),
            }
        }
        Ok(p)
    }

    /// `−Σ_{|w|=n} μ(w) log μ(w)`.
    pub fn block_entropy(&self, spec: &ShiftSpec, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let probs = self.block_probabilities(spec, n)?;
        Ok(-probs
            .entries()
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>())
    }

    /// Entropy estimate from cylinder sums at depth `n`: `H_n − H_{n−1}`.
    /// For a Markov measure this equals the entropy once `n >= K`, whereas
    /// `H_n / n` only converges at rate `1/n`.
    pub fn cylinder_entropy(&self, spec: &ShiftSpec, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidInput("depth must be >= 1".into()));
        }
        Ok(self.block_entropy(spec, n)? - self.block_entropy(spec, n - 1)?)
    }

    /// A path of `len` symbols started from the stationary distribution.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Word {
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); self.nodes().len()];
        for e in 0..self.edges().len() {
            out_edges[self.polytope.edge_source(e)].push(e);
        }
        let pick = |rng: &mut R, weights: &mut dyn Iterator<Item = (usize, f64)>| {
            let x: f64 = rng.random();
            let mut acc = 0.0;
            let mut last = 0;
            for (i, w) in weights {
                acc += w;
                last = i;
                if x < acc {
                    return i;
                }
            }
            last
        };
        let mut node = pick(rng, &mut self.stationary.iter().copied().enumerate());
        let mut out: Vec<Symbol> = self.nodes().words()[node].iter().copied().collect();
        out.truncate(len);
        while out.len() < len {
            let e = pick(
                rng,
                &mut out_edges[node].iter().map(|&e| (e, self.transition[e])),
            );
            out.push(*self.edges().words()[e].last().unwrap());
            node = self.polytope.edge_target(e);
        }
        Word::new(out)
    }
}

/// Entropy of a Markov measure, in nats.
pub fn entropy(mu: &MarkovMeasure) -> f64 {
    mu.entropy()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn full_shift_parry_is_uniform() {
        let full = ShiftSpec::full(3).unwrap();
        let mu = parry_measure(&full).unwrap();
        for &p in mu.stationary() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((mu.entropy() - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn golden_parry() {
        let mu = parry_measure(&ShiftSpec::golden_mean()).unwrap();
        let beta = (1.0 + 5f64.sqrt()) / 2.0;
        let pi0 = beta * beta / (1.0 + beta * beta);
        assert!((mu.stationary()[0] - pi0).abs() < 1e-12);
        assert!((mu.entropy() - beta.ln()).abs() < 1e-12);
        assert!(mu.stationarity_defect() < 1e-12);
        let golden = ShiftSpec::golden_mean();
        assert!((mu.cylinder_entropy(&golden, 8).unwrap() - beta.ln()).abs() < 1e-9);
    }

    #[test]
    fn single_letter_has_zero_entropy() {
        let one = ShiftSpec::full(1).unwrap();
        let mu = parry_measure(&one).unwrap();
        assert_eq!(mu.entropy(), 0.0);
    }

    #[test]
    fn reducible_graph_is_rejected() {
        let absorbing = ShiftSpec::forbidden_words(2, vec!["01".parse().unwrap()]).unwrap();
        assert_eq!(parry_measure(&absorbing).unwrap_err(), Error::NotIrreducible);
    }

    #[test]
    fn sampled_path_is_allowed() {
        let golden = ShiftSpec::golden_mean();
        let mu = parry_measure(&golden).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let path = mu.sample_path(&mut rng, 5000);
        assert_eq!(path.len(), 5000);
        assert!(golden.is_allowed(&path).unwrap());
    }

    #[test]
    fn bernoulli_from_weights() {
        let full = ShiftSpec::full(2).unwrap();
        let mu = MarkovMeasure::from_weights(&full, &[1.0; 4]).unwrap();
        assert!((mu.entropy() - 2f64.ln()).abs() < 1e-12);
    }
}
