use super::{l1_distance_mixed, CesaroAccumulator, FloatCesaroTower, FrequencyVector};
use crate::error::{Error, Result};
use crate::shiftspace::{ShiftSpec, Symbol};

/// Which lengths `n` a detector evaluates.
#[derive(Clone, Debug)]
pub enum Evaluation {
    Every,
    /// Every `s`-th length.
    Stride(u64),
    /// Strictly increasing explicit lengths.
    Checkpoints(Vec<u64>),
}

impl Evaluation {
    fn includes(&self, n: u64, next_checkpoint: &mut usize) -> bool {
        match self {
            Evaluation::Every => true,
            Evaluation::Stride(s) => n.is_multiple_of(*s),
            Evaluation::Checkpoints(c) => {
                if c.get(*next_checkpoint) == Some(&n) {
                    *next_checkpoint += 1;
                    true
                } else {
                    false
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub n: u64,
    pub distance: f64,
}

/// A maximal run of consecutive evaluated lengths that are all hits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Visit {
    pub first: u64,
    pub last: u64,
    pub closest: f64,
}

#[derive(Clone, Debug)]
pub struct AccumulationReport {
    pub targets: Vec<FrequencyVector>,
    pub tolerance: f64,
    pub order: usize,
    /// Per target, every evaluated `n` within `tolerance`.
    pub hits: Vec<Vec<Hit>>,
    pub visits: Vec<Vec<Visit>>,
    /// Last length evaluated (the horizon, or the stream end if sooner).
    pub evaluated_to: u64,
}

impl AccumulationReport {
    pub fn hit_count(&self, target: usize) -> usize {
        self.hits[target].len()
    }

    pub fn visit_count(&self, target: usize) -> usize {
        self.visits[target].len()
    }
}

/// Records the lengths `n <= horizon` at which `P^(r)_k` of `stream` lies
/// within `tolerance` (L1, `PaperN` entries) of each target.
#[allow(clippy::too_many_arguments)]
pub fn detect_accumulation(
    stream: impl IntoIterator<Item = Symbol>,
    k: usize,
    r: usize,
    spec: &ShiftSpec,
    targets: &[FrequencyVector],
    tolerance: f64,
    horizon: u64,
    evaluation: Evaluation,
) -> Result<AccumulationReport> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if let Evaluation::Stride(0) = evaluation {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let mut tower = FloatCesaroTower::new(spec, k, r)?;
    for t in targets {
        if t.blocks().as_ref() != tower.blocks().as_ref() {
            return Err(Error::InvalidInput(format!(
                "target {t} is not indexed by L_{k}"
            )));
        }
    }
    let mut hits = vec![Vec::new(); targets.len()];
    let mut visits: Vec<Vec<Visit>> = vec![Vec::new(); targets.len()];
    let mut in_visit = vec![false; targets.len()];
    let mut next_checkpoint = 0;
    let mut stream = stream.into_iter();
    while tower.consumed() < horizon {
        let Some(s) = stream.next() else { break };
        tower.push(s)?;
        let n = tower.consumed();
        if !evaluation.includes(n, &mut next_checkpoint) {
            continue;
        }
        let current = tower.vector(r);
        for (i, target) in targets.iter().enumerate() {
            let distance = l1_distance_mixed(&current, target)?;
            if distance <= tolerance {
                hits[i].push(Hit { n, distance });
                match (in_visit[i], visits[i].last_mut()) {
                    (true, Some(v)) => {
                        v.last = n;
                        v.closest = v.closest.min(distance);
                    }
                    _ => visits[i].push(Visit {
                        first: n,
                        last: n,
                        closest: distance,
                    }),
                }
                in_visit[i] = true;
            } else {
                in_visit[i] = false;
            }
        }
    }
    Ok(AccumulationReport {
        targets: targets.to_vec(),
        tolerance,
        order: r,
        hits,
        visits,
        evaluated_to: tower.consumed(),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::shiftspace::Word;

    #[test]
    fn alternating_hits_every_even_length() {
        let full = ShiftSpec::full(2).unwrap();
        let blocks = Arc::new(full.enumerate_language(1).unwrap());
        let uniform = FrequencyVector::parse(blocks.clone(), "1/2,1/2").unwrap();
        let stream = (0..100).map(|i| (i % 2) as Symbol);
        let report =
            detect_accumulation(stream, 1, 0, &full, &[uniform], 0.1, 100, Evaluation::Every)
                .unwrap();
        let evens: Vec<u64> = (1..=50).map(|i| 2 * i).collect();
        let hit_ns: Vec<u64> = report.hits[0].iter().map(|h| h.n).collect();
        assert!(evens.iter().all(|n| hit_ns.contains(n)));
        assert!(report.hits[0].iter().all(|h| h.distance <= 0.1));
    }

    #[test]
    fn constant_stream_never_hits_the_other_vertex() {
        let full = ShiftSpec::full(2).unwrap();
        let blocks = Arc::new(full.enumerate_language(1).unwrap());
        let target = FrequencyVector::parse(blocks, "0,1").unwrap();
        let stream: Word = vec![0; 50].into();
        let report =
            detect_accumulation(stream, 1, 0, &full, &[target], 0.1, 50, Evaluation::Every)
                .unwrap();
        assert_eq!(report.hit_count(0), 0);
        assert_eq!(report.evaluated_to, 50);
    }
}
