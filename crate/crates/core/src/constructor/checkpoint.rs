//! Words whose empirical block distribution passes close to each target of a
//! list in turn, at certified checkpoints.

use std::sync::Arc;

use num::{BigInt, BigRational, Signed, ToPrimitive};

use super::concat::check_allowed;
use super::pattern::{Pattern, PatternCursor};
use super::realize::{distance_from_counts, Realizer};
use super::stream::{Certificate, ChunkSource, DigitStream};
use super::{Budget, CHUNK};
use crate::error::{Error, Result};
use crate::freqstats::{DenominatorMode, FrequencyVector};
use crate::shiftspace::{ShiftSpec, Symbol, Word};

/// Targets visited in order, the closeness required at each checkpoint, and
/// the initial word.
#[derive(Clone, Debug)]
pub struct TargetPlan {
    pub targets: Vec<FrequencyVector>,
    pub epsilon: BigRational,
    pub prefix: Word,
    /// Restart the target list forever instead of stopping after one pass.
    pub cycle: bool,
}

impl TargetPlan {
    pub fn new(targets: Vec<FrequencyVector>, epsilon: BigRational) -> Self {
        TargetPlan {
            targets,
            epsilon,
            prefix: Word::empty(),
            cycle: false,
        }
    }

    pub fn with_prefix(mut self, prefix: Word) -> Self {
        self.prefix = prefix;
        self
    }

    pub fn cycling(mut self) -> Self {
        self.cycle = true;
        self
    }

    fn block_length(&self) -> Result<usize> {
        let k = self.targets.first().map_or(1, |q| q.k());
        if self.targets.iter().any(|q| q.blocks().words() != self.targets[0].blocks().words()) {
            return Err(Error::InvalidInput("targets use different block sets".into()));
        }
        Ok(k)
    }

    fn validate(&self, realizer: &Realizer) -> Result<()> {
        if !self.epsilon.is_positive() {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        check_allowed(realizer.spec(), &self.prefix)?;
        for (i, q) in self.targets.iter().enumerate() {
            realizer.check_target(q)?;
            if !realizer.polytope().contains(q)? {
                return Err(Error::Infeasible(format!(
                    "target {i} = {q} is not the block-frequency vector of any invariant measure"
                )));
            }
        }
        Ok(())
    }
}

/// One certified stage: after `n` symbols the frequency vector is within
/// `epsilon` of target `target_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointEntry {
    /// 1-based stage number.
    pub stage: usize,
    pub target_index: usize,
    /// Precision at which the stage word was realized.
    pub precision: u64,
    /// Symbols added by this stage, padding included.
    pub stage_len: u64,
    pub n: u64,
    /// Exact `FittedWindows` distance at `n`.
    pub distance: BigRational,
    pub epsilon: BigRational,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckpointCertificate {
    pub entries: Vec<CheckpointEntry>,
}

/// Precision for the next stage: `⌈2 (n + k + j − 1) |L_k| / ε⌉` where `n`
/// is the length of everything built so far. When nothing precedes a first
/// stage with `k + j = 1` the rule gives 0; `⌈1/ε⌉` is used instead, the
/// least precision whose own guarantee is within `ε`.
pub fn stage_precision(prefix_len: u64, k: usize, j: usize, language_size: usize, epsilon: &BigRational) -> Result<u64> {
    let num = BigInt::from(2u64 * (prefix_len + k as u64 + j as u64 - 1) * language_size as u64);
    let l = (BigRational::from_integer(num) / epsilon).ceil().to_integer();
    let floor = epsilon.recip().ceil().to_integer();
    l.max(floor)
        .to_u64()
        .filter(|&l| l > 0)
        .ok_or_else(|| Error::InvalidInput("stage precision out of range".into()))
}

struct CheckpointSource {
    realizer: Realizer,
    plan: TargetPlan,
    k: usize,
    max_stages: usize,
    stage: usize,
    n: u64,
    counts: Vec<u64>,
    carry: Vec<Symbol>,
    tail: Vec<Symbol>,
    cursor: Option<PatternCursor>,
}

impl CheckpointSource {
    fn new(spec: &ShiftSpec, plan: TargetPlan, budget: &Budget) -> Result<Self> {
        let k = plan.block_length()?;
        let realizer = Realizer::new(spec, k)?.with_max_len(u64::MAX);
        plan.validate(&realizer)?;
        let counts = vec![0; realizer.index().len()];
        let mut source = CheckpointSource {
            realizer,
            k,
            max_stages: budget.max_stages,
            stage: 0,
            n: 0,
            counts,
            carry: Vec::new(),
            tail: Vec::new(),
            cursor: None,
            plan,
        };
        let prefix = Pattern::literal(source.plan.prefix.clone());
        source.append(prefix.clone())?;
        source.cursor = Some(PatternCursor::new(prefix));
        Ok(source)
    }

    fn append(&mut self, p: Arc<Pattern>) -> Result<()> {
        p.accumulate(self.realizer.index(), &mut self.carry, &mut self.counts)?;
        let ctx = self.realizer.joiner().context_len();
        self.tail.extend(p.tail(ctx));
        let drop = self.tail.len().saturating_sub(ctx);
        self.tail.drain(..drop);
        self.n += p.len();
        Ok(())
    }

    fn plan_stage(&mut self) -> Result<Option<CheckpointEntry>> {
        let m = self.plan.targets.len();
        if m == 0 || (!self.plan.cycle && self.stage == m) {
            return Ok(None);
        }
        if self.stage == self.max_stages {
            return Err(Error::Budget {
                what: "stage",
                limit: self.max_stages as u64,
            });
        }
        let target_index = self.stage % m;
        let q = self.plan.targets[target_index].clone();
        let precision = stage_precision(
            self.n,
            self.k,
            self.realizer.spec_constant(),
            self.realizer.index().len(),
            &self.plan.epsilon,
        )?;
        let gamma = self.realizer.realize(&q, precision)?;
        let ctx = self.realizer.joiner().context_len();
        let tail = self.tail.clone();
        let u = self.realizer.joiner().padding(&tail, &gamma.pattern().head(ctx))?;
        let stage = Pattern::concat(vec![Pattern::literal(u), gamma.pattern().clone()]);
        self.append(stage.clone())?;
        self.stage += 1;
        let distance = distance_from_counts(&self.counts, self.n, self.k, q.entries(), DenominatorMode::FittedWindows);
        if distance > self.plan.epsilon {
            return Err(Error::BoundViolation {
                context: format!("checkpoint of stage {}", self.stage),
                measured: distance.to_f64().unwrap_or(f64::NAN),
                bound: self.plan.epsilon.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.cursor = Some(PatternCursor::new(stage.clone()));
        Ok(Some(CheckpointEntry {
            stage: self.stage,
            target_index,
            precision,
            stage_len: stage.len(),
            n: self.n,
            distance,
            epsilon: self.plan.epsilon.clone(),
        }))
    }
}

impl ChunkSource for CheckpointSource {
    fn next_chunk(&mut self, out: &mut Vec<Symbol>, certs: &mut Vec<Certificate>) -> Result<bool> {
        loop {
            if let Some(cursor) = self.cursor.as_mut() {
                if cursor.fill(out, CHUNK) > 0 {
                    return Ok(true);
                }
                self.cursor = None;
            }
            match self.plan_stage()? {
                Some(entry) => certs.push(Certificate::Checkpoint(entry)),
                None => return Ok(false),
            }
        }
    }
}

/// Lazily generated stream for `plan`. With a cycling plan the stream is
/// infinite up to the budget; otherwise it ends after the last target.
pub fn build_checkpointed_stream(spec: &ShiftSpec, plan: TargetPlan, budget: &Budget) -> Result<DigitStream> {
    let source = CheckpointSource::new(spec, plan, budget)?;
    let ft = source.realizer.spec().clone();
    Ok(DigitStream::new(Box::new(source), ft, budget.max_symbols))
}

/// `ω_0 ⊙ ω_1 ⊙ … ⊙ ω_m` for a one-pass plan, with one certificate entry per
/// target. Stage `i` realizes its target at precision
/// [`stage_precision`] of the word built so far, and its checkpoint distance
/// is verified to be at most `ε`.
pub fn build_checkpointed_word(
    spec: &ShiftSpec,
    plan: &TargetPlan,
    budget: &Budget,
) -> Result<(Word, CheckpointCertificate)> {
    let mut plan = plan.clone();
    plan.cycle = false;
    let mut stream = build_checkpointed_stream(spec, plan, budget)?;
    let word: Word = stream.by_ref().collect();
    if let Some(e) = stream.termination() {
        return Err(e.clone());
    }
    let entries = stream
        .certificates()
        .into_iter()
        .filter_map(|c| match c {
            Certificate::Checkpoint(e) => Some(e),
            Certificate::Window(_) => None,
        })
        .collect();
    Ok((word, CheckpointCertificate { entries }))
}

/// Largest `ε` reached at any checkpoint, as a float.
pub fn max_checkpoint_distance(cert: &CheckpointCertificate) -> f64 {
    cert.entries
        .iter()
        .map(|e| e.distance.to_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max)
}
