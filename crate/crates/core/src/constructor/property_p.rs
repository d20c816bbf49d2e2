//! Streams that stay close to each target over long windows, and the check
//! that iterated averages inherit that closeness.

use std::sync::Arc;

use num::{BigInt, BigUint, Integer, One, ToPrimitive};

use super::realize::{repetition_bound, Realizer};
use super::stream::{Certificate, ChunkSource, DigitStream};
use super::{Budget, CHUNK};
use crate::error::{Error, Result};
use crate::freqstats::{
    BlockIndex, CesaroAccumulator, DenominatorMode, FloatCesaroTower, FrequencyVector, RollingWindow,
};
use crate::shiftspace::{ShiftSpec, Symbol, Word};

/// Default bit budget for [`phi_tower`] results.
pub const DEFAULT_TOWER_BITS: u64 = 1 << 20;

/// `φ_1(x) = 2^x`, `φ_m(x) = φ_1(φ_{m−1}(x))`. Fails once an intermediate
/// exponent exceeds `max_bits`.
pub fn phi_tower(m: u32, x: u64, max_bits: u64) -> Result<BigUint> {
    let mut v = BigUint::from(x);
    for _ in 0..m {
        let e = v.to_u64().filter(|&e| e <= max_bits).ok_or(Error::Budget {
            what: "tower bit",
            limit: max_bits,
        })?;
        v = BigUint::one() << e;
    }
    Ok(v)
}

/// How far past a checkpoint `j` the stream must stay close to its target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowRule {
    /// Up to `φ_m(2^j)`; only feasible for tiny `j`.
    TowerExact,
    /// Up to `W·j`.
    WindowFactor(u64),
}

impl WindowRule {
    /// End of the window after checkpoint `j`; fails when it does not fit in
    /// a `u64` (every tower window past the tiniest checkpoints).
    pub fn window_end(&self, m: u32, j: u64) -> Result<u64> {
        let end = match self {
            WindowRule::WindowFactor(w) => j.checked_mul(*w),
            WindowRule::TowerExact => (j < 64)
                .then(|| phi_tower(m, 1u64 << j, 64).ok())
                .flatten()
                .and_then(|v| v.to_u64()),
        };
        end.ok_or(Error::Budget {
            what: "window end",
            limit: u64::MAX,
        })
    }
}

/// Ordered list of `(target, m, i, h)` stages with `ε = 1/h`.
#[derive(Clone, Debug)]
pub struct PropertyPSchedule {
    pub targets: Vec<FrequencyVector>,
    pub max_m: u32,
    pub max_i: u64,
    pub h_values: Vec<u64>,
    pub window_rule: WindowRule,
    pub mode: DenominatorMode,
    /// Restart the enumeration once every tuple has been served.
    pub cycle: bool,
}

/// One stage tuple of a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageTuple {
    pub target_index: usize,
    pub m: u32,
    pub i: u64,
    pub h: u64,
}

impl PropertyPSchedule {
    pub fn new(targets: Vec<FrequencyVector>, h: u64, window_rule: WindowRule) -> Self {
        PropertyPSchedule {
            targets,
            max_m: 1,
            max_i: 1,
            h_values: vec![h],
            window_rule,
            mode: DenominatorMode::FittedWindows,
            cycle: true,
        }
    }

    /// All stage tuples in diagonal order: by increasing sum of the four
    /// coordinates' positions, then lexicographically.
    pub fn tuples(&self) -> Vec<StageTuple> {
        let sizes = [
            self.targets.len() as u64,
            self.max_m as u64,
            self.max_i,
            self.h_values.len() as u64,
        ];
        if sizes.contains(&0) {
            return Vec::new();
        }
        let max_sum: u64 = sizes.iter().map(|s| s - 1).sum();
        let mut out = Vec::new();
        for total in 0..=max_sum {
            for a in 0..sizes[0].min(total + 1) {
                for b in 0..sizes[1].min(total - a + 1) {
                    for c in 0..sizes[2].min(total - a - b + 1) {
                        let d = total - a - b - c;
                        if d < sizes[3] {
                            out.push(StageTuple {
                                target_index: a as usize,
                                m: b as u32 + 1,
                                i: c + 1,
                                h: self.h_values[d as usize],
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Evidence that the stream stayed within `1/h` of a target on `(j, window_end]`.
#[derive(Clone, Debug)]
pub struct WindowCertificate {
    pub stage: usize,
    pub tuple: StageTuple,
    pub target: FrequencyVector,
    pub epsilon: f64,
    /// Precision of the repeated word (`6h`).
    pub precision: u64,
    pub gamma_len: u64,
    /// Copies appended before the checkpoint.
    pub copies: u64,
    pub j: u64,
    pub window_end: u64,
    pub checkpoint_distance: f64,
    pub sup_distance: f64,
}

/// Integer form of a target for exact per-symbol distance checks.
struct ScaledTarget {
    nums: Vec<i128>,
    den: i128,
}

impl ScaledTarget {
    fn new(q: &FrequencyVector) -> Result<Self> {
        let den = q.entries().iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let den_i = den
            .to_i64()
            .filter(|&d| d < (1 << 40))
            .ok_or_else(|| Error::InvalidInput("target denominators are too large".into()))?;
        let nums = q
            .entries()
            .iter()
            .map(|x| (x.numer() * (&den / x.denom())).to_i64().unwrap_or(0) as i128)
            .collect();
        Ok(ScaledTarget {
            nums,
            den: den_i as i128,
        })
    }

    /// `distance · windows · den`.
    fn scaled(&self, counts: &[u64], windows: u64) -> i128 {
        let w = windows as i128;
        counts
            .iter()
            .zip(&self.nums)
            .map(|(&c, &q)| (c as i128 * self.den - q * w).abs())
            .sum()
    }

    fn value(&self, counts: &[u64], windows: u64) -> f64 {
        self.scaled(counts, windows) as f64 / (windows as f64 * self.den as f64)
    }

    /// Whether the distance is at most (`strict`: below) `num/den`.
    fn within(&self, counts: &[u64], windows: u64, num: u64, den: u64, strict: bool) -> bool {
        let lhs = self.scaled(counts, windows) * den as i128;
        let rhs = num as i128 * windows as i128 * self.den;
        if strict {
            lhs < rhs
        } else {
            lhs <= rhs
        }
    }
}

enum Phase {
    Approach { copies: u64, bound: u64 },
    Window { j: u64, end: u64, copies: u64, at_j: f64, sup: f64 },
}

struct Stage {
    number: usize,
    tuple: StageTuple,
    target: FrequencyVector,
    scaled: ScaledTarget,
    gamma: Word,
    precision: u64,
    phase: Phase,
}

struct PropertyPSource {
    realizer: Realizer,
    schedule: PropertyPSchedule,
    tuples: Vec<StageTuple>,
    next_tuple: usize,
    max_stages: usize,
    index: Arc<BlockIndex>,
    k: usize,
    n: u64,
    counts: Vec<u64>,
    window: RollingWindow,
    tail: Vec<Symbol>,
    stage: Option<Stage>,
    stages_done: usize,
}

impl PropertyPSource {
    fn windows(&self) -> u64 {
        match self.schedule.mode {
            DenominatorMode::PaperN => self.n,
            DenominatorMode::FittedWindows => (self.n + 1).saturating_sub(self.k as u64),
        }
    }

    fn start_stage(&mut self) -> Result<bool> {
        if self.next_tuple == self.tuples.len() {
            if !self.schedule.cycle || self.tuples.is_empty() {
                return Ok(false);
            }
            self.next_tuple = 0;
        }
        if self.stages_done == self.max_stages {
            return Err(Error::Budget {
                what: "stage",
                limit: self.max_stages as u64,
            });
        }
        let tuple = self.tuples[self.next_tuple];
        self.next_tuple += 1;
        let target = self.schedule.targets[tuple.target_index].clone();
        let precision = 6 * tuple.h;
        let gamma = self.realizer.realize(&target, precision)?.word();
        let bound = repetition_bound(self.n, gamma.len() as u64, self.k).max(1);
        self.stage = Some(Stage {
            number: self.stages_done + 1,
            tuple,
            scaled: ScaledTarget::new(&target)?,
            target,
            gamma,
            precision,
            phase: Phase::Approach { copies: 0, bound },
        });
        Ok(true)
    }

    /// Appends one padded copy of the stage word to `out`, updating counts
    /// and window checks. Returns a certificate when the stage completes.
    fn emit_copy(&mut self, out: &mut Vec<Symbol>) -> Result<Option<WindowCertificate>> {
        let stage = self.stage.as_mut().expect("active stage");
        let u = self.realizer.joiner().padding(&self.tail, &stage.gamma)?;
        let start = out.len();
        out.extend_from_slice(&u);
        out.extend_from_slice(&stage.gamma);
        let h = stage.tuple.h;
        for idx in start..out.len() {
            let s = out[idx];
            if let Some(b) = self.window.push(&self.index, s)? {
                self.counts[b] += 1;
            }
            self.n += 1;
            if let Phase::Window { j, end, sup, .. } = &mut stage.phase {
                if self.n > *j && self.n <= *end {
                    let windows = match self.schedule.mode {
                        DenominatorMode::PaperN => self.n,
                        DenominatorMode::FittedWindows => self.n + 1 - self.k as u64,
                    };
                    let d = stage.scaled.value(&self.counts, windows);
                    *sup = sup.max(d);
                    if !stage.scaled.within(&self.counts, windows, 1, h, true) {
                        return Err(Error::BoundViolation {
                            context: format!("window of stage {} at n = {}", stage.number, self.n),
                            measured: d,
                            bound: 1.0 / h as f64,
                        });
                    }
                }
            }
        }
        let ctx = self.realizer.joiner().context_len();
        self.tail.extend_from_slice(&out[start.max(out.len().saturating_sub(ctx))..]);
        let drop = self.tail.len().saturating_sub(ctx);
        self.tail.drain(..drop);

        let windows = self.windows();
        let n = self.n;
        let stage = self.stage.as_mut().expect("active stage");
        match &mut stage.phase {
            Phase::Approach { copies, bound } => {
                *copies += 1;
                let close = stage
                    .scaled
                    .within(&self.counts, windows, 4, stage.precision, false);
                let long_enough = n >= stage.tuple.i && (n >= 128 || (n as u128) * (h as u128) < (1u128 << n));
                if close && long_enough {
                    let end = self
                        .schedule
                        .window_rule
                        .window_end(stage.tuple.m, n)?;
                    let at_j = stage.scaled.value(&self.counts, windows);
                    stage.phase = Phase::Window {
                        j: n,
                        end,
                        copies: *copies,
                        at_j,
                        sup: 0.0,
                    };
                } else if !close && *copies >= *bound {
                    return Err(Error::BoundViolation {
                        context: format!(
                            "stage {} after {} copies of the repeated word",
                            stage.number, copies
                        ),
                        measured: stage.scaled.value(&self.counts, windows),
                        bound: 4.0 / stage.precision as f64,
                    });
                }
                Ok(None)
            }
            Phase::Window {
                j,
                end,
                copies,
                at_j,
                sup,
            } => {
                if n < *end {
                    return Ok(None);
                }
                let cert = WindowCertificate {
                    stage: stage.number,
                    tuple: stage.tuple,
                    target: stage.target.clone(),
                    epsilon: 1.0 / h as f64,
                    precision: stage.precision,
                    gamma_len: stage.gamma.len() as u64,
                    copies: *copies,
                    j: *j,
                    window_end: *end,
                    checkpoint_distance: *at_j,
                    sup_distance: *sup,
                };
                self.stage = None;
                self.stages_done += 1;
                Ok(Some(cert))
            }
        }
    }
}

impl ChunkSource for PropertyPSource {
    fn next_chunk(&mut self, out: &mut Vec<Symbol>, certs: &mut Vec<Certificate>) -> Result<bool> {
        while out.len() < CHUNK {
            if self.stage.is_none() && !self.start_stage()? {
                return Ok(!out.is_empty());
            }
            if let Some(cert) = self.emit_copy(out)? {
                certs.push(Certificate::Window(cert));
            }
        }
        Ok(true)
    }
}

/// Lazily generated stream serving the schedule's stages in order. Each
/// stage repeats a word realizing its target at precision `6h` until the
/// distance is at most `4/(6h)` at a checkpoint `j` (with `j ≥ i` and
/// `j/2^j < 1/h`), then keeps repeating it up to the window end, checking
/// exactly at every position of the window that the distance stays below
/// `1/h`. A failed check ends the stream with a bound violation.
pub fn build_property_p_stream(spec: &ShiftSpec, schedule: PropertyPSchedule, budget: &Budget) -> Result<DigitStream> {
    let k = schedule.targets.first().map_or(1, |q| q.k());
    let realizer = Realizer::new(spec, k)?;
    for (i, q) in schedule.targets.iter().enumerate() {
        realizer.check_target(q)?;
        if !realizer.polytope().contains(q)? {
            return Err(Error::Infeasible(format!(
                "target {i} = {q} is not the block-frequency vector of any invariant measure"
            )));
        }
    }
    if schedule.h_values.contains(&0) {
        return Err(Error::InvalidInput("h values must be positive".into()));
    }
    let index = realizer.index().clone();
    let source = PropertyPSource {
        tuples: schedule.tuples(),
        next_tuple: 0,
        max_stages: budget.max_stages,
        counts: vec![0; index.len()],
        index,
        k,
        n: 0,
        window: RollingWindow::new(),
        tail: Vec::new(),
        stage: None,
        stages_done: 0,
        schedule,
        realizer,
    };
    let ft = source.realizer.spec().clone();
    Ok(DigitStream::new(Box::new(source), ft, budget.max_symbols))
}

/// Window certificates among a stream's certificates.
pub fn window_certificates(certs: &[Certificate]) -> Vec<WindowCertificate> {
    certs
        .iter()
        .filter_map(|c| match c {
            Certificate::Window(w) => Some(w.clone()),
            Certificate::Checkpoint(_) => None,
        })
        .collect()
}

/// One measurement of the averaged frequencies at a window end.
#[derive(Clone, Debug)]
pub struct InheritanceEntry {
    pub stage: usize,
    pub target_index: usize,
    /// Averaging order `r + 1` that was measured.
    pub order: usize,
    pub j: u64,
    pub n: u64,
    pub distance: f64,
    /// `ε/3 + 2j/n + slack`.
    pub bound: f64,
    pub epsilon: f64,
    pub within_bound: bool,
    /// Whether the averaged vector is still within `ε` of the target.
    pub inherited: bool,
    /// The window is shorter than `64·j`, where the bound is too weak to
    /// force closeness.
    pub short_window: bool,
}

#[derive(Clone, Debug, Default)]
pub struct InheritanceReport {
    pub entries: Vec<InheritanceEntry>,
}

impl InheritanceReport {
    pub fn passed(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.within_bound && e.inherited)
    }

    pub fn violations(&self) -> Vec<&InheritanceEntry> {
        self.entries
            .iter()
            .filter(|e| !(e.within_bound && e.inherited))
            .collect()
    }
}

/// Measures the iterated averages `P^(r)_k` (r = 1..=r_max, `PaperN`) at each
/// certificate's window end and compares them with `ε/3 + 2j/n`.
///
/// `slack` absorbs float rounding; for `k > 1` an extra `2(k−1)/j` covers the
/// difference between the certificate's window count and `PaperN`.
pub fn cesaro_inheritance_check(
    symbols: impl IntoIterator<Item = Symbol>,
    spec: &ShiftSpec,
    r_max: usize,
    certificates: &[WindowCertificate],
    slack: f64,
) -> Result<InheritanceReport> {
    if r_max == 0 {
        return Err(Error::InvalidInput("r_max must be >= 1".into()));
    }
    let Some(first) = certificates.first() else {
        return Ok(InheritanceReport::default());
    };
    let k = first.target.k();
    let index = Arc::new(BlockIndex::from_blocks(
        first.target.blocks().clone(),
        spec.alphabet_size(),
    )?);
    let mut tower = FloatCesaroTower::with_index(index, r_max);
    let mut order: Vec<&WindowCertificate> = certificates.iter().collect();
    order.sort_by_key(|c| c.window_end);
    let mut next = 0;
    let mut report = InheritanceReport::default();
    let mut iter = symbols.into_iter();
    while next < order.len() {
        let Some(s) = iter.next() else {
            return Err(Error::Truncated {
                available: tower.consumed(),
                requested: order[next].window_end,
            });
        };
        tower.push(s)?;
        while next < order.len() && order[next].window_end == tower.consumed() {
            let c = order[next];
            let n = tower.consumed();
            for r in 1..=r_max {
                let distance: f64 = tower
                    .values(r)
                    .iter()
                    .zip(c.target.entries())
                    .map(|(p, q)| (p - q.to_f64().unwrap_or(f64::NAN)).abs())
                    .sum();
                let boundary = 2.0 * (k as f64 - 1.0) / c.j as f64;
                let bound = c.epsilon / 3.0 + 2.0 * c.j as f64 / n as f64 + slack + boundary;
                report.entries.push(InheritanceEntry {
                    stage: c.stage,
                    target_index: c.tuple.target_index,
                    order: r,
                    j: c.j,
                    n,
                    distance,
                    bound,
                    epsilon: c.epsilon,
                    within_bound: distance <= bound,
                    inherited: distance < c.epsilon,
                    short_window: n < 64 * c.j,
                });
            }
            next += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> ShiftSpec {
        ShiftSpec::golden_mean().with_spec_constant(1)
    }

    fn targets(spec: &ShiftSpec, k: usize, list: &[&str]) -> Vec<FrequencyVector> {
        let blocks = Arc::new(spec.enumerate_language(k).unwrap());
        list.iter()
            .map(|s| FrequencyVector::parse(blocks.clone(), s).unwrap())
            .collect()
    }

    #[test]
    fn towers() {
        assert_eq!(phi_tower(1, 3, 64).unwrap(), BigUint::from(8u32));
        assert_eq!(phi_tower(2, 2, 64).unwrap(), BigUint::from(16u32));
        assert_eq!(phi_tower(2, 3, 64).unwrap(), BigUint::from(256u32));
        assert!(matches!(phi_tower(3, 3, 64), Err(Error::Budget { .. })));
        assert_eq!(phi_tower(3, 3, 1 << 10).unwrap().bits(), 257);
    }

    #[test]
    fn diagonal_order() {
        let spec = golden();
        let mut s = PropertyPSchedule::new(targets(&spec, 1, &["1,0", "1/2,1/2"]), 10, WindowRule::WindowFactor(4));
        s.max_m = 2;
        s.h_values = vec![10, 20];
        let t = s.tuples();
        assert_eq!(t.len(), 8);
        assert_eq!(t[0], StageTuple { target_index: 0, m: 1, i: 1, h: 10 });
        let sums: Vec<u64> = t
            .iter()
            .map(|x| x.target_index as u64 + x.m as u64 - 1 + x.i - 1 + (x.h / 10 - 1))
            .collect();
        assert!(sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn windows_are_certified() {
        let spec = golden();
        let schedule = PropertyPSchedule::new(targets(&spec, 1, &["1,0", "1/2,1/2"]), 10, WindowRule::WindowFactor(4));
        let budget = Budget {
            max_symbols: 200_000,
            ..Budget::default()
        };
        let mut stream = build_property_p_stream(&spec, schedule, &budget).unwrap();
        let word: Word = stream.by_ref().collect();
        assert!(spec.is_allowed(&word).unwrap());
        let certs = window_certificates(&stream.certificates());
        assert!(certs.len() >= 2);
        for c in &certs {
            assert!(c.sup_distance < c.epsilon);
            assert_eq!(c.window_end, 4 * c.j);
            assert!(c.checkpoint_distance <= 4.0 / c.precision as f64 + 1e-12);
        }
    }

    #[test]
    fn tower_windows_are_too_long() {
        let spec = golden();
        let schedule = PropertyPSchedule::new(targets(&spec, 1, &["1,0"]), 10, WindowRule::TowerExact);
        let mut stream = build_property_p_stream(&spec, schedule, &Budget::default()).unwrap();
        let produced = stream.by_ref().count();
        assert!(produced < 10_000);
        assert!(matches!(stream.termination(), Some(Error::Budget { what: "window end", .. })));
    }
}
