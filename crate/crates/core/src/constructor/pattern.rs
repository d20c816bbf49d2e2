//! Compact descriptions of long words built from repeated pieces, with exact
//! block counts computed without expanding the repetitions.

use std::sync::Arc;

use crate::error::Result;
use crate::freqstats::{BlockIndex, RollingWindow};
use crate::shiftspace::{Symbol, Word};

/// Literal bodies shorter than this are grouped before repetition so that
/// emission moves reasonably sized slices.
const MIN_REPEAT_BODY: usize = 256;

#[derive(Debug)]
pub enum Pattern {
    Literal(Word),
    /// `body (sep body)^(times-1)`; empty when `times == 0`.
    Repeat {
        body: Arc<Pattern>,
        sep: Arc<Pattern>,
        times: u64,
        len: u64,
    },
    Concat {
        parts: Vec<Arc<Pattern>>,
        len: u64,
    },
}

impl Pattern {
    pub fn literal(w: impl Into<Word>) -> Arc<Pattern> {
        Arc::new(Pattern::Literal(w.into()))
    }

    pub fn concat(parts: Vec<Arc<Pattern>>) -> Arc<Pattern> {
        let parts: Vec<_> = parts.into_iter().filter(|p| !p.is_empty()).collect();
        let len = parts.iter().map(|p| p.len()).fold(0u64, u64::saturating_add);
        Arc::new(Pattern::Concat { parts, len })
    }

    pub fn repeat(body: Arc<Pattern>, sep: Word, times: u64) -> Arc<Pattern> {
        if let (Pattern::Literal(w), true) = (body.as_ref(), sep.is_empty()) {
            if !w.is_empty() && w.len() < MIN_REPEAT_BODY && times > 1 {
                let group = (MIN_REPEAT_BODY.div_ceil(w.len()) as u64).min(times);
                let grouped = Pattern::literal(w.repeat(group as usize));
                let rest = times % group;
                let main = Self::repeat_raw(grouped, Pattern::literal(Word::empty()), times / group);
                return if rest == 0 {
                    main
                } else {
                    Pattern::concat(vec![main, Pattern::literal(w.repeat(rest as usize))])
                };
            }
        }
        Self::repeat_raw(body, Pattern::literal(sep), times)
    }

    fn repeat_raw(body: Arc<Pattern>, sep: Arc<Pattern>, times: u64) -> Arc<Pattern> {
        let len = if times == 0 {
            0
        } else {
            body.len()
                .saturating_mul(times)
                .saturating_add(sep.len().saturating_mul(times - 1))
        };
        Arc::new(Pattern::Repeat {
            body,
            sep,
            times,
            len,
        })
    }

    pub fn len(&self) -> u64 {
        match self {
            Pattern::Literal(w) => w.len() as u64,
            Pattern::Repeat { len, .. } | Pattern::Concat { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First `m` symbols (fewer if the pattern is shorter).
    pub fn head(&self, m: usize) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(m);
        self.push_head(m, &mut out);
        out
    }

    fn push_head(&self, m: usize, out: &mut Vec<Symbol>) {
        if out.len() >= m {
            return;
        }
        match self {
            Pattern::Literal(w) => {
                let take = (m - out.len()).min(w.len());
                out.extend_from_slice(&w[..take]);
            }
            Pattern::Concat { parts, .. } => {
                for p in parts {
                    p.push_head(m, out);
                    if out.len() >= m {
                        return;
                    }
                }
            }
            Pattern::Repeat {
                body, sep, times, ..
            } => {
                for copy in 0..*times {
                    if copy > 0 {
                        sep.push_head(m, out);
                    }
                    body.push_head(m, out);
                    if out.len() >= m {
                        return;
                    }
                }
            }
        }
    }

    /// Last `m` symbols (fewer if the pattern is shorter).
    pub fn tail(&self, m: usize) -> Vec<Symbol> {
        let mut rev = Vec::with_capacity(m);
        self.push_tail_rev(m, &mut rev);
        rev.reverse();
        rev
    }

    fn push_tail_rev(&self, m: usize, rev: &mut Vec<Symbol>) {
        if rev.len() >= m {
            return;
        }
        match self {
            Pattern::Literal(w) => {
                let take = (m - rev.len()).min(w.len());
                rev.extend(w[w.len() - take..].iter().rev());
            }
            Pattern::Concat { parts, .. } => {
                for p in parts.iter().rev() {
                    p.push_tail_rev(m, rev);
                    if rev.len() >= m {
                        return;
                    }
                }
            }
            Pattern::Repeat {
                body, sep, times, ..
            } => {
                for copy in 0..*times {
                    if copy > 0 {
                        sep.push_tail_rev(m, rev);
                    }
                    body.push_tail_rev(m, rev);
                    if rev.len() >= m {
                        return;
                    }
                }
            }
        }
    }

    /// Adds the counts of every length-`k` window that ends inside this
    /// pattern when it follows `carry` (the last `< k` symbols before it),
    /// then updates `carry` to the last `k - 1` symbols seen.
    pub fn accumulate(&self, index: &BlockIndex, carry: &mut Vec<Symbol>, counts: &mut [u64]) -> Result<()> {
        match self {
            Pattern::Literal(w) => {
                let k = index.k();
                let mut window = RollingWindow::new();
                for &s in carry.iter() {
                    window.push(index, s)?;
                }
                for &s in w.iter() {
                    if let Some(b) = window.push(index, s)? {
                        counts[b] += 1;
                    }
                }
                carry.extend_from_slice(w);
                let drop = carry.len().saturating_sub(k - 1);
                carry.drain(..drop);
            }
            Pattern::Concat { parts, .. } => {
                for p in parts {
                    p.accumulate(index, carry, counts)?;
                }
            }
            Pattern::Repeat {
                body, sep, times, ..
            } => {
                if *times == 0 {
                    return Ok(());
                }
                body.accumulate(index, carry, counts)?;
                let mut remaining = times - 1;
                let mut copy_counts = vec![0u64; counts.len()];
                while remaining > 0 {
                    let before = carry.clone();
                    copy_counts.iter_mut().for_each(|c| *c = 0);
                    sep.accumulate(index, carry, &mut copy_counts)?;
                    body.accumulate(index, carry, &mut copy_counts)?;
                    remaining -= 1;
                    // Once the carry is periodic every further copy adds the same counts.
                    let factor = if *carry == before { 1 + remaining } else { 1 };
                    for (c, d) in counts.iter_mut().zip(&copy_counts) {
                        *c += d * factor;
                    }
                    if factor > 1 {
                        break;
                    }
                }
            }
        }
        Ok(())
    }

    /// Window counts of the pattern on its own.
    pub fn counts(&self, index: &BlockIndex) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; index.len()];
        self.accumulate(index, &mut Vec::new(), &mut counts)?;
        Ok(counts)
    }

    pub fn materialize(self: &Arc<Self>) -> Word {
        let mut out = Vec::with_capacity(self.len() as usize);
        let mut cursor = PatternCursor::new(self.clone());
        while cursor.fill(&mut out, usize::MAX) > 0 {}
        Word::new(out)
    }
}

/// Resumable left-to-right emission of a pattern.
#[derive(Debug)]
pub struct PatternCursor {
    stack: Vec<Frame>,
}

#[derive(Debug)]
enum Frame {
    Literal { node: Arc<Pattern>, pos: usize },
    Concat { node: Arc<Pattern>, next: usize },
    Repeat { node: Arc<Pattern>, emitted: u64, sep_next: bool },
}

impl PatternCursor {
    pub fn new(p: Arc<Pattern>) -> Self {
        let mut c = PatternCursor { stack: Vec::new() };
        c.push(p);
        c
    }

    fn push(&mut self, p: Arc<Pattern>) {
        let frame = match p.as_ref() {
            Pattern::Literal(_) => Frame::Literal { node: p, pos: 0 },
            Pattern::Concat { .. } => Frame::Concat { node: p, next: 0 },
            Pattern::Repeat { .. } => Frame::Repeat {
                node: p,
                emitted: 0,
                sep_next: false,
            },
        };
        self.stack.push(frame);
    }

    pub fn is_done(&self) -> bool {
        self.stack.is_empty()
    }

    /// Appends up to `max` symbols to `out`; returns how many were appended
    /// (0 only when the pattern is exhausted).
    pub fn fill(&mut self, out: &mut Vec<Symbol>, max: usize) -> usize {
        let mut written = 0;
        while written < max {
            let Some(top) = self.stack.last_mut() else { break };
            match top {
                Frame::Literal { node, pos } => {
                    let Pattern::Literal(w) = node.as_ref() else { unreachable!() };
                    let take = (w.len() - *pos).min(max - written);
                    out.extend_from_slice(&w[*pos..*pos + take]);
                    *pos += take;
                    written += take;
                    if *pos == w.len() {
                        self.stack.pop();
                    }
                }
                Frame::Concat { node, next } => {
                    let Pattern::Concat { parts, .. } = node.as_ref() else { unreachable!() };
                    if *next == parts.len() {
                        self.stack.pop();
                    } else {
                        let child = parts[*next].clone();
                        *next += 1;
                        self.push(child);
                    }
                }
                Frame::Repeat {
                    node,
                    emitted,
                    sep_next,
                } => {
                    let Pattern::Repeat {
                        body, sep, times, ..
                    } = node.as_ref()
                    else {
                        unreachable!()
                    };
                    if *sep_next {
                        *sep_next = false;
                        let sep = sep.clone();
                        self.push(sep);
                    } else if *emitted == *times {
                        self.stack.pop();
                    } else {
                        *emitted += 1;
                        *sep_next = *emitted < *times;
                        let body = body.clone();
                        self.push(body);
                    }
                }
            }
        }
        written
    }
}
