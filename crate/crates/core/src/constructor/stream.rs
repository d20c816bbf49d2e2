//! Lazily generated digit streams carrying stage certificates.

use std::fmt;

use super::checkpoint::CheckpointEntry;
use super::property_p::WindowCertificate;
use crate::error::{Error, Result};
use crate::shiftspace::{ShiftSpec, Symbol};

/// Evidence attached to a completed construction stage.
#[derive(Clone, Debug)]
pub enum Certificate {
    Checkpoint(CheckpointEntry),
    Window(WindowCertificate),
}

impl Certificate {
    /// Stream position at which the certified stage is complete.
    pub fn end(&self) -> u64 {
        match self {
            Certificate::Checkpoint(c) => c.n,
            Certificate::Window(w) => w.window_end,
        }
    }
}

/// Producer of consecutive chunks of a stream.
pub(crate) trait ChunkSource: Send {
    /// Appends the next symbols to `out` and any certificates they complete
    /// to `certs`. Returns `Ok(false)` once the stream is finished.
    fn next_chunk(&mut self, out: &mut Vec<Symbol>, certs: &mut Vec<Certificate>) -> Result<bool>;
}

/// An infinite (or budget-limited) sequence of symbols from a construction.
///
/// Iterating yields symbols; iteration stops at the symbol budget, at the end
/// of a finite plan, or at the first error, which is then available from
/// [`DigitStream::termination`].
pub struct DigitStream {
    source: Box<dyn ChunkSource>,
    spec: ShiftSpec,
    buffer: Vec<Symbol>,
    pos: usize,
    produced: u64,
    max_symbols: u64,
    pending: Vec<Certificate>,
    termination: Option<Error>,
    finished: bool,
}

impl fmt::Debug for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DigitStream")
            .field("produced", &self.produced)
            .field("max_symbols", &self.max_symbols)
            .field("finished", &self.finished)
            .finish()
    }
}

impl DigitStream {
    pub(crate) fn new(source: Box<dyn ChunkSource>, spec: ShiftSpec, max_symbols: u64) -> Self {
        DigitStream {
            source,
            spec,
            buffer: Vec::new(),
            pos: 0,
            produced: 0,
            max_symbols,
            pending: Vec::new(),
            termination: None,
            finished: false,
        }
    }

    pub fn spec(&self) -> &ShiftSpec {
        &self.spec
    }

    /// Symbols yielded so far.
    pub fn produced(&self) -> u64 {
        self.produced
    }

    /// Certificates of every stage that ends within the symbols yielded so far.
    pub fn certificates(&self) -> Vec<Certificate> {
        self.pending
            .iter()
            .filter(|c| c.end() <= self.produced)
            .cloned()
            .collect()
    }

    /// Why the stream stopped, if it stopped for a reason other than the end
    /// of a finite plan.
    pub fn termination(&self) -> Option<&Error> {
        self.termination.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Collects up to `n` further symbols.
    pub fn take_symbols(&mut self, n: u64) -> Vec<Symbol> {
        let mut out = Vec::new();
        while (out.len() as u64) < n {
            match self.next() {
                Some(s) => out.push(s),
                None => break,
            }
        }
        out
    }

    fn refill(&mut self) -> bool {
        if self.finished {
            return false;
        }
        self.buffer.clear();
        self.pos = 0;
        while self.buffer.is_empty() {
            match self.source.next_chunk(&mut self.buffer, &mut self.pending) {
                Ok(true) => {}
                Ok(false) => {
                    self.source = Box::new(Exhausted);
                    if self.buffer.is_empty() {
                        self.finished = true;
                        return false;
                    }
                }
                Err(e) => {
                    self.termination = Some(e);
                    if self.buffer.is_empty() {
                        self.finished = true;
                        return false;
                    }
                    // Hand out what was produced before the failure first.
                    self.source = Box::new(Exhausted);
                }
            }
        }
        true
    }
}

struct Exhausted;

impl ChunkSource for Exhausted {
    fn next_chunk(&mut self, _: &mut Vec<Symbol>, _: &mut Vec<Certificate>) -> Result<bool> {
        Ok(false)
    }
}

impl Iterator for DigitStream {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        if self.pos == self.buffer.len() && !self.refill() {
            return None;
        }
        if self.produced >= self.max_symbols {
            self.finished = true;
            self.termination.get_or_insert(Error::Budget {
                what: "symbol",
                limit: self.max_symbols,
            });
            return None;
        }
        let s = self.buffer[self.pos];
        self.pos += 1;
        self.produced += 1;
        Some(s)
    }
}
