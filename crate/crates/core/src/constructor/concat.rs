//! Joining allowed words with short paddings.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::shiftspace::{ShiftSpec, Symbol, Word};

/// Finds and caches paddings for a shift with a known specification constant.
///
/// Paddings depend only on the last `context_len` symbols of everything
/// emitted so far and the first `context_len` symbols of the next word, so
/// they are cached by that pair.
#[derive(Debug)]
pub(crate) struct Joiner {
    spec: ShiftSpec,
    j: usize,
    ctx: usize,
    cache: HashMap<(Vec<Symbol>, Vec<Symbol>), Word>,
}

impl Joiner {
    pub fn new(spec: &ShiftSpec) -> Result<Self> {
        let j = spec.spec_constant().ok_or(Error::MissingSpecificationConstant)?;
        let spec = spec.to_finite_type();
        let ctx = spec.context_len();
        Ok(Joiner {
            spec,
            j,
            ctx,
            cache: HashMap::new(),
        })
    }

    pub fn spec(&self) -> &ShiftSpec {
        &self.spec
    }

    pub fn spec_constant(&self) -> usize {
        self.j
    }

    pub fn context_len(&self) -> usize {
        self.ctx
    }

    /// Padding between a word ending in `left` and one starting with `right`.
    /// Only the last/first `context_len` symbols are used.
    pub fn padding(&mut self, left: &[Symbol], right: &[Symbol]) -> Result<Word> {
        if left.is_empty() || right.is_empty() || self.ctx == 0 {
            return Ok(Word::empty());
        }
        let l = &left[left.len().saturating_sub(self.ctx)..];
        let r = &right[..right.len().min(self.ctx)];
        let key = (l.to_vec(), r.to_vec());
        if let Some(u) = self.cache.get(&key) {
            return Ok(u.clone());
        }
        let u = self.spec.find_padding_unchecked(l, r, self.j)?;
        self.cache.insert(key, u.clone());
        Ok(u)
    }
}

/// `w_1 ⊙ w_2 ⊙ … ⊙ w_m`: the words in order, each junction bridged by the
/// shortest (then lexicographically least) padding of length at most the
/// specification constant. Junctions are padded against everything emitted
/// so far, which matters when a word is shorter than the shift's memory.
pub fn odot_concat(spec: &ShiftSpec, words: &[Word]) -> Result<Word> {
    let mut joiner = Joiner::new(spec)?;
    for w in words {
        check_allowed(joiner.spec(), w)?;
    }
    let mut out = Word::empty();
    for w in words {
        let u = joiner.padding(&out, w)?;
        out.extend_from_slice(&u);
        out.extend_from_slice(w);
    }
    Ok(out)
}

/// `γ ⊙ γ ⊙ … ⊙ γ` with `times` copies (empty for zero copies).
pub fn odot_power(spec: &ShiftSpec, gamma: &Word, times: usize) -> Result<Word> {
    let mut joiner = Joiner::new(spec)?;
    check_allowed(joiner.spec(), gamma)?;
    let mut out = Word::with_capacity(gamma.len() * times);
    for _ in 0..times {
        let u = joiner.padding(&out, gamma)?;
        out.extend_from_slice(&u);
        out.extend_from_slice(gamma);
    }
    Ok(out)
}

pub(crate) fn check_allowed(spec: &ShiftSpec, w: &[Symbol]) -> Result<()> {
    if spec.is_allowed(w)? {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("word {} is not allowed", Word::from(w))))
    }
}
