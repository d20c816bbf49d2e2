use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Index into the alphabet `0..N`.
pub type Symbol = u8;

/// A finite sequence of symbols. Carries no admissibility claim by itself.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Word(Vec::with_capacity(capacity))
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.0.push(symbol);
    }

    pub fn extend_from_slice(&mut self, symbols: &[Symbol]) {
        self.0.extend_from_slice(symbols);
    }

    /// `self` followed by `other`, without padding.
    pub fn concat(&self, other: &[Symbol]) -> Word {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(other);
        Word(out)
    }

    /// `self` repeated `times` times, without padding.
    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    /// Fails with `SymbolOutOfRange` on the first symbol `>= alphabet_size`.
    pub fn check_alphabet(&self, alphabet_size: usize) -> Result<()> {
        check_symbols(&self.0, alphabet_size)
    }
}

pub(crate) fn check_symbols(symbols: &[Symbol], alphabet_size: usize) -> Result<()> {
    match symbols.iter().find(|&&s| s as usize >= alphabet_size) {
        Some(&s) => Err(Error::SymbolOutOfRange {
            symbol: s as u32,
            alphabet_size,
        }),
        None => Ok(()),
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl AsRef<[Symbol]> for Word {
    fn as_ref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl IntoIterator for Word {
    type Item = Symbol;
    type IntoIter = std::vec::IntoIter<Symbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Parses either a run of decimal digits (`"0110"`, one symbol per character)
/// or whitespace/comma separated integers (`"0 1 12 3"`). `""` and `"ε"` give
/// the empty word.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "eps" {
            return Ok(Word::empty());
        }
        if s.contains(|c: char| c.is_whitespace() || c == ',') {
            return s
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<Symbol>()
                        .map_err(|_| Error::InvalidInput(format!("bad symbol {t:?}")))
                })
                .collect();
        }
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::InvalidInput(format!("bad symbol {c:?} in {s:?}")))
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() > 64 {
            let head = Word(self.0[..32].to_vec());
            write!(f, "Word({head}…; len {})", self.0.len())
        } else {
            write!(f, "Word({self})")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "0110".parse().unwrap();
        assert_eq!(w.as_slice(), &[0, 1, 1, 0]);
        assert_eq!(w.to_string(), "0110");

        let big: Word = "0 12 3".parse().unwrap();
        assert_eq!(big.as_slice(), &[0, 12, 3]);
        assert_eq!(big.to_string(), "0 12 3");

        assert!(Word::from_str("").unwrap().is_empty());
        assert_eq!(Word::empty().to_string(), "ε");
        assert!("01x".parse::<Word>().is_err());
    }

    #[test]
    fn alphabet_check() {
        let w: Word = "012".parse().unwrap();
        assert!(w.check_alphabet(3).is_ok());
        assert_eq!(
            w.check_alphabet(2),
            Err(Error::SymbolOutOfRange {
                symbol: 2,
                alphabet_size: 2
            })
        );
    }
}
