//! Plain-text formats: digit files, `key=value` records and config files.
//!
//! A digit file is UTF-8 text. Lines starting with `#` are headers of the
//! form `# key=value`; every other line holds symbols as base-10 integers
//! separated by single spaces, 64 per line.
//!
//! Records (certificates, trajectory rows, reports) are one per line, as
//! space-separated `key=value` fields. Values never contain spaces.

use std::io::{self, BufRead, Write};

use num::{BigInt, BigRational, Integer, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::shiftspace::{Symbol, Word};

/// Symbols per line in a digit file.
pub const SYMBOLS_PER_LINE: usize = 64;

/// Streaming writer for digit files.
pub struct DigitWriter<W: Write> {
    inner: W,
    column: usize,
    started: bool,
}

impl<W: Write> DigitWriter<W> {
    pub fn new(inner: W) -> Self {
        DigitWriter {
            inner,
            column: 0,
            started: false,
        }
    }

    /// Writes a `# key=value` header line. Headers must precede symbols.
    pub fn header(&mut self, key: &str, value: &str) -> io::Result<()> {
        if self.started {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "header after symbols"));
        }
        writeln!(self.inner, "# {key}={value}")
    }

    pub fn push(&mut self, s: Symbol) -> io::Result<()> {
        self.started = true;
        if self.column > 0 {
            self.inner.write_all(b" ")?;
        }
        write!(self.inner, "{s}")?;
        self.column += 1;
        if self.column == SYMBOLS_PER_LINE {
            self.inner.write_all(b"\n")?;
            self.column = 0;
        }
        Ok(())
    }

    pub fn extend(&mut self, symbols: impl IntoIterator<Item = Symbol>) -> io::Result<()> {
        symbols.into_iter().try_for_each(|s| self.push(s))
    }

    pub fn finish(mut self) -> io::Result<W> {
        if self.column > 0 {
            self.inner.write_all(b"\n")?;
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Contents of a digit file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DigitFile {
    pub headers: Vec<(String, String)>,
    pub symbols: Word,
}

impl DigitFile {
    pub fn header(&self, key: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn write_digit_file<W: Write>(out: W, headers: &[(&str, String)], symbols: &[Symbol]) -> io::Result<W> {
    let mut w = DigitWriter::new(out);
    for (k, v) in headers {
        w.header(k, v)?;
    }
    w.extend(symbols.iter().copied())?;
    w.finish()
}

pub fn read_digit_file<R: BufRead>(input: R) -> Result<DigitFile> {
    let mut file = DigitFile::default();
    let mut symbols = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidInput(format!("reading digit file: {e}")))?;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                file.headers.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        for tok in trimmed.split_whitespace() {
            let s: Symbol = tok.parse().map_err(|_| {
                Error::InvalidInput(format!("line {}: `{tok}` is not a symbol", lineno + 1))
            })?;
            symbols.push(s);
        }
    }
    file.symbols = Word::new(symbols);
    Ok(file)
}

/// One `key=value` record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Record {
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string().replace(char::is_whitespace, "_");
        self.fields.push((key.to_string(), v));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse(line: &str) -> Result<Self> {
        let mut r = Record::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("`{tok}` is not a key=value field")))?;
            r.fields.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}

impl std::fmt::Display for Record {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Exact decimal rounding of a rational to 12 fractional digits (half away
/// from zero).
pub fn decimal12(x: &BigRational) -> String {
    let scale = BigInt::from(10u64).pow(12);
    let scaled = x * BigRational::from_integer(scale.clone());
    let (q, r) = scaled.numer().abs().div_rem(scaled.denom());
    let twice = r * 2;
    let mut units = q;
    if twice >= *scaled.denom() {
        units += 1;
    }
    let (int, frac) = units.div_rem(&scale);
    let sign = if x.is_negative() && (int.is_positive() || frac.is_positive()) {
        "-"
    } else {
        ""
    };
    format!("{sign}{int}.{:012}", frac.to_u64().unwrap_or(0))
}

/// Decimal with 12 fractional digits for a float.
pub fn decimal12_f64(x: f64) -> String {
    format!("{x:.12}")
}

/// Parses a flat `key=value` config file. Blank lines and lines starting
/// with `#` are ignored; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        out.retain(|(key, _)| *key != k);
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_file_round_trip() {
        let symbols: Vec<Symbol> = (0..150).map(|i| (i % 3) as Symbol).collect();
        let buf = write_digit_file(Vec::new(), &[("shift", "full:3".into())], &symbols).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# shift=full:3");
        assert_eq!(lines.len(), 1 + 3);
        assert_eq!(lines[1].split(' ').count(), 64);
        let back = read_digit_file(buf.as_slice()).unwrap();
        assert_eq!(back.header("shift"), Some("full:3"));
        assert_eq!(back.symbols.as_slice(), symbols.as_slice());
    }

    #[test]
    fn bad_symbol_is_reported() {
        assert!(read_digit_file("0 1 x".as_bytes()).is_err());
        assert!(read_digit_file("0 1 300".as_bytes()).is_err());
    }

    #[test]
    fn decimals() {
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        assert_eq!(decimal12(&r(2, 3)), "0.666666666667");
        assert_eq!(decimal12(&r(1, 2)), "0.500000000000");
        assert_eq!(decimal12(&r(-1, 3)), "-0.333333333333");
        assert_eq!(decimal12(&r(7, 1)), "7.000000000000");
        assert_eq!(decimal12(&r(0, 1)), "0.000000000000");
    }

    #[test]
    fn records_and_config() {
        let rec = Record::new().with("n", 4).with("block", "0").with("value", "0.5");
        assert_eq!(rec.to_string(), "n=4 block=0 value=0.5");
        assert_eq!(Record::parse(&rec.to_string()).unwrap(), rec);
        let cfg = parse_config("# c\nshift = golden\nk=1\nk=2\n").unwrap();
        assert_eq!(cfg, vec![("shift".into(), "golden".into()), ("k".into(), "2".into())]);
        assert!(parse_config("nokey").is_err());
    }
}
