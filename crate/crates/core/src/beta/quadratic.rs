use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact element `a + b·√d` of the real quadratic field `Q(√d)`.
///
/// `d` is a square-free integer `>= 2`, or `1` for plain rationals (then
/// `b = 0`). Mixing two different irrational fields is an input error.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    d: u64,
}

impl QuadraticNumber {
    pub fn rational(a: BigRational) -> Self {
        QuadraticNumber {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    /// `a + b·√d`; `d` must be square-free.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("field discriminant must be positive".into()));
        }
        if d > 1 && !is_square_free(d) {
            return Err(Error::InvalidInput(format!("{d} is not square-free")));
        }
        if d == 1 {
            return Ok(Self::rational(a + b));
        }
        Ok(QuadraticNumber { a, b, d }.normalized())
    }

    /// The golden mean `(1 + √5) / 2`.
    pub fn golden() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        QuadraticNumber {
            a: half.clone(),
            b: half,
            d: 5,
        }
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::rational)
            .ok_or_else(|| Error::InvalidInput(format!("{x} is not finite")))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn discriminant(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 1;
        }
        self
    }

    fn field(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (1, d) | (d, 1) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(Error::InvalidInput(format!(
                "cannot combine elements of Q(√{x}) and Q(√{y})"
            ))),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        Ok(QuadraticNumber {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d,
        }
        .normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        Ok(QuadraticNumber {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            d,
        }
        .normalized())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.field(other)?;
        let dd = BigRational::from_integer(d.into());
        Ok(QuadraticNumber {
            a: &self.a * &other.a + &self.b * &other.b * dd,
            b: &self.a * &other.b + &self.b * &other.a,
            d,
        }
        .normalized())
    }

    pub fn add_integer(&self, n: i64) -> Self {
        QuadraticNumber {
            a: &self.a + BigRational::from_integer(n.into()),
            b: self.b.clone(),
            d: self.d,
        }
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.b.is_zero() {
            return Some(Self::rational(self.a.recip()));
        }
        // (a - b√d) / (a² - d b²); the norm is nonzero since √d is irrational.
        let norm = &self.a * &self.a
            - &self.b * &self.b * BigRational::from_integer(self.d.into());
        Some(QuadraticNumber {
            a: &self.a / &norm,
            b: -&self.b / &norm,
            d: self.d,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                // Opposite signs: compare a² with d·b².
                let a2 = &self.a * &self.a;
                let db2 = &self.b * &self.b * BigRational::from_integer(self.d.into());
                match a2.cmp(&db2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering> {
        Ok(self.sub(other)?.signum())
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let mut m = match self.to_f64() {
            x if x.is_finite() => BigInt::from(x.floor() as i64),
            _ => self.a.floor().to_integer(),
        };
        // Correct the float guess with exact comparisons.
        loop {
            let below = self.add_integer_big(&(-&m));
            if below.signum() == Ordering::Less {
                m -= 1;
                continue;
            }
            let above = self.add_integer_big(&(-(&m + BigInt::one())));
            if above.signum() != Ordering::Less {
                m += 1;
                continue;
            }
            return m;
        }
    }

    fn add_integer_big(&self, n: &BigInt) -> Self {
        QuadraticNumber {
            a: &self.a + BigRational::from_integer(n.clone()),
            b: self.b.clone(),
            d: self.d,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let root = (self.d as f64).sqrt();
        if self.a.is_negative() == self.b.is_negative() || self.a.is_zero() {
            return a + b * root;
        }
        // Opposite signs cancel; divide the exact norm by the conjugate instead.
        let norm = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        norm.to_f64().unwrap_or(f64::NAN) / (a - b * root)
    }

    /// Largest bit length among the numerators and denominators.
    pub fn bits(&self) -> u64 {
        [self.a.numer(), self.a.denom(), self.b.numer(), self.b.denom()]
            .iter()
            .map(|x| x.bits())
            .max()
            .unwrap_or(0)
    }
}

fn is_square_free(d: u64) -> bool {
    let mut p = 2u64;
    while p * p <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", self.b, self.d);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(f, "{}{}{}*sqrt({})", self.a, sign, self.b.abs(), self.d)
    }
}

impl fmt::Debug for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (~{})", self.to_f64())
    }
}

/// Parses an exact rational from `p/q`, an integer, or a decimal literal such
/// as `0.618034` or `-1.5e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse {s:?} as a number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigRational = parse_rational(p)?;
        let q: BigRational = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::InvalidInput("division by zero".into()));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Smallest prime factor based test used by callers that need prime powers.
pub(crate) fn prime_power_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return (m == 1).then_some(p);
        }
        p += 1;
    }
    Some(n)
}
