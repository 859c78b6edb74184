//! Exact rational probabilities.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Exact rational number used by the oracle. Sums (such as the nine-row
/// coincidence total) may exceed 1, so this is not restricted to `[0, 1]`.
pub type Rational = Ratio<i128>;

/// Largest denominator accepted for a user-supplied probability. Keeps every
/// intermediate product of the oracle enumeration well inside `i128`.
pub const MAX_DENOMINATOR: i128 = 1_000_000_000_000_000;

/// A probability held as a reduced fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalProb(Rational);

impl RationalProb {
    pub const ZERO: Self = Self(Ratio::new_raw(0, 1));
    pub const ONE: Self = Self(Ratio::new_raw(1, 1));
    pub const HALF: Self = Self(Ratio::new_raw(1, 2));

    pub fn new(numer: i128, denom: i128) -> Result<Self> {
        if denom == 0 {
            return Err(Error::MalformedProbability(format!("{numer}/{denom}")));
        }
        Self::from_rational(Ratio::new(numer, denom))
    }

    pub fn from_rational(value: Rational) -> Result<Self> {
        if value < Rational::zero() || value > Rational::one() {
            return Err(Error::ProbabilityOutOfRange(value.to_string()));
        }
        if *value.denom() > MAX_DENOMINATOR {
            return Err(Error::MalformedProbability(format!(
                "{value}: denominator exceeds {MAX_DENOMINATOR}"
            )));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(self) -> i128 {
        *self.0.denom()
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Self(Rational::one() - self.0)
    }

    pub fn to_f64(self) -> f64 {
        ratio_to_f64(self.0)
    }
}

impl Default for RationalProb {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Display for RationalProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `a/b` fractions and plain decimals (`0.375`, `1`, `.5`). Decimals
/// are converted exactly, so `0.375` and `3/8` parse to the same value.
impl FromStr for RationalProb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).and_then(Self::from_rational)
    }
}

/// Parses a non-negative rational written as `a/b` or as a decimal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let malformed = || Error::MalformedProbability(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(malformed());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_digits(n.trim()).ok_or_else(malformed)?;
        let d = parse_digits(d.trim()).ok_or_else(malformed)?;
        if d == 0 {
            return Err(malformed());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int_part, frac_part) = t.split_once('.').unwrap_or((t, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if frac_part.len() > 18 {
        return Err(malformed());
    }
    let int = if int_part.is_empty() {
        0
    } else {
        parse_digits(int_part).ok_or_else(malformed)?
    };
    let frac = if frac_part.is_empty() {
        0
    } else {
        parse_digits(frac_part).ok_or_else(malformed)?
    };
    let scale = 10i128.pow(frac_part.len() as u32);
    let numer = int
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(malformed)?;
    Ok(Ratio::new(numer, scale))
}

fn parse_digits(s: &str) -> Option<i128> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || s.len() > 30 {
        return None;
    }
    s.parse().ok()
}

/// Nearest `f64` to an exact rational.
pub fn ratio_to_f64(r: Rational) -> f64 {
    let (n, d) = (*r.numer(), *r.denom());
    let g = n.gcd(&d).max(1);
    (n / g) as f64 / (d / g) as f64
}
