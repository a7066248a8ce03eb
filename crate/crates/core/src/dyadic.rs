//! Exact dyadic rationals and the rational scalar type.
//!
//! Coordinates in the plane are dyadic rationals stored as fixed-point
//! integers with [`FRAC_BITS`] fractional bits. Sums and differences are
//! exact; products of two coordinates are returned as raw `i128` values
//! in units of `2^-(2*FRAC_BITS)` so that areas stay exact as well.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact rational scalar used for traces and measure fractions.
pub type Q = Ratio<i128>;

/// Number of fractional bits carried by every [`Dyadic`].
pub const FRAC_BITS: u32 = 32;

const ONE_RAW: i64 = 1 << FRAC_BITS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DyadicError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("denominator of `{0}` is not a power of two")]
    NotDyadic(String),
    #[error("`{0}` needs more than {FRAC_BITS} binary digits after the point")]
    TooFine(String),
    #[error("`{0}` is out of range")]
    OutOfRange(String),
}

/// A dyadic rational `raw / 2^FRAC_BITS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dyadic(i64);

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic(0);
    pub const ONE: Dyadic = Dyadic(ONE_RAW);

    pub const fn from_raw(raw: i64) -> Self {
        Dyadic(raw)
    }

    pub const fn raw(self) -> i64 {
        self.0
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic(n.checked_mul(ONE_RAW).expect("dyadic integer out of range"))
    }

    /// `num / 2^exp`; panics when `exp > FRAC_BITS`.
    pub fn new(num: i64, exp: u32) -> Self {
        assert!(
            exp <= FRAC_BITS,
            "dyadic exponent {exp} exceeds {FRAC_BITS}"
        );
        Dyadic(
            num.checked_mul(1i64 << (FRAC_BITS - exp))
                .expect("dyadic out of range"),
        )
    }

    /// `2^-exp`.
    pub fn pow2_neg(exp: u32) -> Self {
        Dyadic::new(1, exp)
    }

    pub fn half(self) -> Self {
        assert!(self.0 % 2 == 0, "halving {self} exceeds dyadic precision");
        Dyadic(self.0 / 2)
    }

    pub fn checked_half(self) -> Option<Self> {
        (self.0 % 2 == 0).then_some(Dyadic(self.0 / 2))
    }

    pub fn abs(self) -> Self {
        Dyadic(self.0.abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn min(self, other: Self) -> Self {
        Ord::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        Ord::max(self, other)
    }

    /// Smallest `k >= 0` with `self` an integer multiple of `2^-k`.
    pub fn level(self) -> u32 {
        if self.0 == 0 {
            return 0;
        }
        FRAC_BITS.saturating_sub(self.0.trailing_zeros())
    }

    /// Product in raw units of `2^-(2*FRAC_BITS)`.
    pub fn mul_raw(self, other: Self) -> i128 {
        self.0 as i128 * other.0 as i128
    }

    pub fn mul_int(self, n: i64) -> Self {
        Dyadic(self.0.checked_mul(n).expect("dyadic overflow"))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / ONE_RAW as f64
    }

    pub fn to_q(self) -> Q {
        Q::new(self.0 as i128, ONE_RAW as i128)
    }

    /// Midpoint of two dyadics; exact as long as precision allows.
    pub fn midpoint(a: Self, b: Self) -> Self {
        let sum = a.0 as i128 + b.0 as i128;
        assert!(
            sum % 2 == 0,
            "midpoint of {a} and {b} exceeds dyadic precision"
        );
        Dyadic((sum / 2) as i64)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Self) -> Self {
        Dyadic(self.0.checked_add(rhs.0).expect("dyadic overflow"))
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Self) -> Self {
        Dyadic(self.0.checked_sub(rhs.0).expect("dyadic overflow"))
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Self {
        Dyadic(-self.0)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lvl = self.level();
        let num = self.0 >> (FRAC_BITS - lvl);
        if lvl == 0 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{}", 1u64 << lvl)
        }
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let q = parse_rational(s)?;
        let den = *q.denom();
        if den <= 0 || den & (den - 1) != 0 {
            return Err(DyadicError::NotDyadic(s.to_string()));
        }
        let exp = den.trailing_zeros();
        if exp > FRAC_BITS {
            return Err(DyadicError::TooFine(s.to_string()));
        }
        let raw = q.numer().checked_mul(1i128 << (FRAC_BITS - exp));
        match raw {
            Some(r) if r.abs() < (1i128 << 62) => Ok(Dyadic(r as i64)),
            _ => Err(DyadicError::OutOfRange(s.to_string())),
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `p/q` or a bare integer `p` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Q, DyadicError> {
    let bad = || DyadicError::Malformed(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: i128 = num.parse().map_err(|_| bad())?;
    let den: i128 = den.parse().map_err(|_| bad())?;
    if den <= 0 {
        return Err(bad());
    }
    Ok(Q::new(num, den))
}

/// Formats a rational as `p/q`, or `p` when integral.
pub fn fmt_rational(q: &Q) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let d: Dyadic = "3/8".parse().unwrap();
        assert_eq!(d.to_string(), "3/8");
        assert_eq!("-4/2".parse::<Dyadic>().unwrap().to_string(), "-2");
        assert_eq!("0/1".parse::<Dyadic>().unwrap(), Dyadic::ZERO);
        assert_eq!("7".parse::<Dyadic>().unwrap(), Dyadic::from_int(7));
        assert!(matches!(
            "1/3".parse::<Dyadic>(),
            Err(DyadicError::NotDyadic(_))
        ));
        assert!(matches!(
            "x/2".parse::<Dyadic>(),
            Err(DyadicError::Malformed(_))
        ));
        assert!(matches!(
            format!("1/{}", 1u64 << 40).parse::<Dyadic>(),
            Err(DyadicError::TooFine(_))
        ));
    }

    #[test]
    fn level_and_midpoint() {
        assert_eq!(Dyadic::from_int(5).level(), 0);
        assert_eq!("5/4".parse::<Dyadic>().unwrap().level(), 2);
        let m = Dyadic::midpoint(Dyadic::ZERO, Dyadic::ONE);
        assert_eq!(m.to_string(), "1/2");
        assert_eq!(Dyadic::ONE.half().half().level(), 2);
    }

    #[test]
    fn area_units() {
        let a: Dyadic = "1/2".parse().unwrap();
        let b: Dyadic = "3/4".parse().unwrap();
        let raw = a.mul_raw(b);
        assert_eq!(Q::new(raw, 1i128 << (2 * FRAC_BITS)), Q::new(3, 8));
    }
}
