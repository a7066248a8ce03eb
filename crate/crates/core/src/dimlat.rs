//! Murray-von Neumann dimension values in a fixed model factor.
//!
//! Projection classes in a factor are totally ordered, so every lattice
//! operation here reduces to comparison in that order. All operations are
//! methods on [`FactorType`] because the arithmetic (and the set of legal
//! values) depends on which factor the values live in.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{fmt_rational, parse_rational, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimError {
    #[error("value {value} does not belong to the dimension lattice of factor {factor}")]
    FactorMismatch { factor: FactorType, value: DimValue },
    #[error("sum exceeds the identity class of factor {0}")]
    Overflow(FactorType),
    #[error("cannot parse dimension value `{text}` for factor {factor}")]
    Parse { factor: FactorType, text: String },
    #[error("class pair ({p}, {p_perp}) does not add up to the identity of {factor}")]
    NotComplementary {
        factor: FactorType,
        p: DimValue,
        p_perp: DimValue,
    },
}

/// The model factor a computation lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorType {
    /// Matrix algebra `M_n`, `n >= 1`.
    IFin(u64),
    /// `B(H)` with `dim H = aleph_k`.
    IInf(u32),
    II1,
    /// σ-finite `II_∞`.
    IIInf,
    /// σ-finite type III.
    III,
}

/// A cardinal `<= aleph_k` for some finite index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cardinal {
    Fin(u64),
    Aleph(u32),
}

/// An extended trace value in `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trace {
    Finite(Q),
    Infinite,
}

impl PartialOrd for Trace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Trace {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Trace::Finite(a), Trace::Finite(b)) => a.cmp(b),
            (Trace::Finite(_), Trace::Infinite) => Ordering::Less,
            (Trace::Infinite, Trace::Finite(_)) => Ordering::Greater,
            (Trace::Infinite, Trace::Infinite) => Ordering::Equal,
        }
    }
}

/// Classes in a σ-finite type III factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flag {
    Zero,
    Inf,
}

/// An element of `P(M)/~` for one of the model factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimValue {
    Card(Cardinal),
    Rat(Q),
    Ext(Trace),
    Flag(Flag),
}

impl DimValue {
    pub fn fin(n: u64) -> Self {
        DimValue::Card(Cardinal::Fin(n))
    }

    pub fn aleph(k: u32) -> Self {
        DimValue::Card(Cardinal::Aleph(k))
    }

    pub fn rat(num: i128, den: i128) -> Self {
        DimValue::Rat(Q::new(num, den))
    }

    pub fn trace(num: i128, den: i128) -> Self {
        DimValue::Ext(Trace::Finite(Q::new(num, den)))
    }

    pub const INFINITE_TRACE: DimValue = DimValue::Ext(Trace::Infinite);
    pub const III_ZERO: DimValue = DimValue::Flag(Flag::Zero);
    pub const III_INF: DimValue = DimValue::Flag(Flag::Inf);

    pub fn is_zero(&self) -> bool {
        match self {
            DimValue::Card(Cardinal::Fin(0)) | DimValue::Flag(Flag::Zero) => true,
            DimValue::Rat(q) | DimValue::Ext(Trace::Finite(q)) => q.is_zero(),
            _ => false,
        }
    }

    /// Whether the class consists of finite projections.
    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            DimValue::Card(Cardinal::Fin(_))
                | DimValue::Rat(_)
                | DimValue::Ext(Trace::Finite(_))
                | DimValue::Flag(Flag::Zero)
        )
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }
}

impl fmt::Display for DimValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimValue::Card(Cardinal::Fin(n)) => write!(f, "{n}"),
            DimValue::Card(Cardinal::Aleph(k)) => write!(f, "aleph{k}"),
            DimValue::Rat(q) | DimValue::Ext(Trace::Finite(q)) => f.write_str(&fmt_rational(q)),
            DimValue::Ext(Trace::Infinite) | DimValue::Flag(Flag::Inf) => f.write_str("inf"),
            DimValue::Flag(Flag::Zero) => f.write_str("0"),
        }
    }
}

impl Serialize for DimValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for FactorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorType::IFin(n) => write!(f, "I_fin {n}"),
            FactorType::IInf(k) => write!(f, "I_inf {k}"),
            FactorType::II1 => f.write_str("II_1"),
            FactorType::IIInf => f.write_str("II_inf"),
            FactorType::III => f.write_str("III"),
        }
    }
}

/// Unordered pair of classes `([p], [1-p])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjClassPair {
    pub p: DimValue,
    pub p_perp: DimValue,
}

impl FactorType {
    pub fn is_finite(&self) -> bool {
        matches!(self, FactorType::IFin(_) | FactorType::II1)
    }

    pub fn is_properly_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn is_sigma_finite(&self) -> bool {
        !matches!(self, FactorType::IInf(k) if *k > 0)
    }

    pub fn is_type_one(&self) -> bool {
        matches!(self, FactorType::IFin(_) | FactorType::IInf(_))
    }

    pub fn zero(&self) -> DimValue {
        match self {
            FactorType::IFin(_) | FactorType::IInf(_) => DimValue::fin(0),
            FactorType::II1 => DimValue::Rat(Q::zero()),
            FactorType::IIInf => DimValue::Ext(Trace::Finite(Q::zero())),
            FactorType::III => DimValue::III_ZERO,
        }
    }

    /// Class of the identity projection.
    pub fn identity(&self) -> DimValue {
        match self {
            FactorType::IFin(n) => DimValue::fin(*n),
            FactorType::IInf(k) => DimValue::aleph(*k),
            FactorType::II1 => DimValue::Rat(Q::one()),
            FactorType::IIInf => DimValue::INFINITE_TRACE,
            FactorType::III => DimValue::III_INF,
        }
    }

    pub fn contains(&self, v: &DimValue) -> bool {
        match (self, v) {
            (FactorType::IFin(n), DimValue::Card(Cardinal::Fin(m))) => m <= n,
            (FactorType::IInf(_), DimValue::Card(Cardinal::Fin(_))) => true,
            (FactorType::IInf(k), DimValue::Card(Cardinal::Aleph(a))) => a <= k,
            (FactorType::II1, DimValue::Rat(q)) => *q >= Q::zero() && *q <= Q::one(),
            (FactorType::IIInf, DimValue::Ext(Trace::Finite(q))) => *q >= Q::zero(),
            (FactorType::IIInf, DimValue::Ext(Trace::Infinite)) => true,
            (FactorType::III, DimValue::Flag(_)) => true,
            _ => false,
        }
    }

    pub fn check(&self, v: &DimValue) -> Result<(), DimError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(DimError::FactorMismatch {
                factor: *self,
                value: *v,
            })
        }
    }

    /// Position of `a` relative to `b` in the total order of classes.
    pub fn compare(&self, a: &DimValue, b: &DimValue) -> Result<Ordering, DimError> {
        self.check(a)?;
        self.check(b)?;
        Ok(cmp_unchecked(a, b))
    }

    pub fn leq(&self, a: &DimValue, b: &DimValue) -> Result<bool, DimError> {
        Ok(self.compare(a, b)? != Ordering::Greater)
    }

    /// Class of an orthogonal sum.
    pub fn add(&self, a: &DimValue, b: &DimValue) -> Result<DimValue, DimError> {
        self.check(a)?;
        self.check(b)?;
        let sum = add_unchecked(a, b);
        if self.contains(&sum) {
            Ok(sum)
        } else {
            Err(DimError::Overflow(*self))
        }
    }

    /// Sum of an arbitrary family; the empty sum is the zero class.
    pub fn sum<'a, I>(&self, values: I) -> Result<DimValue, DimError>
    where
        I: IntoIterator<Item = &'a DimValue>,
    {
        values
            .into_iter()
            .try_fold(self.zero(), |acc, v| self.add(&acc, v))
    }

    /// `([p] ∧ [q], [p] ∨ [q])`; central supports are trivial in a factor.
    pub fn meet_join(&self, a: &DimValue, b: &DimValue) -> Result<(DimValue, DimValue), DimError> {
        Ok(match self.compare(a, b)? {
            Ordering::Greater => (*b, *a),
            _ => (*a, *b),
        })
    }

    /// The relation `q ∈ p`: `[q]` lies in the strong closure of `{[p]}`.
    pub fn closure_member(&self, q: &DimValue, p: &DimValue) -> Result<bool, DimError> {
        let ord = self.compare(q, p)?;
        if self.is_finite() {
            Ok(ord == Ordering::Equal)
        } else if p.is_infinite() {
            Ok(true)
        } else {
            Ok(ord != Ordering::Greater)
        }
    }

    /// Cruder class: caps cardinals at `aleph_0`. The identity on σ-finite factors.
    pub fn cruder(&self, v: &DimValue) -> DimValue {
        match v {
            DimValue::Card(Cardinal::Aleph(_)) => DimValue::aleph(0),
            other => *other,
        }
    }

    /// Whether `q` is in the strong closure of the unitary orbit of `p`.
    pub fn projection_orbit_closure(
        &self,
        p: &ProjClassPair,
        q: &ProjClassPair,
    ) -> Result<bool, DimError> {
        self.check_pair(p)?;
        self.check_pair(q)?;
        Ok(self.closure_member(&q.p, &p.p)? && self.closure_member(&q.p_perp, &p.p_perp)?)
    }

    pub fn pair(&self, p: DimValue, p_perp: DimValue) -> Result<ProjClassPair, DimError> {
        let pair = ProjClassPair { p, p_perp };
        self.check_pair(&pair)?;
        Ok(pair)
    }

    fn check_pair(&self, pair: &ProjClassPair) -> Result<(), DimError> {
        let total = self.add(&pair.p, &pair.p_perp);
        match total {
            Ok(t) if t == self.identity() => Ok(()),
            Ok(_) | Err(DimError::Overflow(_)) => Err(DimError::NotComplementary {
                factor: *self,
                p: pair.p,
                p_perp: pair.p_perp,
            }),
            Err(e) => Err(e),
        }
    }

    /// Scales a class by a measure fraction in `[0, 1]`.
    ///
    /// Traces scale linearly. Cardinal and type III classes only record
    /// whether the fraction is positive: an open set meeting a solid shape
    /// meets it in positive measure, and any nonzero piece of such a
    /// block has the block's class.
    pub fn scale(&self, v: &DimValue, frac: &Q) -> DimValue {
        if frac.is_zero() {
            return self.zero();
        }
        match v {
            DimValue::Rat(q) => DimValue::Rat(q * frac),
            DimValue::Ext(Trace::Finite(q)) => DimValue::Ext(Trace::Finite(q * frac)),
            other => *other,
        }
    }

    /// Parses a value token in the text format of this factor.
    pub fn parse_value(&self, text: &str) -> Result<DimValue, DimError> {
        let bad = || DimError::Parse {
            factor: *self,
            text: text.to_string(),
        };
        let t = text.trim();
        let v = match self {
            FactorType::IFin(_) | FactorType::IInf(_) => {
                if let Some(k) = t.strip_prefix("aleph") {
                    DimValue::aleph(k.parse().map_err(|_| bad())?)
                } else {
                    DimValue::fin(t.parse().map_err(|_| bad())?)
                }
            }
            FactorType::II1 => DimValue::Rat(parse_rational(t).map_err(|_| bad())?),
            FactorType::IIInf => {
                if t == "inf" {
                    DimValue::INFINITE_TRACE
                } else {
                    DimValue::Ext(Trace::Finite(parse_rational(t).map_err(|_| bad())?))
                }
            }
            FactorType::III => match t {
                "inf" => DimValue::III_INF,
                "0" => DimValue::III_ZERO,
                _ => return Err(bad()),
            },
        };
        self.check(&v)?;
        Ok(v)
    }
}

/// Total order on values of the same variant.
///
/// Callers must have checked that both values belong to one factor.
pub(crate) fn cmp_unchecked(a: &DimValue, b: &DimValue) -> Ordering {
    match (a, b) {
        (DimValue::Card(x), DimValue::Card(y)) => x.cmp(y),
        (DimValue::Rat(x), DimValue::Rat(y)) => x.cmp(y),
        (DimValue::Ext(x), DimValue::Ext(y)) => x.cmp(y),
        (DimValue::Flag(x), DimValue::Flag(y)) => x.cmp(y),
        _ => panic!("comparing classes from different factors: {a} vs {b}"),
    }
}

pub(crate) fn add_unchecked(a: &DimValue, b: &DimValue) -> DimValue {
    match (a, b) {
        (DimValue::Card(x), DimValue::Card(y)) => DimValue::Card(match (x, y) {
            (Cardinal::Fin(m), Cardinal::Fin(n)) => {
                Cardinal::Fin(m.checked_add(*n).expect("finite cardinal overflow"))
            }
            (Cardinal::Aleph(i), Cardinal::Aleph(j)) => Cardinal::Aleph(*i.max(j)),
            (Cardinal::Aleph(i), Cardinal::Fin(_)) | (Cardinal::Fin(_), Cardinal::Aleph(i)) => {
                Cardinal::Aleph(*i)
            }
        }),
        (DimValue::Rat(x), DimValue::Rat(y)) => DimValue::Rat(x + y),
        (DimValue::Ext(x), DimValue::Ext(y)) => DimValue::Ext(match (x, y) {
            (Trace::Finite(p), Trace::Finite(q)) => Trace::Finite(p + q),
            _ => Trace::Infinite,
        }),
        (DimValue::Flag(x), DimValue::Flag(y)) => DimValue::Flag(*x.max(y)),
        _ => panic!("adding classes from different factors: {a} + {b}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_examples() {
        let ii1 = FactorType::II1;
        assert_eq!(
            ii1.add(&DimValue::rat(1, 2), &DimValue::rat(1, 4)).unwrap(),
            DimValue::rat(3, 4)
        );
        let i1 = FactorType::IInf(1);
        assert_eq!(
            i1.add(&DimValue::fin(7), &DimValue::aleph(0)).unwrap(),
            DimValue::aleph(0)
        );
        assert_eq!(
            i1.add(&DimValue::aleph(0), &DimValue::aleph(1)).unwrap(),
            DimValue::aleph(1)
        );
    }

    #[test]
    fn add_errors() {
        let ii1 = FactorType::II1;
        assert_eq!(
            ii1.add(&DimValue::rat(2, 3), &DimValue::rat(1, 2)),
            Err(DimError::Overflow(FactorType::II1))
        );
        assert!(matches!(
            ii1.add(&DimValue::fin(1), &DimValue::rat(1, 2)),
            Err(DimError::FactorMismatch { .. })
        ));
        assert!(matches!(
            FactorType::IInf(0).add(&DimValue::aleph(1), &DimValue::fin(0)),
            Err(DimError::FactorMismatch { .. })
        ));
    }

    #[test]
    fn leq_examples() {
        assert!(FactorType::IIInf
            .leq(&DimValue::trace(3, 2), &DimValue::INFINITE_TRACE)
            .unwrap());
        assert!(!FactorType::IInf(2)
            .leq(&DimValue::aleph(1), &DimValue::aleph(0))
            .unwrap());
        assert!(FactorType::III
            .leq(&DimValue::III_ZERO, &DimValue::III_INF)
            .unwrap());
    }

    #[test]
    fn meet_join_examples() {
        let (m, j) = FactorType::II1
            .meet_join(&DimValue::rat(1, 3), &DimValue::rat(1, 2))
            .unwrap();
        assert_eq!((m, j), (DimValue::rat(1, 3), DimValue::rat(1, 2)));
        let (m, j) = FactorType::IInf(1)
            .meet_join(&DimValue::aleph(1), &DimValue::fin(5))
            .unwrap();
        assert_eq!((m, j), (DimValue::fin(5), DimValue::aleph(1)));
        let (m, j) = FactorType::III
            .meet_join(&DimValue::III_INF, &DimValue::III_INF)
            .unwrap();
        assert_eq!((m, j), (DimValue::III_INF, DimValue::III_INF));
    }

    #[test]
    fn closure_member_examples() {
        assert!(FactorType::IIInf
            .closure_member(&DimValue::trace(3, 2), &DimValue::trace(2, 1))
            .unwrap());
        assert!(FactorType::IInf(1)
            .closure_member(&DimValue::aleph(1), &DimValue::aleph(0))
            .unwrap());
        assert!(!FactorType::II1
            .closure_member(&DimValue::rat(1, 3), &DimValue::rat(1, 2))
            .unwrap());
        assert!(!FactorType::IIInf
            .closure_member(&DimValue::trace(5, 2), &DimValue::trace(2, 1))
            .unwrap());
    }

    #[test]
    fn cruder_examples() {
        assert_eq!(
            FactorType::IInf(2).cruder(&DimValue::aleph(2)),
            DimValue::aleph(0)
        );
        assert_eq!(
            FactorType::IIInf.cruder(&DimValue::trace(5, 2)),
            DimValue::trace(5, 2)
        );
        assert_eq!(
            FactorType::IInf(1).cruder(&DimValue::fin(4)),
            DimValue::fin(4)
        );
    }

    #[test]
    fn projection_orbit_examples() {
        let f = FactorType::IInf(0);
        let p = f.pair(DimValue::aleph(0), DimValue::aleph(0)).unwrap();
        let q = f.pair(DimValue::fin(3), DimValue::aleph(0)).unwrap();
        assert!(f.projection_orbit_closure(&p, &q).unwrap());

        let p = f.pair(DimValue::fin(2), DimValue::aleph(0)).unwrap();
        assert!(!f.projection_orbit_closure(&p, &q).unwrap());

        let g = FactorType::II1;
        let half = g.pair(DimValue::rat(1, 2), DimValue::rat(1, 2)).unwrap();
        assert!(g.projection_orbit_closure(&half, &half).unwrap());
    }

    #[test]
    fn cofinite_projections_grow() {
        let f = FactorType::IInf(0);
        let p = f.pair(DimValue::aleph(0), DimValue::fin(2)).unwrap();
        let bigger = f.pair(DimValue::aleph(0), DimValue::fin(1)).unwrap();
        let smaller = f.pair(DimValue::aleph(0), DimValue::fin(3)).unwrap();
        assert!(f.projection_orbit_closure(&p, &bigger).unwrap());
        assert!(!f.projection_orbit_closure(&p, &smaller).unwrap());
    }

    #[test]
    fn pair_must_be_complementary() {
        assert!(matches!(
            FactorType::II1.pair(DimValue::rat(1, 2), DimValue::rat(1, 4)),
            Err(DimError::NotComplementary { .. })
        ));
        assert!(matches!(
            FactorType::IInf(1).pair(DimValue::aleph(0), DimValue::fin(4)),
            Err(DimError::NotComplementary { .. })
        ));
        assert!(FactorType::IFin(3)
            .pair(DimValue::fin(1), DimValue::fin(2))
            .is_ok());
    }

    #[test]
    fn parse_values() {
        assert_eq!(
            FactorType::IInf(1).parse_value("aleph1").unwrap(),
            DimValue::aleph(1)
        );
        assert_eq!(
            FactorType::IIInf.parse_value("inf").unwrap(),
            DimValue::INFINITE_TRACE
        );
        assert!(FactorType::II1.parse_value("3/2").is_err());
        assert!(FactorType::IFin(2).parse_value("3").is_err());
    }
}
