//! Coefficient rings: the integers, the rationals, and the integers
//! localized at a prime.
//!
//! All arithmetic is exact. Elements are stored as arbitrary-precision
//! rationals; the ring determines which elements are valid (ℤ: integral,
//! ℤ₍ₚ₎: denominator coprime to p) and which are units.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Exact scalar. Validity relative to a [`Ring`] is checked where it matters.
pub type Coef = BigRational;

pub fn coef_int(n: i64) -> Coef {
    BigRational::from_integer(BigInt::from(n))
}

pub fn coef_is_integer(c: &Coef) -> bool {
    c.denom().is_one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    /// The integers ℤ.
    Z,
    /// The rationals ℚ.
    Q,
    /// ℤ₍ₚ₎, fractions with denominator coprime to p.
    Zp(u32),
}

impl Ring {
    /// Is `c` an element of this ring?
    pub fn contains(&self, c: &Coef) -> bool {
        match self {
            Ring::Z => coef_is_integer(c),
            Ring::Q => true,
            Ring::Zp(p) => !c.denom().is_multiple_of(&BigInt::from(*p)),
        }
    }

    /// Units: ±1 in ℤ, all nonzero in ℚ, valuation-0 elements in ℤ₍ₚ₎.
    pub fn is_unit(&self, c: &Coef) -> bool {
        if c.is_zero() {
            return false;
        }
        match self {
            Ring::Z => coef_is_integer(c) && c.numer().abs().is_one(),
            Ring::Q => true,
            Ring::Zp(p) => self.contains(c) && !c.numer().is_multiple_of(&BigInt::from(*p)),
        }
    }

    /// Inverse when `c` is a unit.
    pub fn inverse(&self, c: &Coef) -> Option<Coef> {
        if self.is_unit(c) {
            Some(c.recip())
        } else {
            None
        }
    }

    /// p-adic valuation of a nonzero element of ℤ₍ₚ₎. For ℤ and ℚ this is
    /// only used as a pivot heuristic and is not meaningful.
    pub fn valuation(&self, c: &Coef) -> Option<u32> {
        let Ring::Zp(p) = self else { return None };
        if c.is_zero() {
            return None;
        }
        let p = BigInt::from(*p);
        let mut v: i64 = 0;
        let mut n = c.numer().clone();
        while n.is_multiple_of(&p) {
            n /= &p;
            v += 1;
        }
        let mut d = c.denom().clone();
        while d.is_multiple_of(&p) {
            d /= &p;
            v -= 1;
        }
        debug_assert!(v >= 0 || !self.contains(c));
        Some(v.max(0) as u32)
    }

    /// Does `a` divide `b` in this ring? (`a` nonzero.)
    pub fn divides(&self, a: &Coef, b: &Coef) -> bool {
        if b.is_zero() {
            return true;
        }
        match self {
            Ring::Z => (b / a).denom().is_one(),
            Ring::Q => true,
            Ring::Zp(_) => self.valuation(a) <= self.valuation(b),
        }
    }

    /// Canonical associate of a diagonal entry in Smith normal form:
    /// ℤ: |d|; ℚ: 1; ℤ₍ₚ₎: p^v.
    pub fn normalize_divisor(&self, c: &Coef) -> Coef {
        if c.is_zero() {
            return Coef::zero();
        }
        match self {
            Ring::Z => c.abs(),
            Ring::Q => Coef::one(),
            Ring::Zp(p) => {
                let v = self.valuation(c).unwrap();
                coef_int(*p as i64).pow(v as i32)
            }
        }
    }

    /// Torsion order contributed by a nonunit nonzero divisor, as a positive
    /// integer (p^v for ℤ₍ₚ₎, |d| for ℤ). None for units or over ℚ.
    pub fn torsion_order(&self, c: &Coef) -> Option<BigUint> {
        if c.is_zero() || self.is_unit(c) {
            return None;
        }
        match self {
            Ring::Q => None,
            _ => {
                let n = self.normalize_divisor(c);
                debug_assert!(n.denom().is_one());
                Some(n.numer().magnitude().clone())
            }
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Z => write!(f, "Z"),
            Ring::Q => write!(f, "Q"),
            Ring::Zp(p) => write!(f, "Zp:{}", p),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unrecognized ring `{0}` (expected Z, Q, or Zp:<p>)")]
pub struct RingParseError(String);

impl FromStr for Ring {
    type Err = RingParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Z" => Ok(Ring::Z),
            "Q" => Ok(Ring::Q),
            _ => {
                if let Some(p) = s.strip_prefix("Zp:") {
                    let p: u32 = p.parse().map_err(|_| RingParseError(s.into()))?;
                    if p < 2 || !is_prime(p) {
                        return Err(RingParseError(s.into()));
                    }
                    Ok(Ring::Zp(p))
                } else {
                    Err(RingParseError(s.into()))
                }
            }
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    let n = n as u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_per_ring() {
        let two = coef_int(2);
        let half = Coef::new(BigInt::from(1), BigInt::from(2));
        assert!(!Ring::Z.is_unit(&two));
        assert!(Ring::Q.is_unit(&two));
        assert!(Ring::Zp(3).is_unit(&two));
        assert!(!Ring::Zp(2).is_unit(&two));
        assert!(Ring::Z.is_unit(&coef_int(-1)));
        assert!(!Ring::Z.contains(&half));
        assert!(Ring::Zp(3).contains(&half));
        assert!(!Ring::Zp(2).contains(&half));
    }

    #[test]
    fn valuations() {
        let r = Ring::Zp(3);
        assert_eq!(r.valuation(&coef_int(18)), Some(2));
        assert_eq!(r.valuation(&coef_int(2)), Some(0));
        let two_ninths = Coef::new(BigInt::from(2), BigInt::from(9));
        assert!(!r.contains(&two_ninths));
    }

    #[test]
    fn divisor_normalization() {
        assert_eq!(Ring::Z.normalize_divisor(&coef_int(-6)), coef_int(6));
        assert_eq!(Ring::Zp(3).normalize_divisor(&coef_int(-18)), coef_int(9));
        assert_eq!(Ring::Q.normalize_divisor(&coef_int(7)), coef_int(1));
        assert_eq!(
            Ring::Zp(3).torsion_order(&coef_int(6)),
            Some(BigUint::from(3u32))
        );
        assert_eq!(Ring::Z.torsion_order(&coef_int(1)), None);
    }

    #[test]
    fn ring_round_trip() {
        for s in ["Z", "Q", "Zp:3", "Zp:17"] {
            let r: Ring = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert!("Zp:4".parse::<Ring>().is_err());
        assert!("F2".parse::<Ring>().is_err());
    }
}
