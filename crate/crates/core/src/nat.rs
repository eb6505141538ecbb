//! Arbitrary-precision non-negative integers with a machine-word fast path.
//!
//! Values that fit in a `u128` are stored inline; anything larger spills to a
//! [`BigUint`]. The representation is always normalized, so two equal values
//! have the same variant and derived equality and hashing are sound.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(u128),
    /// Invariant: strictly greater than `u128::MAX`.
    Big(BigUint),
}

/// A non-negative integer of unbounded size.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nat(Repr);

impl Nat {
    pub const ZERO: Nat = Nat(Repr::Small(0));
    pub const ONE: Nat = Nat(Repr::Small(1));

    fn from_big(b: BigUint) -> Nat {
        match b.to_u128() {
            Some(v) => Nat(Repr::Small(v)),
            None => Nat(Repr::Big(b)),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.0 {
            Repr::Small(v) => BigUint::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.0 {
            Repr::Small(v) => u64::try_from(v).ok(),
            Repr::Big(_) => None,
        }
    }

    pub fn to_u128(&self) -> Option<u128> {
        match self.0 {
            Repr::Small(v) => Some(v),
            Repr::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1))
    }

    pub fn is_even(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => v & 1 == 0,
            Repr::Big(b) => b.is_even(),
        }
    }

    pub fn is_odd(&self) -> bool {
        !self.is_even()
    }

    /// Number of significant bits; zero has zero bits.
    pub fn bits(&self) -> u64 {
        match &self.0 {
            Repr::Small(v) => 128 - u64::from(v.leading_zeros()),
            Repr::Big(b) => b.bits(),
        }
    }

    /// Returns `k` when `self == 2^k`.
    pub fn power_of_two_exponent(&self) -> Option<u64> {
        match &self.0 {
            Repr::Small(v) => v.is_power_of_two().then(|| u64::from(v.trailing_zeros())),
            Repr::Big(b) => {
                let tz = b.trailing_zeros()?;
                (tz + 1 == b.bits()).then_some(tz)
            }
        }
    }

    pub fn pow2(k: u64) -> Nat {
        if k < 128 {
            Nat(Repr::Small(1u128 << k))
        } else {
            Nat(Repr::Big(BigUint::from(1u8) << k))
        }
    }

    pub fn half(&self) -> Nat {
        match &self.0 {
            Repr::Small(v) => Nat(Repr::Small(v >> 1)),
            Repr::Big(b) => Nat::from_big(b >> 1u32),
        }
    }

    pub fn double(&self) -> Nat {
        self.shl(1)
    }

    pub fn shl(&self, k: u64) -> Nat {
        match &self.0 {
            Repr::Small(0) => Nat::ZERO,
            Repr::Small(v) if k < 128 && v.leading_zeros() as u64 >= k => Nat(Repr::Small(v << k)),
            _ => Nat::from_big(self.to_biguint() << k),
        }
    }

    /// `3·self + 1`.
    pub fn triple_plus_one(&self) -> Nat {
        match &self.0 {
            Repr::Small(v) => match v.checked_mul(3).and_then(|t| t.checked_add(1)) {
                Some(r) => Nat(Repr::Small(r)),
                None => Nat(Repr::Big(BigUint::from(*v) * 3u8 + 1u8)),
            },
            Repr::Big(b) => Nat(Repr::Big(b * 3u8 + 1u8)),
        }
    }

    /// `self - 1`, or `None` at zero.
    pub fn pred(&self) -> Option<Nat> {
        match &self.0 {
            Repr::Small(0) => None,
            Repr::Small(v) => Some(Nat(Repr::Small(v - 1))),
            Repr::Big(b) => Some(Nat::from_big(b - 1u8)),
        }
    }

    pub fn succ(&self) -> Nat {
        match &self.0 {
            Repr::Small(v) => match v.checked_add(1) {
                Some(r) => Nat(Repr::Small(r)),
                None => Nat(Repr::Big(BigUint::from(*v) + 1u8)),
            },
            Repr::Big(b) => Nat(Repr::Big(b + 1u8)),
        }
    }

    pub fn rem_u64(&self, m: u64) -> u64 {
        assert!(m != 0, "remainder by zero");
        match &self.0 {
            Repr::Small(v) => (v % u128::from(m)) as u64,
            Repr::Big(b) => (b % m).to_u64().expect("remainder below modulus"),
        }
    }

    pub fn div_rem_u64(&self, m: u64) -> (Nat, u64) {
        assert!(m != 0, "division by zero");
        match &self.0 {
            Repr::Small(v) => {
                let m = u128::from(m);
                (Nat(Repr::Small(v / m)), (v % m) as u64)
            }
            Repr::Big(b) => {
                let (q, r) = b.div_rem(&BigUint::from(m));
                (
                    Nat::from_big(q),
                    r.to_u64().expect("remainder below modulus"),
                )
            }
        }
    }

    pub fn abs_diff(&self, other: &Nat) -> Nat {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => Nat(Repr::Small(a.abs_diff(*b))),
            _ => {
                let (a, b) = (self.to_biguint(), other.to_biguint());
                Nat::from_big(if a >= b { a - b } else { b - a })
            }
        }
    }

    /// Natural logarithm in double precision. `ln(0)` is negative infinity.
    pub fn ln(&self) -> f64 {
        match &self.0 {
            Repr::Small(v) => (*v as f64).ln(),
            Repr::Big(b) => {
                let shift = b.bits() - 64;
                let top = (b >> shift).to_u64().expect("64 leading bits") as f64;
                top.ln() + shift as f64 * std::f64::consts::LN_2
            }
        }
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            (Repr::Small(_), Repr::Big(_)) => Ordering::Less,
            (Repr::Big(_), Repr::Small(_)) => Ordering::Greater,
            (Repr::Big(a), Repr::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Nat {
            fn from(v: $t) -> Nat {
                Nat(Repr::Small(u128::from(v)))
            }
        }
    )*};
}
from_prim!(u8, u16, u32, u64, u128);

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Nat {
        Nat::from_big(b)
    }
}

impl From<&Nat> for BigUint {
    fn from(n: &Nat) -> BigUint {
        n.to_biguint()
    }
}

impl Add for &Nat {
    type Output = Nat;
    fn add(self, rhs: &Nat) -> Nat {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = a.checked_add(*b) {
                return Nat(Repr::Small(s));
            }
        }
        Nat::from_big(self.to_biguint() + rhs.to_biguint())
    }
}

/// Panics on underflow, like the primitive integer types.
impl Sub for &Nat {
    type Output = Nat;
    fn sub(self, rhs: &Nat) -> Nat {
        assert!(self >= rhs, "Nat subtraction underflow");
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            return Nat(Repr::Small(a - b));
        }
        Nat::from_big(self.to_biguint() - rhs.to_biguint())
    }
}

impl Mul for &Nat {
    type Output = Nat;
    fn mul(self, rhs: &Nat) -> Nat {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(p) = a.checked_mul(*b) {
                return Nat(Repr::Small(p));
            }
        }
        Nat::from_big(self.to_biguint() * rhs.to_biguint())
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => fmt::Display::fmt(v, f),
            Repr::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid natural number literal {0:?}")]
pub struct ParseNatError(String);

impl FromStr for Nat {
    type Err = ParseNatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseNatError(s.to_owned()));
        }
        match s.parse::<u128>() {
            Ok(v) => Ok(Nat(Repr::Small(v))),
            Err(_) => BigUint::from_str(s)
                .map(Nat::from_big)
                .map_err(|_| ParseNatError(s.to_owned())),
        }
    }
}

// Decimal strings on the wire: JSON numbers cannot carry arbitrary precision.
impl Serialize for Nat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Nat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
