//! Exact coefficient rings for series and Mal'cev coordinates.
//!
//! All nilpotent-quotient arithmetic is generic over [`Scalar`], an exact
//! integer-like ring. Two implementations are provided: [`BigInt`] (unbounded)
//! and [`Wide`] (a 128-bit integer that panics on overflow rather than wrap).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An exact commutative ring of characteristic zero embedded in the integers.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Eq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_bigint(v: &BigInt) -> Self;
    fn to_bigint(&self) -> BigInt;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// `self += a * b`
    fn add_mul(&mut self, a: &Self, b: &Self);

    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self);

    /// Exact quotient; panics when `d` does not divide `self`.
    fn div_exact(&self, d: &Self) -> Self;
}

impl Scalar for BigInt {
    fn from_bigint(v: &BigInt) -> Self {
        v.clone()
    }

    fn to_bigint(&self) -> BigInt {
        self.clone()
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }

    fn sub_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }

    fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact division {self} / {d}");
        q
    }
}

/// 128-bit integer with overflow-checked arithmetic.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Wide(pub i128);

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, rhs: Wide) -> Wide {
        Wide(self.0.checked_add(rhs.0).expect("i128 overflow in add"))
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, rhs: Wide) -> Wide {
        Wide(self.0.checked_sub(rhs.0).expect("i128 overflow in sub"))
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, rhs: Wide) -> Wide {
        Wide(self.0.checked_mul(rhs.0).expect("i128 overflow in mul"))
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide(self.0.checked_neg().expect("i128 overflow in neg"))
    }
}

impl Zero for Wide {
    fn zero() -> Self {
        Wide(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl One for Wide {
    fn one() -> Self {
        Wide(1)
    }
}

impl Scalar for Wide {
    fn from_bigint(v: &BigInt) -> Self {
        Wide(v.to_i128().expect("integer does not fit in i128"))
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from(self.0)
    }

    fn from_i64(v: i64) -> Self {
        Wide(v as i128)
    }

    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = *self + *a * *b;
    }

    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self = *self - *a * *b;
    }

    fn div_exact(&self, d: &Self) -> Self {
        assert!(self.0 % d.0 == 0, "inexact division {} / {}", self.0, d.0);
        Wide(self.0 / d.0)
    }
}

/// Generalised binomial coefficient `C(e, k)` for any integer `e`.
pub fn binomial(e: &BigInt, k: u32) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= e - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num.div_exact(&den)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        y = q;
    }
}

/// Non-negative residue of `x` modulo `m`.
pub fn residue(x: &BigInt, m: &BigInt) -> BigInt {
    x.mod_floor(m)
}

/// Inverse of a unit modulo `m`.
pub fn inverse_mod(x: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = x.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}
