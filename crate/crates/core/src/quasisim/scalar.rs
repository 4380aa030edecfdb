use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Number type for piecewise-linear maps: `f64` or exact `BigRational`.
pub trait Scalar:
    Clone
    + PartialOrd
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(p: i64, q: i64) -> Self;
    /// Exact for rationals (every finite double is dyadic).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Natural logarithm of a positive value, in floating point.
    fn ln(&self) -> f64;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Equality up to rounding; exact types compare exactly.
    fn nearly_eq(&self, other: &Self) -> bool;

    fn powi(&self, e: i64) -> Self {
        let mut base = if e >= 0 {
            self.clone()
        } else {
            Self::one() / self.clone()
        };
        let mut k = e.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// A value in `[lo, hi]` with `0 < lo <= hi`; rationals give the one with least denominator.
    fn simplest_between(lo: &Self, hi: &Self) -> Self;

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn nearly_eq(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * f64::abs(*self).max(f64::abs(*other)).max(1.0)
    }
    fn powi(&self, e: i64) -> Self {
        f64::powf(*self, e as f64)
    }
    fn simplest_between(lo: &Self, hi: &Self) -> Self {
        (lo * hi).sqrt()
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        BigRational::new(p.into(), q.into())
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }
    fn to_f64(&self) -> f64 {
        let n = self.numer();
        let d = self.denom();
        if n.bits() < 1000 && d.bits() < 1000 {
            return n.to_f64().expect("fits") / d.to_f64().expect("fits");
        }
        let sign = if n.is_negative() { -1.0 } else { 1.0 };
        if n.is_zero() {
            return 0.0;
        }
        sign * (ln_bigint(&n.abs()) - ln_bigint(d)).exp()
    }
    fn ln(&self) -> f64 {
        ln_bigint(self.numer()) - ln_bigint(self.denom())
    }
    fn nearly_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn simplest_between(lo: &Self, hi: &Self) -> Self {
        // continued-fraction descent: integer part, then recurse on reciprocals
        let mut terms: Vec<BigInt> = Vec::new();
        let (mut lo, mut hi) = (lo.clone(), hi.clone());
        let tail = loop {
            let fl = lo.floor();
            if fl == lo {
                break fl;
            }
            let up = &fl + <BigRational as One>::one();
            if up <= hi {
                break up;
            }
            terms.push(fl.to_integer());
            let (a, b) = ((&hi - &fl).recip(), (&lo - &fl).recip());
            lo = a;
            hi = b;
        };
        terms.into_iter().rev().fold(tail, |acc, t| BigRational::from_integer(t) + acc.recip())
    }
}
