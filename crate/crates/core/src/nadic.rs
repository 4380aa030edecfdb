//! The n-adic rationals Q_n and their clones.
//!
//! An element of Q_n is a formal series `sum_i z_i n^i` with digits in
//! `0..n` that vanish for sufficiently negative `i`. Every rational number
//! embeds in Q_n and its digit stream is eventually periodic, so [`NAdic`]
//! stores the exact rational value and produces digits lazily; the canonical
//! `(low, preperiod, period)` expansion is available through
//! [`NAdic::expansion`]. Arbitrary (non-periodic) elements are handled with a
//! finite window of digits, [`NAdicWindow`].
//!
//! Metric convention: `d(x, y) = n^{-k}` where `k` is the largest index such
//! that the digits of `x` and `y` agree at every index `<= k`. This is `n`
//! times the valuation metric `|x - y|_n`. `d(x, x) = 0`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn check_base(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidBase(n as u64));
    }
    Ok(())
}

/// Exact `n^e` for any integer `e`.
pub fn pow_n(n: u32, e: i64) -> BigRational {
    let p = num_traits::pow(BigInt::from(n), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn big_pow(n: u32, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(n), e as usize)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// `r = u / (n^j q)` with `j >= 0` minimal and `gcd(q, n) = 1`, `q > 0`.
struct Split {
    j: i64,
    u: BigInt,
    q: BigInt,
}

fn split(r: &BigRational, n: u32) -> Split {
    let nb = BigInt::from(n);
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let mut j = 0i64;
    while !den.gcd(&nb).is_one() {
        num *= &nb;
        j += 1;
        let g = num.gcd(&den);
        if !g.is_one() {
            num /= &g;
            den /= &g;
        }
    }
    Split { j, u: num, q: den }
}

/// Index of the lowest nonzero digit, `None` for zero.
pub(crate) fn order(r: &BigRational, n: u32) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let Split { j, mut u, .. } = split(r, n);
    let nb = BigInt::from(n);
    let mut v = 0i64;
    loop {
        let (d, m) = u.div_rem(&nb);
        if !m.is_zero() {
            break;
        }
        u = d;
        v += 1;
    }
    Some(v - j)
}

/// `sum_{i <= k} r_i n^i`, the truncation of the digit stream at index `k`.
pub(crate) fn truncate(r: &BigRational, n: u32, k: i64) -> BigRational {
    if r.is_zero() {
        return BigRational::zero();
    }
    let Split { j, u, q } = split(r, n);
    let m = k + j + 1;
    if m <= 0 {
        return BigRational::zero();
    }
    let modulus = big_pow(n, m as u64);
    let t = if q.is_one() {
        u.mod_floor(&modulus)
    } else {
        (u * mod_inverse(&q, &modulus)).mod_floor(&modulus)
    };
    BigRational::new(t, big_pow(n, j as u64))
}

/// Canonical eventually-periodic digit expansion.
///
/// Digits are listed in increasing index order: `pre[0]` sits at index
/// `low`, and `period` repeats forever after `pre`. Zero is
/// `{low: 0, pre: [], period: [0]}`; otherwise the digit at `low` is nonzero,
/// `period` is primitive and `pre` is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub low: i64,
    pub pre: Vec<u32>,
    pub period: Vec<u32>,
}

/// An element of Q_n with an eventually periodic digit stream.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NAdic {
    base: u32,
    value: BigRational,
}

impl NAdic {
    pub fn new(base: u32, value: BigRational) -> Result<Self> {
        check_base(base)?;
        Ok(NAdic { base, value })
    }

    /// The element `p / n^j` of `Z[1/n]`.
    pub fn from_rational(p: impl Into<BigInt>, j: i64, base: u32) -> Result<Self> {
        check_base(base)?;
        let value = BigRational::from_integer(p.into()) / pow_n(base, j);
        Ok(NAdic { base, value })
    }

    pub fn from_int(k: i64, base: u32) -> Result<Self> {
        Self::from_rational(k, 0, base)
    }

    pub fn zero(base: u32) -> Result<Self> {
        Self::from_int(0, base)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// The rational number this digit stream sums to.
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// True when the element lies in `Z[1/n]`, i.e. its expansion terminates.
    pub fn is_terminating(&self) -> bool {
        split(&self.value, self.base).q.is_one() && !self.value.is_negative()
    }

    /// Lowest index carrying a nonzero digit.
    pub fn order(&self) -> Option<i64> {
        order(&self.value, self.base)
    }

    pub fn digit(&self, i: i64) -> u32 {
        let hi = truncate(&self.value, self.base, i);
        let lo = truncate(&self.value, self.base, i - 1);
        let d = (hi - lo) / pow_n(self.base, i);
        debug_assert!(d.is_integer());
        d.to_integer().to_u32().expect("digit fits in u32")
    }

    /// Digits at indices `from..to`.
    pub fn digits(&self, from: i64, to: i64) -> Vec<u32> {
        (from..to).map(|i| self.digit(i)).collect()
    }

    /// The terminating element `sum_{i <= k} z_i n^i`.
    pub fn truncate(&self, k: i64) -> NAdic {
        NAdic {
            base: self.base,
            value: truncate(&self.value, self.base, k),
        }
    }

    /// Multiplication by `n^e`, a shift of the digit stream by `e`.
    pub fn mul_pow_n(&self, e: i64) -> NAdic {
        NAdic {
            base: self.base,
            value: &self.value * pow_n(self.base, e),
        }
    }

    /// Largest `k` with agreement of all digits at indices `<= k`; `None` when equal.
    pub fn agreement_index(&self, other: &NAdic) -> Option<i64> {
        assert_eq!(self.base, other.base, "base mismatch");
        order(&(&self.value - &other.value), self.base).map(|v| v - 1)
    }

    pub fn dist(&self, other: &NAdic) -> Radius {
        match self.agreement_index(other) {
            None => Radius::zero(self.base),
            Some(k) => Radius::pow(self.base, -k),
        }
    }

    pub fn expansion(&self) -> Expansion {
        self.expansion_bounded(usize::MAX)
            .expect("unbounded expansion cannot overflow")
    }

    /// Canonical expansion, failing if more than `max_digits` digits are needed.
    pub fn expansion_bounded(&self, max_digits: usize) -> Result<Expansion> {
        let n = self.base;
        let Some(low) = self.order() else {
            return Ok(Expansion {
                low: 0,
                pre: vec![],
                period: vec![0],
            });
        };
        // y = value * n^{-low} is an n-adic integer u/q with nonzero digit 0.
        let y = &self.value * pow_n(n, -low);
        let Split { j, mut u, q } = split(&y, n);
        debug_assert_eq!(j, 0);
        let nb = BigInt::from(n);
        let qinv = mod_inverse(&q, &nb);
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        loop {
            if let Some(&start) = seen.get(&u) {
                let period = digits.split_off(start);
                return Ok(Expansion {
                    low,
                    pre: digits,
                    period,
                });
            }
            if digits.len() >= max_digits {
                return Err(Error::ExpansionTooLong(max_digits));
            }
            seen.insert(u.clone(), digits.len());
            let d = (u.mod_floor(&nb) * &qinv).mod_floor(&nb);
            u = (&u - &d * &q) / &nb;
            digits.push(d.to_u32().expect("digit fits in u32"));
        }
    }

    /// Rebuild an element from any (not necessarily canonical) expansion.
    pub fn from_expansion(base: u32, e: &Expansion) -> Result<Self> {
        check_base(base)?;
        if e.period.is_empty() {
            return Err(Error::Parse("empty period".into()));
        }
        if let Some(&d) = e.pre.iter().chain(&e.period).find(|&&d| d >= base) {
            return Err(Error::Parse(format!("digit {d} out of range for base {base}")));
        }
        let nb = BigInt::from(base);
        let horner = |ds: &[u32]| {
            ds.iter()
                .rev()
                .fold(BigInt::zero(), |acc, &d| acc * &nb + BigInt::from(d))
        };
        let pre = BigRational::from_integer(horner(&e.pre));
        let per = horner(&e.period);
        // sum_{k>=0} n^{kL} = 1 / (1 - n^L) in Z_n.
        let geom = BigRational::new(per, BigInt::one() - big_pow(base, e.period.len() as u64));
        let value = (pre + geom * pow_n(base, e.pre.len() as i64)) * pow_n(base, e.low);
        Ok(NAdic { base, value })
    }

    /// Finite window of digits on `[low, top)`; digits above `top` are forgotten.
    pub fn window(&self, top: i64) -> NAdicWindow {
        let low = self.order().unwrap_or(top).min(top);
        NAdicWindow {
            base: self.base,
            low,
            digits: self.digits(low, top),
        }
    }

    fn check_same(&self, other: &NAdic) {
        assert_eq!(self.base, other.base, "n-adic base mismatch");
    }
}

impl fmt::Debug for NAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NAdic({}, {})", self, self.value)
    }
}

fn write_digits(f: &mut fmt::Formatter<'_>, base: u32, ds: &[u32]) -> fmt::Result {
    if base <= 36 {
        for &d in ds {
            write!(f, "{}", std::char::from_digit(d, 36).expect("digit < 36"))?;
        }
    } else {
        let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("."))?;
    }
    Ok(())
}

fn parse_digits(s: &str, base: u32) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(vec![]);
    }
    if base <= 36 {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .filter(|&d| d < base)
                    .ok_or_else(|| Error::Parse(format!("bad digit {c:?} for base {base}")))
            })
            .collect()
    } else {
        s.split('.')
            .map(|t| {
                t.parse::<u32>()
                    .ok()
                    .filter(|&d| d < base)
                    .ok_or_else(|| Error::Parse(format!("bad digit {t:?} for base {base}")))
            })
            .collect()
    }
}

/// Text form `base:low:preperiod|period`, digits in increasing index order.
impl fmt::Display for NAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.expansion();
        write!(f, "{}:{}:", self.base, e.low)?;
        write_digits(f, self.base, &e.pre)?;
        write!(f, "|")?;
        write_digits(f, self.base, &e.period)
    }
}

impl FromStr for NAdic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.splitn(3, ':');
        let (Some(b), Some(l), Some(rest)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("expected base:low:pre|period, got {s:?}")));
        };
        let base: u32 = b.parse().map_err(|_| Error::Parse(format!("bad base {b:?}")))?;
        check_base(base)?;
        let low: i64 = l.parse().map_err(|_| Error::Parse(format!("bad index {l:?}")))?;
        let (pre, period) = rest
            .split_once('|')
            .ok_or_else(|| Error::Parse("missing '|'".into()))?;
        let e = Expansion {
            low,
            pre: parse_digits(pre, base)?,
            period: parse_digits(period, base)?,
        };
        NAdic::from_expansion(base, &e)
    }
}

impl Add for &NAdic {
    type Output = NAdic;
    fn add(self, rhs: &NAdic) -> NAdic {
        self.check_same(rhs);
        NAdic {
            base: self.base,
            value: &self.value + &rhs.value,
        }
    }
}

impl Sub for &NAdic {
    type Output = NAdic;
    fn sub(self, rhs: &NAdic) -> NAdic {
        self.check_same(rhs);
        NAdic {
            base: self.base,
            value: &self.value - &rhs.value,
        }
    }
}

impl Mul for &NAdic {
    type Output = NAdic;
    fn mul(self, rhs: &NAdic) -> NAdic {
        self.check_same(rhs);
        NAdic {
            base: self.base,
            value: &self.value * &rhs.value,
        }
    }
}

impl Neg for &NAdic {
    type Output = NAdic;
    fn neg(self) -> NAdic {
        NAdic {
            base: self.base,
            value: -&self.value,
        }
    }
}

/// A distance value in `{n^e : e in Z} ∪ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Radius {
    pub base: u32,
    /// `None` is the zero distance.
    pub exp: Option<i64>,
}

impl Radius {
    pub fn zero(base: u32) -> Self {
        Radius { base, exp: None }
    }

    pub fn pow(base: u32, exp: i64) -> Self {
        Radius {
            base,
            exp: Some(exp),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.exp.is_none()
    }

    pub fn to_rational(&self) -> BigRational {
        self.exp
            .map_or_else(BigRational::zero, |e| pow_n(self.base, e))
    }

    pub fn to_f64(&self) -> f64 {
        self.exp
            .map_or(0.0, |e| (self.base as f64).powi(e as i32))
    }
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Radius {
    fn cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.base, other.base, "radius base mismatch");
        match (self.exp, other.exp) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a.cmp(&b),
        }
    }
}

/// The clone `C_eta = { z : z_i = eta_i for all i <= k }`.
///
/// It is at once the closed ball of radius `n^{-k}` around any of its
/// members and a vertex of the tree T_n at combinatorial height `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CloneBall {
    base: u32,
    height: i64,
    /// `sum_{i <= k} eta_i n^i`, the unique member whose digits above `k` vanish.
    center: BigRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloneRelation {
    Disjoint,
    Equal,
    /// The first clone is strictly contained in the second.
    ProperSub,
    /// The first clone strictly contains the second.
    ProperSuper,
}

/// JSON form `{n, k, low, prefix}`: `prefix[i]` is the digit at index `low + i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloneJson {
    pub n: u32,
    pub k: i64,
    pub low: i64,
    pub prefix: Vec<u32>,
}

impl CloneBall {
    pub fn containing(x: &NAdic, k: i64) -> CloneBall {
        CloneBall {
            base: x.base,
            height: k,
            center: truncate(&x.value, x.base, k),
        }
    }

    /// The height-`k` clone whose prefix is `digits` starting at index `low`.
    pub fn from_prefix(base: u32, k: i64, low: i64, digits: &[u32]) -> Result<CloneBall> {
        check_base(base)?;
        if low + digits.len() as i64 > k + 1 {
            return Err(Error::Parse(format!(
                "prefix from {low} with {} digits overruns height {k}",
                digits.len()
            )));
        }
        let e = Expansion {
            low,
            pre: digits.to_vec(),
            period: vec![0],
        };
        let x = NAdic::from_expansion(base, &e)?;
        Ok(CloneBall::containing(&x, k))
    }

    /// The height-0 clone containing 0, the base vertex of T_n.
    pub fn base_vertex(base: u32) -> Result<CloneBall> {
        Ok(CloneBall::containing(&NAdic::zero(base)?, 0))
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Combinatorial height `h_c`.
    pub fn height(&self) -> i64 {
        self.height
    }

    pub fn center(&self) -> NAdic {
        NAdic {
            base: self.base,
            value: self.center.clone(),
        }
    }

    pub(crate) fn center_value(&self) -> &BigRational {
        &self.center
    }

    pub fn radius(&self) -> Radius {
        Radius::pow(self.base, -self.height)
    }

    pub fn contains(&self, x: &NAdic) -> bool {
        assert_eq!(self.base, x.base, "base mismatch");
        match order(&(&x.value - &self.center), self.base) {
            None => true,
            Some(v) => v > self.height,
        }
    }

    pub fn contains_clone(&self, other: &CloneBall) -> bool {
        matches!(
            self.relation(other),
            CloneRelation::Equal | CloneRelation::ProperSuper
        )
    }

    /// How `self` sits relative to `other`; two clones never partially overlap.
    pub fn relation(&self, other: &CloneBall) -> CloneRelation {
        assert_eq!(self.base, other.base, "base mismatch");
        let (big, small) = if self.height <= other.height {
            (self, other)
        } else {
            (other, self)
        };
        if !big.contains(&small.center()) {
            return CloneRelation::Disjoint;
        }
        match self.height.cmp(&other.height) {
            Ordering::Equal => CloneRelation::Equal,
            Ordering::Less => CloneRelation::ProperSuper,
            Ordering::Greater => CloneRelation::ProperSub,
        }
    }

    /// Digits of the prefix as `(low, digits)` covering indices `low..=k`.
    pub fn prefix(&self) -> (i64, Vec<u32>) {
        let c = self.center();
        match c.order() {
            None => (self.height + 1, vec![]),
            Some(low) => (low, c.digits(low, self.height + 1)),
        }
    }

    pub fn to_json(&self) -> CloneJson {
        let (low, prefix) = self.prefix();
        CloneJson {
            n: self.base,
            k: self.height,
            low,
            prefix,
        }
    }

    pub fn from_json(j: &CloneJson) -> Result<CloneBall> {
        CloneBall::from_prefix(j.n, j.k, j.low, &j.prefix)
    }
}

impl fmt::Display for CloneBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (low, prefix) = self.prefix();
        write!(f, "C[n={}, k={}, low={}, ", self.base, self.height, low)?;
        write_digits(f, self.base, &prefix)?;
        write!(f, "]")
    }
}

/// A finite-precision element of Q_n: digits known on `[low, top)`, zero
/// below `low`, unknown from `top` on. Arithmetic is digitwise with carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NAdicWindow {
    base: u32,
    low: i64,
    digits: Vec<u32>,
}

/// Distance between windows: exact when a disagreement is visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowDist {
    Exact(Radius),
    AtMost(Radius),
}

impl NAdicWindow {
    pub fn new(base: u32, low: i64, digits: Vec<u32>) -> Result<Self> {
        check_base(base)?;
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::Parse(format!("digit {d} out of range for base {base}")));
        }
        Ok(NAdicWindow { base, low, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    /// First index whose digit is unknown.
    pub fn top(&self) -> i64 {
        self.low + self.digits.len() as i64
    }

    /// Digit at `i`, or `None` at or above `top`.
    pub fn digit(&self, i: i64) -> Option<u32> {
        if i >= self.top() {
            None
        } else if i < self.low {
            Some(0)
        } else {
            Some(self.digits[(i - self.low) as usize])
        }
    }

    fn span(&self, other: &NAdicWindow) -> (i64, i64) {
        assert_eq!(self.base, other.base, "base mismatch");
        (self.low.min(other.low), self.top().min(other.top()))
    }

    pub fn add(&self, other: &NAdicWindow) -> NAdicWindow {
        let (low, top) = self.span(other);
        let n = self.base as u64;
        let mut carry = 0u64;
        let mut digits = Vec::with_capacity((top - low).max(0) as usize);
        for i in low..top {
            let s = self.digit(i).unwrap() as u64 + other.digit(i).unwrap() as u64 + carry;
            digits.push((s % n) as u32);
            carry = s / n;
        }
        NAdicWindow {
            base: self.base,
            low,
            digits,
        }
    }

    pub fn neg(&self) -> NAdicWindow {
        let n = self.base;
        let mut digits = Vec::with_capacity(self.digits.len());
        let mut seen_nonzero = false;
        for &d in &self.digits {
            if seen_nonzero {
                digits.push(n - 1 - d);
            } else if d == 0 {
                digits.push(0);
            } else {
                digits.push(n - d);
                seen_nonzero = true;
            }
        }
        NAdicWindow {
            base: n,
            low: self.low,
            digits,
        }
    }

    pub fn mul(&self, other: &NAdicWindow) -> NAdicWindow {
        assert_eq!(self.base, other.base, "base mismatch");
        let n = self.base as u128;
        let low = self.low + other.low;
        let top = (self.top() + other.low).min(other.top() + self.low);
        let len = (top - low).max(0) as usize;
        let mut acc = vec![0u128; len];
        for (a, &da) in self.digits.iter().enumerate() {
            if da == 0 {
                continue;
            }
            for (b, &db) in other.digits.iter().enumerate() {
                let idx = a + b;
                if idx >= len {
                    break;
                }
                acc[idx] += da as u128 * db as u128;
            }
        }
        let mut carry = 0u128;
        let digits = acc
            .into_iter()
            .map(|v| {
                let s = v + carry;
                carry = s / n;
                (s % n) as u32
            })
            .collect();
        NAdicWindow {
            base: self.base,
            low,
            digits,
        }
    }

    pub fn dist(&self, other: &NAdicWindow) -> WindowDist {
        let (low, top) = self.span(other);
        for i in low..top {
            if self.digit(i) != other.digit(i) {
                return WindowDist::Exact(Radius::pow(self.base, 1 - i));
            }
        }
        WindowDist::AtMost(Radius::pow(self.base, 1 - top))
    }

    /// Whether the known digits agree with those of `x`.
    pub fn agrees_with(&self, x: &NAdic) -> bool {
        assert_eq!(self.base, x.base, "base mismatch");
        let from = self.low.min(x.order().unwrap_or(self.low));
        (from..self.top()).all(|i| self.digit(i) == Some(x.digit(i)))
    }
}
