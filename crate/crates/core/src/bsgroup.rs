//! BS(1,n) as the affine group `x -> n^i x + s` with `s` in Z[1/n].
//!
//! Generators: `a(x) = x + 1` and `b(x) = n x`, so that `b a b^-1 = a^n`.
//! A word `w1 w2 ... wk` evaluates to the composite `w1 ∘ w2 ∘ ... ∘ wk`.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nadic::{check_base, order, pow_n, CloneBall, NAdic, Radius};
use crate::treespace::TreePoint;

/// Default cap on the number of elements a ball enumeration may hold.
pub const DEFAULT_BALL_BUDGET: usize = 10_000_000;

/// An element `x -> n^exp x + shift` of BS(1,n).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffElem {
    base: u32,
    exp: i64,
    shift: BigRational,
}

/// JSON form: translation `p / n^j` with `n` not dividing `p` unless `j = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffJson {
    pub n: u32,
    pub i: i64,
    pub p: String,
    pub j: i64,
}

impl AffElem {
    pub fn identity(base: u32) -> Result<Self> {
        check_base(base)?;
        Ok(AffElem {
            base,
            exp: 0,
            shift: BigRational::zero(),
        })
    }

    pub fn a(base: u32) -> Result<Self> {
        Self::from_parts(base, 0, BigInt::one(), 0)
    }

    pub fn b(base: u32) -> Result<Self> {
        Self::from_parts(base, 1, BigInt::zero(), 0)
    }

    /// `x -> n^i x + p / n^j`.
    pub fn from_parts(base: u32, i: i64, p: impl Into<BigInt>, j: i64) -> Result<Self> {
        check_base(base)?;
        Ok(AffElem {
            base,
            exp: i,
            shift: BigRational::from_integer(p.into()) * pow_n(base, -j),
        })
    }

    /// `x -> n^i x + s`; fails unless `s` lies in Z[1/n].
    pub fn new(base: u32, i: i64, s: BigRational) -> Result<Self> {
        check_base(base)?;
        let elem = AffElem { base, exp: i, shift: s };
        let (_, j) = elem.shift_parts();
        if !(elem.shift.clone() * pow_n(base, j)).is_integer() {
            return Err(Error::Constraint(format!("{} is not in Z[1/{base}]", elem.shift)));
        }
        Ok(elem)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn shift(&self) -> &BigRational {
        &self.shift
    }

    /// The normalized pair `(p, j)` with `shift = p / n^j`, `j >= 0`.
    pub fn shift_parts(&self) -> (BigInt, i64) {
        match order(&self.shift, self.base) {
            Some(v) if v < 0 => {
                let j = -v;
                let p = (&self.shift * pow_n(self.base, j)).to_integer();
                (p, j)
            }
            _ => (self.shift.to_integer(), 0),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.exp == 0 && self.shift.is_zero()
    }

    /// Composite `self ∘ other`.
    pub fn mul(&self, other: &AffElem) -> AffElem {
        assert_eq!(self.base, other.base, "base mismatch");
        AffElem {
            base: self.base,
            exp: self.exp + other.exp,
            shift: &other.shift * pow_n(self.base, self.exp) + &self.shift,
        }
    }

    pub fn inv(&self) -> AffElem {
        AffElem {
            base: self.base,
            exp: -self.exp,
            shift: -(&self.shift * pow_n(self.base, -self.exp)),
        }
    }

    pub fn pow(&self, k: i64) -> AffElem {
        let mut acc = AffElem::identity(self.base).expect("valid base");
        let g = if k >= 0 { self.clone() } else { self.inv() };
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&g);
        }
        acc
    }

    pub fn act_r(&self, x: &BigRational) -> BigRational {
        x * pow_n(self.base, self.exp) + &self.shift
    }

    pub fn act_r_f64(&self, x: f64) -> f64 {
        (self.base as f64).powi(self.exp as i32) * x + self.shift.to_f64().unwrap_or(f64::NAN)
    }

    pub fn act_qn(&self, zeta: &NAdic) -> NAdic {
        assert_eq!(self.base, zeta.base(), "base mismatch");
        NAdic::new(self.base, self.act_r(zeta.value())).expect("valid base")
    }

    pub fn act_h2(&self, x: f64, y: f64) -> (f64, f64) {
        let s = (self.base as f64).powi(self.exp as i32);
        (self.act_r_f64(x), s * y)
    }

    pub fn act_h2_exact(&self, x: &BigRational, y: &BigRational) -> (BigRational, BigRational) {
        (self.act_r(x), y * pow_n(self.base, self.exp))
    }

    pub fn act_tree(&self, c: &CloneBall) -> CloneBall {
        assert_eq!(self.base, c.base(), "base mismatch");
        CloneBall::containing(&self.act_qn(&c.center()), c.height() + self.exp)
    }

    pub fn act_tree_point(&self, p: &TreePoint) -> TreePoint {
        let v = self.act_tree(p.upper_vertex());
        match p.toward() {
            None => TreePoint::vertex(v),
            Some(_) => {
                let child = self.act_tree(&p.lower_vertex());
                let d = v.child_digit(&child).expect("action preserves edges");
                TreePoint::new(v, p.offset(), d).expect("offset preserved")
            }
        }
    }

    /// Stretch factor on the lower boundary R.
    pub fn stretch_r(&self) -> BigRational {
        pow_n(self.base, self.exp)
    }

    /// Stretch factor on the upper boundary Q_n.
    pub fn stretch_qn(&self) -> BigRational {
        pow_n(self.base, -self.exp)
    }

    /// Size of the translation part in the metric of Q_n.
    pub fn qn_translation_size(&self) -> Radius {
        let z = NAdic::zero(self.base).expect("valid base");
        let s = NAdic::new(self.base, self.shift.clone()).expect("valid base");
        z.dist(&s)
    }

    /// A word of length `O(log)` in the sizes of `exp` and `shift` evaluating to `self`.
    pub fn normal_form_word(&self) -> GroupWord {
        let (p, j) = self.shift_parts();
        let mut w = Vec::new();
        w.extend(std::iter::repeat_n(Gen::BInv, j as usize));
        w.extend(power_of_a(&p, self.base));
        w.extend(std::iter::repeat_n(Gen::B, j as usize));
        let b = if self.exp >= 0 { Gen::B } else { Gen::BInv };
        w.extend(std::iter::repeat_n(b, self.exp.unsigned_abs() as usize));
        GroupWord(w).free_reduce()
    }

    pub fn to_json(&self) -> AffJson {
        let (p, j) = self.shift_parts();
        AffJson {
            n: self.base,
            i: self.exp,
            p: p.to_string(),
            j,
        }
    }

    pub fn from_json(js: &AffJson) -> Result<Self> {
        let p: BigInt = js
            .p
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer {:?}", js.p)))?;
        Self::from_parts(js.n, js.i, p, js.j)
    }
}

/// `a^p` written with `O(log |p|)` letters via `a^{n^m} = b^m a b^-m`.
fn power_of_a(p: &BigInt, n: u32) -> Vec<Gen> {
    let letter = if p.is_negative() { Gen::AInv } else { Gen::A };
    let nb = BigInt::from(n);
    let mut digits = Vec::new();
    let mut r = p.abs();
    while !r.is_zero() {
        let (q, d) = r.div_rem(&nb);
        digits.push(d.to_usize().expect("digit"));
        r = q;
    }
    let mut w = Vec::new();
    for (m, &d) in digits.iter().enumerate() {
        if m > 0 {
            w.push(Gen::B);
        }
        w.extend(std::iter::repeat_n(letter, d));
    }
    w.extend(std::iter::repeat_n(Gen::BInv, digits.len().saturating_sub(1)));
    w
}

impl fmt::Display for AffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> {}^{} x + {}", self.base, self.exp, self.shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    A,
    AInv,
    B,
    BInv,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A, Gen::AInv, Gen::B, Gen::BInv];

    pub fn inverse(self) -> Gen {
        match self {
            Gen::A => Gen::AInv,
            Gen::AInv => Gen::A,
            Gen::B => Gen::BInv,
            Gen::BInv => Gen::B,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Gen::A => 'a',
            Gen::AInv => 'A',
            Gen::B => 'b',
            Gen::BInv => 'B',
        }
    }

    pub fn eval(self, n: u32) -> AffElem {
        match self {
            Gen::A => AffElem::a(n).expect("valid base"),
            Gen::AInv => AffElem::a(n).expect("valid base").inv(),
            Gen::B => AffElem::b(n).expect("valid base"),
            Gen::BInv => AffElem::b(n).expect("valid base").inv(),
        }
    }
}

/// A word in `a, a^-1, b, b^-1`, written with capitals for inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord(pub Vec<Gen>);

impl GroupWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        GroupWord(v)
    }

    pub fn free_reduce(&self) -> GroupWord {
        let mut out: Vec<Gen> = Vec::with_capacity(self.0.len());
        for &g in &self.0 {
            if out.last() == Some(&g.inverse()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        GroupWord(out)
    }

    /// The defining relator `b a b^-1 a^-n`.
    pub fn relator(n: u32) -> GroupWord {
        let mut v = vec![Gen::B, Gen::A, Gen::BInv];
        v.extend(std::iter::repeat_n(Gen::AInv, n as usize));
        GroupWord(v)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            write!(f, "{}", g.letter())?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'a' => Ok(Gen::A),
                'A' => Ok(Gen::AInv),
                'b' => Ok(Gen::B),
                'B' => Ok(Gen::BInv),
                other => Err(Error::Parse(format!("unexpected letter {other:?} in word"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(GroupWord)
    }
}

pub fn eval_word(w: &GroupWord, n: u32) -> Result<AffElem> {
    let mut acc = AffElem::identity(n)?;
    for g in &w.0 {
        acc = acc.mul(&g.eval(n));
    }
    Ok(acc)
}

/// Breadth-first spheres of a Cayley graph: `spheres[L]` holds the elements
/// at word distance exactly `L` from `start`.
pub fn bfs_spheres<T, F>(start: T, gens: &[F], radius: usize, budget: usize) -> Result<Vec<Vec<T>>>
where
    T: Clone + Eq + Hash,
    F: Fn(&T) -> T,
{
    let mut seen: HashSet<T> = HashSet::new();
    seen.insert(start.clone());
    let mut spheres = vec![vec![start]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in spheres.last().expect("nonempty") {
            for g in gens {
                let y = g(x);
                if !seen.contains(&y) {
                    if seen.len() >= budget {
                        return Err(Error::BudgetExceeded {
                            what: "ball elements",
                            limit: budget,
                        });
                    }
                    seen.insert(y.clone());
                    next.push(y);
                }
            }
        }
        spheres.push(next);
    }
    Ok(spheres)
}

fn generator_actions(n: u32) -> Vec<impl Fn(&AffElem) -> AffElem> {
    Gen::ALL
        .iter()
        .map(move |g| {
            let h = g.eval(n);
            move |x: &AffElem| x.mul(&h)
        })
        .collect()
}

/// All elements of word length `<= radius`.
pub fn ball(n: u32, radius: usize, budget: usize) -> Result<Vec<AffElem>> {
    check_base(n)?;
    let spheres = bfs_spheres(AffElem::identity(n)?, &generator_actions(n), radius, budget)?;
    Ok(spheres.into_iter().flatten().collect())
}

/// Spheres of the ball of `radius`, indexed by word length.
pub fn ball_spheres(n: u32, radius: usize, budget: usize) -> Result<Vec<Vec<AffElem>>> {
    check_base(n)?;
    bfs_spheres(AffElem::identity(n)?, &generator_actions(n), radius, budget)
}

/// Growth function `beta(L) = |ball(L)|` for `L = 0..=radius`.
pub fn growth(n: u32, radius: usize, budget: usize) -> Result<Vec<u64>> {
    let spheres = ball_spheres(n, radius, budget)?;
    Ok(cumulative(&spheres))
}

/// Growth function of Z^2 with its standard generators.
pub fn growth_z2(radius: usize, budget: usize) -> Result<Vec<u64>> {
    let gens: [fn(&(i64, i64)) -> (i64, i64); 4] = [
        |p| (p.0 + 1, p.1),
        |p| (p.0 - 1, p.1),
        |p| (p.0, p.1 + 1),
        |p| (p.0, p.1 - 1),
    ];
    let spheres = bfs_spheres((0i64, 0i64), &gens, radius, budget)?;
    Ok(cumulative(&spheres))
}

fn cumulative<T>(spheres: &[Vec<T>]) -> Vec<u64> {
    spheres
        .iter()
        .scan(0u64, |acc, s| {
            *acc += s.len() as u64;
            Some(*acc)
        })
        .collect()
}
