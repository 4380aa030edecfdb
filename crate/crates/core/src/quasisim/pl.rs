use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::interval::StretchInterval;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Default cap on breakpoints produced while composing maps.
pub const DEFAULT_BREAKPOINT_CAP: usize = 1_000_000;

/// A piecewise-linear homeomorphism of R with affine tails.
///
/// `slopes[0]` applies left of `knots[0]`, `slopes[i]` on
/// `[knots[i-1], knots[i]]` and `slopes[N]` right of the last knot.
/// `values[i]` is the image of `knots[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PLHomeo<T> {
    knots: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("comparable values")
}

impl<T: Scalar> PLHomeo<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>, slopes: Vec<T>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidMap("at least one breakpoint is required".into()));
        }
        if values.len() != knots.len() || slopes.len() != knots.len() + 1 {
            return Err(Error::InvalidMap("length mismatch among breakpoints, values and slopes".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap("breakpoints must be strictly increasing".into()));
        }
        let positive = slopes[0] > T::zero();
        if slopes
            .iter()
            .any(|s| s.is_zero() || (*s > T::zero()) != positive)
        {
            return Err(Error::InvalidMap("slopes must be nonzero and share one sign".into()));
        }
        for i in 1..knots.len() {
            let expect = values[i - 1].clone() + slopes[i].clone() * (knots[i].clone() - knots[i - 1].clone());
            if !expect.nearly_eq(&values[i]) {
                return Err(Error::InvalidMap(format!("discontinuity at breakpoint {}", knots[i])));
            }
        }
        Ok(PLHomeo { knots, values, slopes })
    }

    pub fn affine(slope: T, intercept: T) -> Result<Self> {
        Self::new(vec![T::zero()], vec![intercept], vec![slope.clone(), slope])
    }

    pub fn identity() -> Self {
        Self::affine(T::one(), T::zero()).expect("identity is valid")
    }

    pub fn translation(alpha: T) -> Self {
        Self::affine(T::one(), alpha).expect("translation is valid")
    }

    pub fn dilation(s: T) -> Result<Self> {
        Self::affine(s, T::zero())
    }

    /// The map through the given points, affine in between, with the given tail slopes.
    pub fn from_points(points: &[(T, T)], lo_slope: T, hi_slope: T) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMap("no points".into()));
        }
        let knots: Vec<T> = points.iter().map(|p| p.0.clone()).collect();
        let values: Vec<T> = points.iter().map(|p| p.1.clone()).collect();
        let mut slopes = vec![lo_slope];
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidMap("breakpoints must be strictly increasing".into()));
            }
            slopes.push((w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone()));
        }
        slopes.push(hi_slope);
        Self::new(knots, values, slopes)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn breakpoint_count(&self) -> usize {
        self.knots.len()
    }

    pub fn is_increasing(&self) -> bool {
        self.slopes[0] > T::zero()
    }

    pub fn is_identity(&self) -> bool {
        self.slopes.iter().all(|s| *s == T::one()) && self.values[0] == self.knots[0]
    }

    /// Index into `slopes` of the piece containing `x` (right-continuous).
    fn piece(&self, x: &T) -> usize {
        self.knots.partition_point(|k| k <= x)
    }

    pub fn slope_at(&self, x: &T) -> T {
        self.slopes[self.piece(x)].clone()
    }

    /// Evaluation anchored at the nearer endpoint of the piece.
    pub fn eval(&self, x: &T) -> T {
        let p = self.piece(x);
        let s = &self.slopes[p];
        let n = self.knots.len();
        let from_left = |i: usize| self.values[i].clone() + s.clone() * (x.clone() - self.knots[i].clone());
        let from_right = |i: usize| self.values[i].clone() - s.clone() * (self.knots[i].clone() - x.clone());
        if p == 0 {
            from_right(0)
        } else if p == n {
            from_left(n - 1)
        } else if T::EXACT || x.clone() - self.knots[p - 1].clone() <= self.knots[p].clone() - x.clone() {
            from_left(p - 1)
        } else {
            from_right(p)
        }
    }

    pub fn inverse(&self) -> Self {
        let inv_slopes: Vec<T> = self.slopes.iter().map(|s| T::one() / s.clone()).collect();
        if self.is_increasing() {
            PLHomeo {
                knots: self.values.clone(),
                values: self.knots.clone(),
                slopes: inv_slopes,
            }
        } else {
            PLHomeo {
                knots: self.values.iter().rev().cloned().collect(),
                values: self.knots.iter().rev().cloned().collect(),
                slopes: inv_slopes.into_iter().rev().collect(),
            }
        }
    }

    /// Evaluation on piece `p` (an index into `slopes`).
    fn eval_in_piece(&self, x: &T, p: usize) -> T {
        let s = &self.slopes[p];
        if p == 0 {
            self.values[0].clone() - s.clone() * (self.knots[0].clone() - x.clone())
        } else {
            self.values[p - 1].clone() + s.clone() * (x.clone() - self.knots[p - 1].clone())
        }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &PLHomeo<T>) -> PLHomeo<T> {
        if g.is_increasing() {
            return self.compose_increasing(g);
        }
        self.compose_general(g)
    }

    /// Merge sweep over the breakpoints of `g` and the preimages of those of `self`.
    fn compose_increasing(&self, g: &PLHomeo<T>) -> PLHomeo<T> {
        let (fk, fv, fs) = (&self.knots, &self.values, &self.slopes);
        let (gk, gv, gs) = (&g.knots, &g.values, &g.slopes);
        let mut pre = Vec::with_capacity(fk.len());
        let mut p = 0usize;
        for y in fk {
            while p < gv.len() && gv[p] <= *y {
                p += 1;
            }
            pre.push(if p == 0 {
                gk[0].clone() - (gv[0].clone() - y.clone()) / gs[0].clone()
            } else {
                gk[p - 1].clone() + (y.clone() - gv[p - 1].clone()) / gs[p].clone()
            });
        }
        let cap = gk.len() + fk.len();
        let mut knots = Vec::with_capacity(cap);
        let mut values = Vec::with_capacity(cap);
        let mut slopes = Vec::with_capacity(cap + 1);
        let (mut i, mut j) = (0usize, 0usize);
        slopes.push(fs[0].clone() * gs[0].clone());
        while i < gk.len() || j < pre.len() {
            let take_g = j == pre.len() || (i < gk.len() && gk[i] < pre[j] && !gk[i].nearly_eq(&pre[j]));
            let take_f = i == gk.len() || (j < pre.len() && pre[j] < gk[i] && !gk[i].nearly_eq(&pre[j]));
            if take_g {
                knots.push(gk[i].clone());
                values.push(self.eval_in_piece(&gv[i], j));
                i += 1;
            } else if take_f {
                knots.push(pre[j].clone());
                values.push(fv[j].clone());
                j += 1;
            } else {
                knots.push(gk[i].clone());
                values.push(fv[j].clone());
                i += 1;
                j += 1;
            }
            slopes.push(fs[j].clone() * gs[i].clone());
        }
        PLHomeo { knots, values, slopes }.simplify()
    }

    fn compose_general(&self, g: &PLHomeo<T>) -> PLHomeo<T> {
        let ginv = g.inverse();
        let mut knots: Vec<T> = g.knots.clone();
        knots.extend(self.knots.iter().map(|k| ginv.eval(k)));
        knots.sort_by(cmp);
        knots.dedup_by(|a, b| a.nearly_eq(b));
        let values: Vec<T> = knots.iter().map(|k| self.eval(&g.eval(k))).collect();
        let n = knots.len();
        let mut slopes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let m = if i == 0 {
                knots[0].clone() - T::one()
            } else if i == n {
                knots[n - 1].clone() + T::one()
            } else {
                (knots[i - 1].clone() + knots[i].clone()) / T::from_i64(2)
            };
            slopes.push(self.slope_at(&g.eval(&m)) * g.slope_at(&m));
        }
        PLHomeo { knots, values, slopes }.simplify()
    }

    /// Drop breakpoints where the slope does not change.
    pub fn simplify(self) -> Self {
        let PLHomeo { knots, values, slopes } = self;
        let mut k2 = Vec::with_capacity(knots.len());
        let mut v2 = Vec::with_capacity(knots.len());
        let mut s2 = vec![slopes[0].clone()];
        for i in 0..knots.len() {
            if slopes[i + 1] != *s2.last().expect("nonempty") {
                k2.push(knots[i].clone());
                v2.push(values[i].clone());
                s2.push(slopes[i + 1].clone());
            }
        }
        if k2.is_empty() {
            k2.push(knots[0].clone());
            v2.push(values[0].clone());
            s2.push(slopes[0].clone());
        }
        PLHomeo {
            knots: k2,
            values: v2,
            slopes: s2,
        }
    }

    /// `self^k` by repeated squaring, failing once a result exceeds `cap` breakpoints.
    pub fn power(&self, k: i64, cap: usize) -> Result<Self> {
        let mut base = if k >= 0 { self.clone() } else { self.inverse() };
        let mut e = k.unsigned_abs();
        let mut acc = PLHomeo::identity();
        let check = |f: &PLHomeo<T>| {
            if f.breakpoint_count() > cap {
                Err(Error::BudgetExceeded {
                    what: "breakpoints",
                    limit: cap,
                })
            } else {
                Ok(())
            }
        };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
                check(&acc)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
                check(&base)?;
            }
        }
        Ok(acc)
    }

    /// `[min |slope|, max |slope|]` over all pieces including the tails.
    pub fn stretch_interval(&self) -> StretchInterval<T> {
        let mut a = self.slopes[0].abs();
        let mut b = a.clone();
        for s in &self.slopes[1..] {
            let s = s.abs();
            if s < a {
                a = s.clone();
            }
            if s > b {
                b = s;
            }
        }
        StretchInterval::new(a, b).expect("slopes are nonzero")
    }

    /// A certified quasisimilarity constant `b / a`.
    pub fn qs_constant(&self) -> T {
        self.stretch_interval().ratio()
    }

    /// Smallest `L` such that the map is `L`-bilipschitz.
    pub fn bilipschitz_constant(&self) -> T {
        let si = self.stretch_interval();
        T::max_of(&si.b, &(T::one() / si.a))
    }

    /// Fixed point set as a sorted list of points and closed intervals.
    pub fn fixed_points(&self) -> Vec<FixedComponent<T>> {
        let n = self.knots.len();
        let mut out: Vec<FixedComponent<T>> = Vec::new();
        let mut push = |c: FixedComponent<T>| {
            if let (Some(FixedComponent::Interval(_, Some(hi))), FixedComponent::Point(p)) = (out.last(), &c) {
                if hi.nearly_eq(p) {
                    return;
                }
            }
            if let (Some(FixedComponent::Point(p)), FixedComponent::Interval(Some(lo), _)) = (out.last(), &c) {
                if lo.nearly_eq(p) {
                    out.pop();
                }
            }
            if let (Some(FixedComponent::Interval(lo0, Some(hi0))), FixedComponent::Interval(Some(lo), hi)) =
                (out.last(), &c)
            {
                if hi0.nearly_eq(lo) {
                    let merged = FixedComponent::Interval(lo0.clone(), hi.clone());
                    out.pop();
                    out.push(merged);
                    return;
                }
            }
            if let (Some(FixedComponent::Point(p)), FixedComponent::Point(q)) = (out.last(), &c) {
                if p.nearly_eq(q) {
                    return;
                }
            }
            out.push(c);
        };
        for p in 0..=n {
            let lo = if p == 0 { None } else { Some(&self.knots[p - 1]) };
            let hi = if p == n { None } else { Some(&self.knots[p]) };
            let anchor = if p == 0 { 0 } else { p - 1 };
            let a = &self.knots[anchor];
            let v = &self.values[anchor];
            let s = &self.slopes[p];
            if *s == T::one() || (!T::EXACT && s.nearly_eq(&T::one())) {
                if v.nearly_eq(a) {
                    push(FixedComponent::Interval(lo.cloned(), hi.cloned()));
                }
                continue;
            }
            let x = (v.clone() - s.clone() * a.clone()) / (T::one() - s.clone());
            let inside = lo.is_none_or(|l| *l <= x || l.nearly_eq(&x)) && hi.is_none_or(|h| x <= *h || h.nearly_eq(&x));
            if inside {
                push(FixedComponent::Point(x));
            }
        }
        out
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PLHomeo<U> {
        PLHomeo {
            knots: self.knots.iter().map(&f).collect(),
            values: self.values.iter().map(&f).collect(),
            slopes: self.slopes.iter().map(&f).collect(),
        }
    }

    pub fn to_f64_map(&self) -> PLHomeo<f64> {
        self.map_scalar(|x| x.to_f64())
    }

    pub fn to_json(&self) -> PLJson {
        let n = self.knots.len();
        let f = |x: &T| x.to_f64();
        PLJson {
            breakpoints: self.knots.iter().map(f).collect(),
            slopes: self.slopes[1..n].iter().map(f).collect(),
            tails: Tails {
                lo: Tail {
                    slope: f(&self.slopes[0]),
                    intercept: f(&(self.values[0].clone() - self.slopes[0].clone() * self.knots[0].clone())),
                },
                hi: Tail {
                    slope: f(&self.slopes[n]),
                    intercept: f(&(self.values[n - 1].clone() - self.slopes[n].clone() * self.knots[n - 1].clone())),
                },
            },
            values: Some(self.values.iter().map(f).collect()),
        }
    }

    pub fn from_json(js: &PLJson) -> Result<Self> {
        let n = js.breakpoints.len();
        if n == 0 {
            return Err(Error::InvalidMap("no breakpoints".into()));
        }
        if js.slopes.len() + 1 != n {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints need {} interior slopes, got {}",
                n,
                n - 1,
                js.slopes.len()
            )));
        }
        if js.breakpoints.iter().chain(&js.slopes).any(|x| !x.is_finite()) {
            return Err(Error::InvalidMap("non-finite number".into()));
        }
        let knots: Vec<T> = js.breakpoints.iter().map(|&x| T::from_f64(x)).collect();
        let mut slopes = vec![T::from_f64(js.tails.lo.slope)];
        slopes.extend(js.slopes.iter().map(|&x| T::from_f64(x)));
        slopes.push(T::from_f64(js.tails.hi.slope));
        let mut values = Vec::with_capacity(n);
        values.push(slopes[0].clone() * knots[0].clone() + T::from_f64(js.tails.lo.intercept));
        for i in 1..n {
            let v = values[i - 1].clone() + slopes[i].clone() * (knots[i].clone() - knots[i - 1].clone());
            values.push(v);
        }
        let hi_check = slopes[n].clone() * knots[n - 1].clone() + T::from_f64(js.tails.hi.intercept);
        let scale = values[n - 1].to_f64().abs().max(1.0);
        if (hi_check.to_f64() - values[n - 1].to_f64()).abs() > 1e-9 * scale {
            return Err(Error::InvalidMap("upper tail does not meet the last breakpoint".into()));
        }
        Self::new(knots, values, slopes)
    }
}

/// A connected component of a fixed point set; `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedComponent<T> {
    Point(T),
    Interval(Option<T>, Option<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub lo: Tail,
    pub hi: Tail,
}

/// Interchange format for piecewise-linear maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLJson {
    pub breakpoints: Vec<f64>,
    /// Slopes of the bounded pieces, in order.
    pub slopes: Vec<f64>,
    pub tails: Tails,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}
