use serde::{Deserialize, Serialize};

use super::interval::{extract_stretch, power_stretch_profile, PowerProfile, StretchEstimate};
use super::pl::{FixedComponent, PLHomeo};
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointKind {
    Repelling,
    Attracting,
}

/// Points whose triple-ratio distortion under `f^power` exceeds the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsWitness {
    /// Common point of the two ratios.
    pub base: f64,
    pub p: f64,
    pub q: f64,
    pub power: i64,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    NoFixedPoint { direction: i8 },
    UniqueFixedPoint { point: f64, nature: FixedPointKind },
    NotUniformQs { witness: QsWitness },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    /// The analysis applies to `f^2` because `f` reverses orientation.
    pub squared: bool,
    pub class: Classification,
}

/// `[d(f z, f x) / d(z, x)] / [d(f z, f y) / d(z, y)]` for `f^k` given by images.
fn triple_ratio(z: f64, x: f64, y: f64, fz: f64, fx: f64, fy: f64) -> f64 {
    ((fz - fx).abs() / (z - x).abs()) / ((fz - fy).abs() / (z - y).abs())
}

/// Iterate `f` (and its inverse) on a triple until the triple ratio leaves `[1/bound, bound]`.
fn search_witness(f: &PLHomeo<f64>, base: f64, p: f64, q: f64, bound: f64, max_iter: i64) -> Option<QsWitness> {
    let finv = f.inverse();
    for (map, sign) in [(f, 1i64), (&finv, -1i64)] {
        let (mut z, mut x, mut y) = (base, p, q);
        for k in 1..=max_iter {
            z = map.eval(&z);
            x = map.eval(&x);
            y = map.eval(&y);
            let r = triple_ratio(base, p, q, z, x, y);
            if !r.is_finite() {
                break;
            }
            let r = r.max(1.0 / r);
            if r > bound {
                return Some(QsWitness {
                    base,
                    p,
                    q,
                    power: sign * k,
                    ratio: r,
                    bound,
                });
            }
        }
    }
    None
}

const WITNESS_MAX_ITER: i64 = 1_000_000;

/// Dynamics of the cyclic group generated by `f`.
///
/// The witness bound is the quasihomomorphism constant of the power
/// profile on `-M..=M`: every `f^m` there is a quasisimilarity with that
/// constant, and the witness exhibits a power that is not.
pub fn classify<T: Scalar>(f: &PLHomeo<T>, max_power: i64, cap: usize) -> Result<ClassifyReport> {
    if f.is_identity() {
        return Err(Error::IdentityMap);
    }
    let (g, squared) = if f.is_increasing() {
        (f.clone(), false)
    } else {
        (f.compose(f), true)
    };
    if g.is_identity() {
        return Err(Error::WrongClass("f is an involution; f^2 is the identity".into()));
    }
    let fixed = g.fixed_points();
    let gf = g.to_f64_map();
    let class = match fixed.as_slice() {
        [] => {
            let x0 = T::zero();
            let direction = if g.eval(&x0) > x0 { 1 } else { -1 };
            Classification::NoFixedPoint { direction }
        }
        [FixedComponent::Point(p)] => {
            let pf = p.to_f64();
            let right = g.eval(&(p.clone() + T::one())) > p.clone() + T::one();
            let left = g.eval(&(p.clone() - T::one())) < p.clone() - T::one();
            match (right, left) {
                (true, true) => Classification::UniqueFixedPoint {
                    point: pf,
                    nature: FixedPointKind::Repelling,
                },
                (false, false) => Classification::UniqueFixedPoint {
                    point: pf,
                    nature: FixedPointKind::Attracting,
                },
                _ => {
                    let bound = profile_bound(&g, max_power, cap)?;
                    let w = search_witness(&gf, pf, pf - 1.0, pf + 1.0, bound, WITNESS_MAX_ITER)
                        .ok_or_else(|| Error::WrongClass("no witness found for a one-sided fixed point".into()))?;
                    Classification::NotUniformQs { witness: w }
                }
            }
        }
        comps => {
            let bound = profile_bound(&g, max_power, cap)?;
            let w = multi_fixed_witness(&gf, comps, bound)
                .ok_or_else(|| Error::WrongClass("no witness found for a fixed point set".into()))?;
            Classification::NotUniformQs { witness: w }
        }
    };
    Ok(ClassifyReport { squared, class })
}

fn profile_bound<T: Scalar>(g: &PLHomeo<T>, max_power: i64, cap: usize) -> Result<f64> {
    Ok(power_stretch_profile(g, max_power, cap)?.k.to_f64())
}

fn comp_bounds<T: Scalar>(c: &FixedComponent<T>) -> (Option<f64>, Option<f64>) {
    match c {
        FixedComponent::Point(p) => (Some(p.to_f64()), Some(p.to_f64())),
        FixedComponent::Interval(lo, hi) => (lo.as_ref().map(|x| x.to_f64()), hi.as_ref().map(|x| x.to_f64())),
    }
}

fn multi_fixed_witness<T: Scalar>(f: &PLHomeo<f64>, comps: &[FixedComponent<T>], bound: f64) -> Option<QsWitness> {
    // A bounded gap between consecutive fixed components: its midpoint
    // drifts toward one end while the two ends stay put.
    for w in comps.windows(2) {
        let (_, Some(x)) = comp_bounds(&w[0]) else { continue };
        let (Some(y), _) = comp_bounds(&w[1]) else { continue };
        if let Some(found) = search_witness(f, (x + y) / 2.0, x, y, bound, WITNESS_MAX_ITER) {
            return Some(found);
        }
    }
    // Otherwise some component is a nondegenerate interval with a moving
    // point beyond one of its ends.
    for c in comps {
        let (lo, hi) = comp_bounds(c);
        match (lo, hi) {
            (Some(u), Some(v)) if u < v => {
                for (base, other, moving) in [(u, v, v + (v - u)), (v, u, u - (v - u))] {
                    if let Some(found) = search_witness(f, base, other, moving, bound, WITNESS_MAX_ITER) {
                        return Some(found);
                    }
                }
            }
            (Some(u), None) => {
                if let Some(found) = search_witness(f, u, u + 1.0, u - 1.0, bound, WITNESS_MAX_ITER) {
                    return Some(found);
                }
            }
            (None, Some(v)) => {
                if let Some(found) = search_witness(f, v, v - 1.0, v + 1.0, bound, WITNESS_MAX_ITER) {
                    return Some(found);
                }
            }
            _ => {}
        }
    }
    None
}

/// A closed interval of a cover; `None` ends are infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverPiece<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
}

/// Rubber band check: `phi` is `K`-bilipschitz on every piece of a chained cover of R.
pub fn verify_rubber_band<T: Scalar>(phi: &PLHomeo<T>, cover: &[CoverPiece<T>], k: &T) -> Result<bool> {
    if cover.is_empty() || cover[0].lo.is_some() || cover[cover.len() - 1].hi.is_some() {
        return Err(Error::MalformedCover("cover must run from -inf to +inf".into()));
    }
    for w in cover.windows(2) {
        match (&w[0].hi, &w[1].lo) {
            (Some(a), Some(b)) if a.nearly_eq(b) => {}
            _ => return Err(Error::MalformedCover("adjacent pieces must share an endpoint".into())),
        }
    }
    for c in cover {
        if let (Some(a), Some(b)) = (&c.lo, &c.hi) {
            if a > b {
                return Err(Error::MalformedCover(format!("piece [{a}, {b}] is reversed")));
            }
        }
    }
    let lo_k = T::one() / k.clone();
    let knots = phi.knots();
    let slopes = phi.slopes();
    let mut ok = true;
    for c in cover {
        // slopes[p] lives on (knots[p-1], knots[p]); keep pieces meeting the cover piece.
        for (p, s) in slopes.iter().enumerate() {
            let piece_lo = if p == 0 { None } else { Some(&knots[p - 1]) };
            let piece_hi = knots.get(p);
            let below = matches!((piece_hi, &c.lo), (Some(h), Some(l)) if h <= l);
            let above = matches!((piece_lo, &c.hi), (Some(l), Some(h)) if l >= h);
            if below || above {
                continue;
            }
            let s = s.abs();
            if s > *k || s < lo_k {
                ok = false;
            }
        }
    }
    if ok && phi.bilipschitz_constant() > *k {
        return Err(Error::InvalidMap("cover check passed but the global slope scan did not".into()));
    }
    Ok(ok)
}

/// `sup |phi(f(x)) - model(phi(x))|` over `grid`.
pub fn conjugacy_error(f: &PLHomeo<f64>, phi: &PLHomeo<f64>, model: impl Fn(f64) -> f64, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|x| (phi.eval(&f.eval(x)) - model(phi.eval(x))).abs())
        .fold(0.0, f64::max)
}

/// `count` evenly spaced points on `[-half_width, half_width]`.
pub fn test_grid(half_width: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![0.0];
    }
    let step = 2.0 * half_width / (count - 1) as f64;
    (0..count).map(|i| -half_width + step * i as f64).collect()
}

/// `max_{|m| <= M} max(b(f^m), 1 / a(f^m))`, the bilipschitz bound of the powers.
pub fn uniform_power_bound<T: Scalar>(f: &PLHomeo<T>, max_power: i64, cap: usize) -> Result<T> {
    let profile = power_stretch_profile(f, max_power, cap)?;
    let mut best = T::one();
    for e in profile.entries() {
        let c = T::max_of(&e.interval.b, &(T::one() / e.interval.a.clone()));
        if c > best {
            best = c;
        }
    }
    Ok(best)
}

/// One fundamental domain of the orbit construction with the
/// conjugator's values relative to the domain's offset.
struct Segment<T> {
    /// Sorted `(x, rel)` pairs from one orbit point to the next.
    points: Vec<(T, T)>,
}

impl<T: Scalar> Segment<T> {
    fn lo(&self) -> &T {
        &self.points[0].0
    }

    fn hi(&self) -> &T {
        &self.points[self.points.len() - 1].0
    }

    fn interp(&self, x: &T) -> T {
        let i = self.points.partition_point(|p| p.0 <= *x).clamp(1, self.points.len() - 1);
        let (x0, v0) = &self.points[i - 1];
        let (x1, v1) = &self.points[i];
        v0.clone() + (v1.clone() - v0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    /// Push the segment forward by `g`, carrying `g`'s breakpoints along.
    fn advance(&self, g: &PLHomeo<T>) -> Segment<T> {
        let (lo, hi) = (self.lo().clone(), self.hi().clone());
        let mut pts: Vec<(T, T)> = self.points.clone();
        for b in g.knots() {
            if *b > lo && *b < hi && !pts.iter().any(|p| p.0.nearly_eq(b)) {
                pts.push((b.clone(), self.interp(b)));
            }
        }
        let mut out: Vec<(T, T)> = pts.into_iter().map(|(x, v)| (g.eval(&x), v)).collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
        out.dedup_by(|a, b| a.0.nearly_eq(&b.0));
        Segment { points: out }
    }
}

fn orient<T: Scalar>(pts: Vec<(T, T)>) -> Vec<(T, T)> {
    let mut pts = pts;
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
    pts
}

/// Conjugacy of a fixed-point-free map to the translation `x -> x + alpha`.
#[derive(Debug, Clone)]
pub struct TranslationConjugacy<T> {
    pub phi: PLHomeo<T>,
    pub alpha: T,
    /// The fundamental domains `[x_n, x_{n+1}]` plus the two tails.
    pub cover: Vec<CoverPiece<T>>,
    pub segments: usize,
}

/// Default safety cap on the number of fundamental domains.
pub const DEFAULT_SEGMENT_CAP: usize = 1_000_000;

/// Orbit construction: `phi = x - x0` on `[x0, f(x0)]`, extended by
/// `phi(x) = phi(f^{-n}(x)) + n alpha`, until `[-window, window]` and its
/// image under `f` are covered.
pub fn conjugate_to_translation<T: Scalar>(
    f: &PLHomeo<T>,
    x0: &T,
    window: &T,
    segment_cap: usize,
) -> Result<TranslationConjugacy<T>> {
    if !f.is_increasing() {
        return Err(Error::WrongClass("orientation-reversing map".into()));
    }
    if !f.fixed_points().is_empty() {
        return Err(Error::WrongClass("map has fixed points".into()));
    }
    let finv = f.inverse();
    let x1 = f.eval(x0);
    let alpha = x1.clone() - x0.clone();
    let forward_up = alpha > T::zero();
    let need_lo = T::min_of(&-window.clone(), &T::min_of(&f.eval(&-window.clone()), &finv.eval(&-window.clone())));
    let need_hi = T::max_of(window, &T::max_of(&f.eval(window), &finv.eval(window)));

    let seed = Segment {
        points: orient(vec![(x0.clone(), T::zero()), (x1.clone(), alpha.clone())]),
    };
    // Domains reached by f^n, n >= 0, and by f^{-n}, n >= 1, with their n.
    let mut forward: Vec<(i64, Segment<T>)> = vec![(0, seed)];
    let mut backward: Vec<(i64, Segment<T>)> = Vec::new();
    let covers = |s: &Segment<T>, up: bool| if up { *s.hi() >= need_hi } else { *s.lo() <= need_lo };
    // f moves points up when alpha > 0: forward images cover the top end.
    loop {
        let (n, last) = forward.last().expect("seed");
        if covers(last, forward_up) {
            break;
        }
        if forward.len() + backward.len() > segment_cap {
            return Err(Error::BudgetExceeded { what: "fundamental domains", limit: segment_cap });
        }
        let next = last.advance(f);
        forward.push((n + 1, next));
    }
    loop {
        let (n, last) = backward.last().unwrap_or(&forward[0]);
        if covers(last, !forward_up) {
            break;
        }
        if forward.len() + backward.len() > segment_cap {
            return Err(Error::BudgetExceeded { what: "fundamental domains", limit: segment_cap });
        }
        let next = last.advance(&finv);
        let n = *n - 1;
        backward.push((n, next));
    }
    let mut all: Vec<(i64, Segment<T>)> = backward.into_iter().chain(forward).collect();
    all.sort_by(|a, b| a.1.lo().partial_cmp(b.1.lo()).expect("comparable"));
    let segments = all.len();
    let mut points: Vec<(T, T)> = Vec::new();
    let mut cover = vec![CoverPiece { lo: None, hi: Some(all[0].1.lo().clone()) }];
    for (n, seg) in &all {
        let offset = T::from_i64(*n) * alpha.clone();
        for (x, rel) in &seg.points {
            if points.last().is_some_and(|p: &(T, T)| p.0.nearly_eq(x)) {
                continue;
            }
            points.push((x.clone(), rel.clone() + offset.clone()));
        }
        cover.push(CoverPiece { lo: Some(seg.lo().clone()), hi: Some(seg.hi().clone()) });
    }
    cover.push(CoverPiece { lo: Some(all[segments - 1].1.hi().clone()), hi: None });
    let lo_slope = (points[1].1.clone() - points[0].1.clone()) / (points[1].0.clone() - points[0].0.clone());
    let k = points.len();
    let hi_slope = (points[k - 1].1.clone() - points[k - 2].1.clone()) / (points[k - 1].0.clone() - points[k - 2].0.clone());
    let phi = PLHomeo::from_points(&points, lo_slope, hi_slope)?.simplify();
    Ok(TranslationConjugacy { phi, alpha, cover, segments })
}

/// Conjugacy of a map with a repelling or attracting fixed point to `x -> s x`.
#[derive(Debug, Clone)]
pub struct DilationConjugacy<T> {
    pub phi: PLHomeo<T>,
    /// The dilation factor for `f` itself.
    pub s: f64,
    pub estimate: StretchEstimate,
    /// Factor actually used in the construction, for the repelling normalization.
    pub s_used: T,
    pub fixed_point: T,
    /// The construction ran on `f^{-1}` because the fixed point attracts.
    pub inverted: bool,
    /// Slope of the seed map `[1, x_1] -> [1, s]`.
    pub seed_slope: T,
    /// Quasihomomorphism constant of the profile.
    pub k: f64,
    pub segments: usize,
}

/// Default threshold below which the orbit construction stops approaching the fixed point.
pub const DEFAULT_INNER_CUTOFF: f64 = 1e-12;

/// Orbit construction: normalize the fixed point to 0 and make it repelling,
/// seed `phi` affinely on `[1, f(1)] -> [1, s]` (and on `[f(-1), -1]`),
/// extend by `phi(x) = s^n phi(f^{-n}(x))`, and fill linearly to `(0, 0)`
/// below `inner_cutoff`.
pub fn conjugate_to_dilation<T: Scalar>(
    f: &PLHomeo<T>,
    max_power: i64,
    cap: usize,
    window: &T,
    inner_cutoff: &T,
    segment_cap: usize,
) -> Result<DilationConjugacy<T>> {
    if !f.is_increasing() {
        return Err(Error::WrongClass("orientation-reversing map".into()));
    }
    let p = match f.fixed_points().as_slice() {
        [FixedComponent::Point(p)] => p.clone(),
        _ => return Err(Error::WrongClass("map must have exactly one fixed point".into())),
    };
    let to_origin = PLHomeo::translation(-p.clone());
    let from_origin = PLHomeo::translation(p.clone());
    let g = to_origin.compose(f).compose(&from_origin);
    let one = T::one();
    let right = g.eval(&one) > one;
    let left = g.eval(&-one.clone()) < -one.clone();
    let (h, inverted) = match (right, left) {
        (true, true) => (g, false),
        (false, false) => (g.inverse(), true),
        _ => return Err(Error::WrongClass("fixed point is neither attracting nor repelling".into())),
    };
    let profile = power_stretch_profile(&h, max_power, cap)?;
    let estimate = extract_stretch(&profile, max_power)?;
    let s = dilation_factor(&profile, &estimate);
    let hinv = h.inverse();
    let w = window.clone() + p.abs();
    let need_hi = T::max_of(&w, &h.eval(&w));
    let need_lo = T::min_of(&-w.clone(), &h.eval(&-w.clone()));

    let mut points: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    let mut segments = 0usize;
    let mut seed_slope = T::zero();
    for c in [T::one(), -T::one()] {
        let x0 = c.clone();
        let x1 = h.eval(&x0);
        let slope = (s.clone() * c.clone() - c.clone()) / (x1.clone() - x0.clone());
        if c > T::zero() {
            seed_slope = slope;
        }
        let seed = Segment {
            points: orient(vec![(x0, c.clone()), (x1, s.clone() * c.clone())]),
        };
        let mut outward = vec![(0i64, seed)];
        loop {
            let (n, last) = outward.last().expect("seed");
            let done = if c > T::zero() { *last.hi() >= need_hi } else { *last.lo() <= need_lo };
            if done {
                break;
            }
            let next = last.advance(&h);
            outward.push((n + 1, next));
        }
        let mut inward: Vec<(i64, Segment<T>)> = Vec::new();
        loop {
            let (n, last) = inward.last().unwrap_or(&outward[0]);
            let near = if c > T::zero() { last.lo().clone() } else { -last.hi().clone() };
            if near < *inner_cutoff {
                break;
            }
            let next = last.advance(&hinv);
            let n = *n - 1;
            inward.push((n, next));
        }
        segments += outward.len() + inward.len();
        if segments > segment_cap {
            return Err(Error::BudgetExceeded { what: "fundamental domains", limit: segment_cap });
        }
        for (n, seg) in outward.iter().chain(inward.iter()) {
            let scale = s.powi(*n);
            for (x, rel) in &seg.points {
                points.push((x.clone(), rel.clone() * scale.clone()));
            }
        }
    }
    let mut points = orient(points);
    points.dedup_by(|a, b| a.0.nearly_eq(&b.0));
    let k = points.len();
    let lo_slope = (points[1].1.clone() - points[0].1.clone()) / (points[1].0.clone() - points[0].0.clone());
    let hi_slope = (points[k - 1].1.clone() - points[k - 2].1.clone()) / (points[k - 1].0.clone() - points[k - 2].0.clone());
    let phi0 = PLHomeo::from_points(&points, lo_slope, hi_slope)?;
    let phi = phi0.compose(&to_origin);
    let s_f = if inverted { 1.0 / estimate.s } else { estimate.s };
    let k = estimate.k;
    Ok(DilationConjugacy {
        phi,
        s: s_f,
        estimate,
        s_used: s,
        fixed_point: p,
        inverted,
        seed_slope,
        k,
        segments,
    })
}

/// The float midpoint for `f64`; for exact scalars the simplest value whose
/// `M`-th power lies in `I_M`, falling back to the midpoint.
fn dilation_factor<T: Scalar>(profile: &PowerProfile<T>, est: &StretchEstimate) -> T {
    let mid = T::from_f64(est.s);
    if !T::EXACT {
        return mid;
    }
    let iv = profile.interval(est.m);
    for slack in [0.0, 1e-15, 1e-12, 1e-9] {
        let lo = T::from_f64(est.lo * (1.0 - slack));
        let hi = T::from_f64(est.hi * (1.0 + slack));
        let cand = T::simplest_between(&lo, &hi);
        let p = cand.powi(est.m);
        if iv.a <= p && p <= iv.b {
            return cand;
        }
    }
    mid
}
