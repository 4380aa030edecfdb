use serde::{Deserialize, Serialize};

use super::pl::PLHomeo;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A positive interval `[a, b]`: the best bilipschitz bounds of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchInterval<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> StretchInterval<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) || a > b {
            return Err(Error::Constraint(format!("[{a}, {b}] is not a positive interval")));
        }
        Ok(StretchInterval { a, b })
    }

    pub fn point(s: T) -> Self {
        StretchInterval { a: s.clone(), b: s }
    }

    pub fn one() -> Self {
        Self::point(T::one())
    }

    /// `[a, b] · [c, d] = [ac, bd]`.
    pub fn mul(&self, other: &Self) -> Self {
        StretchInterval {
            a: self.a.clone() * other.a.clone(),
            b: self.b.clone() * other.b.clone(),
        }
    }

    /// `[1/b, 1/a]`.
    pub fn inverse(&self) -> Self {
        StretchInterval {
            a: T::one() / self.b.clone(),
            b: T::one() / self.a.clone(),
        }
    }

    pub fn ratio(&self) -> T {
        self.b.clone() / self.a.clone()
    }

    /// Whether `other` lies inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub fn contains_value(&self, x: &T) -> bool {
        self.a <= *x && *x <= self.b
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.a.to_f64(), self.b.to_f64())
    }
}

/// One entry `m -> [a_m, b_m]` of a power profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEntry<T> {
    pub m: i64,
    pub interval: StretchInterval<T>,
    /// False when the interval is only a containment bound.
    pub exact: bool,
}

/// The uniform quasihomomorphism `m -> [a(f^m), b(f^m)]` on `-M..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile<T> {
    pub max_power: i64,
    entries: Vec<ProfileEntry<T>>,
    /// Largest endpoint ratio observed.
    pub k: T,
}

impl<T: Scalar> PowerProfile<T> {
    /// Build a profile from intervals for `m = 1..=M`; negative powers follow by inversion.
    pub fn from_positive(positive: Vec<(StretchInterval<T>, bool)>) -> Self {
        let mm = positive.len() as i64;
        let mut entries = Vec::with_capacity(2 * positive.len() + 1);
        for (iv, exact) in positive.iter().rev() {
            entries.push((iv.inverse(), *exact));
        }
        entries.push((StretchInterval::one(), true));
        entries.extend(positive);
        let entries: Vec<ProfileEntry<T>> = entries
            .into_iter()
            .enumerate()
            .map(|(i, (interval, exact))| ProfileEntry {
                m: i as i64 - mm,
                interval,
                exact,
            })
            .collect();
        let mut k = T::one();
        for e in &entries {
            let r = e.interval.ratio();
            if r > k {
                k = r;
            }
        }
        PowerProfile {
            max_power: mm,
            entries,
            k,
        }
    }

    pub fn get(&self, m: i64) -> Option<&ProfileEntry<T>> {
        if m.abs() > self.max_power {
            return None;
        }
        self.entries.get((m + self.max_power) as usize)
    }

    pub fn interval(&self, m: i64) -> &StretchInterval<T> {
        &self.get(m).expect("power within profile range").interval
    }

    pub fn entries(&self) -> &[ProfileEntry<T>] {
        &self.entries
    }

    pub fn all_exact(&self) -> bool {
        self.entries.iter().all(|e| e.exact)
    }

    /// Check the four quasihomomorphism axioms on `|i|, |j|, |i + j| <= bound`.
    pub fn check_axioms(&self, bound: i64) -> Result<()> {
        let bound = bound.min(self.max_power);
        if *self.interval(0) != StretchInterval::one() {
            return Err(Error::AxiomViolation("identity interval is not [1, 1]".into()));
        }
        for m in -bound..=bound {
            let iv = self.interval(m);
            if iv.ratio() > self.k {
                return Err(Error::AxiomViolation(format!("ratio at power {m} exceeds K")));
            }
            if self.interval(-m).clone() != iv.inverse() {
                return Err(Error::AxiomViolation(format!("inverse interval mismatch at power {m}")));
            }
            for j in -bound..=bound {
                let s = m + j;
                if s.abs() > bound {
                    continue;
                }
                if !iv.mul(self.interval(j)).contains(self.interval(s)) {
                    return Err(Error::AxiomViolation(format!(
                        "[a({s}), b({s})] not inside [a({m})a({j}), b({m})b({j})]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact test of `I_{mn} ⊆ I_n`, i.e. `a_n^m <= a_{mn}` and `b_{mn} <= b_n^m`.
    pub fn nested(&self, m: i64, n: i64) -> bool {
        let base = self.interval(n);
        let target = self.interval(m * n);
        base.a.powi(m) <= target.a && target.b <= base.b.powi(m)
    }

    /// All pairs `1 <= m <= max_m`, `1 <= n <= max_n` with `mn` in range; returns the failures.
    pub fn nested_failures(&self, max_m: i64, max_n: i64) -> Vec<(i64, i64)> {
        let mut bad = Vec::new();
        for n in 1..=max_n {
            for m in 1..=max_m {
                if m * n <= self.max_power && !self.nested(m, n) {
                    bad.push((m, n));
                }
            }
        }
        bad
    }
}

/// Power profile of `f` for `m = -M..=M`.
///
/// Powers are composed exactly until a power exceeds `cap` breakpoints;
/// beyond that, intervals come from the containment axiom
/// `I(m) ⊆ I(m - 1) · I(1)` and are marked inexact.
pub fn power_stretch_profile<T: Scalar>(f: &PLHomeo<T>, max_power: i64, cap: usize) -> Result<PowerProfile<T>> {
    if max_power < 1 {
        return Err(Error::Constraint("profile needs M >= 1".into()));
    }
    let mut positive = Vec::with_capacity(max_power as usize);
    let mut current = Some(f.clone());
    let one = f.stretch_interval();
    for _ in 1..=max_power {
        match current.take() {
            Some(p) => {
                positive.push((p.stretch_interval(), true));
                if positive.len() < max_power as usize {
                    let next = f.compose(&p);
                    if next.breakpoint_count() <= cap {
                        current = Some(next);
                    }
                }
            }
            None => {
                let (prev, _) = positive.last().expect("first power is exact");
                let bound: StretchInterval<T> = one.mul(prev);
                positive.push((bound, false));
            }
        }
    }
    Ok(PowerProfile::from_positive(positive))
}

/// The stretch factor `s` with `s^m ∈ [a_m, b_m]` for every `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchEstimate {
    pub s: f64,
    /// Certified bound on `|s_true / s - 1|`, namely `K^{1/(2M)} - 1`.
    pub rel_err: f64,
    /// `I_M = [a_M^{1/M}, b_M^{1/M}]`.
    pub lo: f64,
    pub hi: f64,
    pub k: f64,
    pub m: i64,
}

/// Geometric midpoint of `I_M`, after checking the nesting `I_{mn} ⊆ I_n` for `mn <= M`.
pub fn extract_stretch<T: Scalar>(profile: &PowerProfile<T>, max_power: i64) -> Result<StretchEstimate> {
    let mm = max_power.min(profile.max_power);
    if mm < 1 {
        return Err(Error::Constraint("extraction needs M >= 1".into()));
    }
    profile.check_axioms(mm.min(32))?;
    for n in 1..=mm {
        for m in 1..=mm / n {
            if !profile.nested(m, n) {
                return Err(Error::AxiomViolation(format!("I_{} is not inside I_{n}", m * n)));
            }
        }
    }
    let iv = profile.interval(mm);
    let lo = iv.a.ln() / mm as f64;
    let hi = iv.b.ln() / mm as f64;
    let k = profile.k.to_f64();
    Ok(StretchEstimate {
        s: ((lo + hi) / 2.0).exp(),
        rel_err: k.powf(1.0 / (2.0 * mm as f64)) - 1.0,
        lo: lo.exp(),
        hi: hi.exp(),
        k,
        m: mm,
    })
}
