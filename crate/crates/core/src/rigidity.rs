//! Commensurability of BS(1,m) and BS(1,n), presentations of the groups
//! `Γ` in each case, the infinite dihedral group `B` with its endomorphisms,
//! and the dimension and index formulas for `Z^r`-by-cyclic HNN groups.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m = r^e` with `e` maximal, so `r` is not a proper power.
pub fn primitive_root(m: u64) -> Result<(u64, u32)> {
    if m < 2 {
        return Err(Error::Constraint(format!("primitive root needs m >= 2, got {m}")));
    }
    let max_e = 63 - m.leading_zeros();
    for e in (2..=max_e).rev() {
        if let Some(r) = exact_root(m, e) {
            return Ok((r, e));
        }
    }
    Ok((m, 1))
}

/// The integer `r` with `r^e = m`, if any.
fn exact_root(m: u64, e: u32) -> Option<u64> {
    let guess = (m as f64).powf(1.0 / e as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r >= 2 && r.checked_pow(e) == Some(m))
}

/// Whether BS(1,m) and BS(1,n) are commensurable: `m`, `n` are powers of a common integer.
pub fn commensurable(m: u64, n: u64) -> Result<bool> {
    Ok(primitive_root(m)?.0 == primitive_root(n)?.0)
}

/// The cases of the classification of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GammaCase {
    Case1,
    Case2,
    Case3i,
    Case3ii,
}

impl std::str::FromStr for GammaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "case1" => Ok(GammaCase::Case1),
            "2" | "case2" => Ok(GammaCase::Case2),
            "3i" | "case3i" => Ok(GammaCase::Case3i),
            "3ii" | "case3ii" => Ok(GammaCase::Case3ii),
            _ => Err(Error::Parse(format!("unknown case {s:?}"))),
        }
    }
}

/// A relation `lhs = rhs` between words; lowercase letters are generators,
/// uppercase their inverses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: String,
    pub rhs: String,
}

impl Relation {
    fn new(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Relation {
            lhs: lhs.into(),
            rhs: rhs.into(),
        }
    }

    /// The relator `lhs · rhs^-1`.
    pub fn relator(&self) -> String {
        let mut w = self.lhs.clone();
        w.push_str(&invert_word(&self.rhs));
        w
    }
}

fn invert_word(w: &str) -> String {
    w.chars()
        .rev()
        .map(|c| {
            if c.is_ascii_lowercase() {
                c.to_ascii_uppercase()
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}

fn power_word(letter: char, e: i64) -> String {
    let c = if e < 0 { letter.to_ascii_uppercase() } else { letter };
    std::iter::repeat_n(c, e.unsigned_abs() as usize).collect()
}

/// A presentation of `Γ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaPresentation {
    pub case: GammaCase,
    pub m: i64,
    /// Set in Case 3.ii, where `m = 2k + 1`.
    pub k: Option<i64>,
    pub generators: Vec<char>,
    pub relations: Vec<Relation>,
    /// `[Γ : Γ_+]`.
    pub positive_index: u32,
    /// `Γ_+` is BS(1, `positive_bs`).
    pub positive_bs: i64,
}

impl GammaPresentation {
    pub fn relators(&self) -> Vec<String> {
        self.relations.iter().map(Relation::relator).collect()
    }

    /// GAP input defining the group as a quotient of a free group.
    pub fn to_gap(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("\"{g}\"")).collect();
        let rels: Vec<String> = self.relators().iter().map(|w| gap_word(w)).collect();
        let mut s = format!("F := FreeGroup({});;\n", gens.join(", "));
        for (i, g) in self.generators.iter().enumerate() {
            s.push_str(&format!("{g} := F.{};;\n", i + 1));
        }
        s.push_str(&format!("G := F / [ {} ];;\n", rels.join(", ")));
        s
    }
}

/// A word in GAP syntax, with runs collapsed into powers.
fn gap_word(w: &str) -> String {
    let mut parts: Vec<(char, i64)> = Vec::new();
    for c in w.chars() {
        let (g, e) = if c.is_ascii_uppercase() {
            (c.to_ascii_lowercase(), -1)
        } else {
            (c, 1)
        };
        match parts.last_mut() {
            Some((h, f)) if *h == g => *f += e,
            _ => parts.push((g, e)),
        }
    }
    parts.retain(|p| p.1 != 0);
    if parts.is_empty() {
        return "One(F)".into();
    }
    parts
        .iter()
        .map(|&(g, e)| if e == 1 { g.to_string() } else { format!("{g}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for GammaPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: String = self.generators.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|r| format!("{}={}", r.lhs, if r.rhs.is_empty() { "1" } else { &r.rhs }))
            .collect();
        write!(f, "<{gens} | {}>", rels.join(", "))
    }
}

/// Presentation of `Γ` in the given case.
///
/// `m` is the stretch of the HNN endomorphism: `m >= 2` in Cases 1 and 3.i,
/// `m <= -2` in Case 2 (the group BS(1,m)), odd `m = 2k + 1 >= 3` in Case 3.ii.
pub fn enumerate_gamma(case: GammaCase, m: i64) -> Result<GammaPresentation> {
    let bs = |m: i64| vec![Relation::new("taT", power_word('a', m))];
    let dihedral = || vec![Relation::new("rr", ""), Relation::new("raR", "A")];
    match case {
        GammaCase::Case1 | GammaCase::Case2 => {
            let ok = if case == GammaCase::Case1 { m >= 2 } else { m <= -2 };
            if !ok {
                let need = if case == GammaCase::Case1 { "m >= 2" } else { "m <= -2" };
                return Err(Error::Constraint(format!("{case:?} needs {need}, got {m}")));
            }
            Ok(GammaPresentation {
                case,
                m,
                k: None,
                generators: vec!['a', 't'],
                relations: bs(m),
                positive_index: if case == GammaCase::Case1 { 1 } else { 2 },
                positive_bs: if case == GammaCase::Case1 { m } else { m * m },
            })
        }
        GammaCase::Case3i => {
            if m < 2 {
                return Err(Error::Constraint(format!("Case3i needs m >= 2, got {m}")));
            }
            let mut relations = dihedral();
            relations.extend(bs(m));
            relations.push(Relation::new("trT", "r"));
            Ok(GammaPresentation {
                case,
                m,
                k: None,
                generators: vec!['a', 'r', 't'],
                relations,
                positive_index: 2,
                positive_bs: m,
            })
        }
        GammaCase::Case3ii => {
            if m < 3 || m % 2 == 0 {
                return Err(Error::Constraint(format!("Case3ii needs an odd m = 2k + 1 >= 3, got {m}")));
            }
            let k = (m - 1) / 2;
            let mut relations = dihedral();
            relations.extend(bs(m));
            relations.push(Relation::new("trT", power_word('a', -k) + "r"));
            Ok(GammaPresentation {
                case,
                m,
                k: Some(k),
                generators: vec!['a', 'r', 't'],
                relations,
                positive_index: 2,
                positive_bs: m,
            })
        }
    }
}

/// An isometry `x -> s x + t` of R in the infinite dihedral group
/// `B = <a, r>`, `a(x) = x + 2`, `r(x) = -x`; `t` is even.
///
/// Words act left letter first, so `r_i = a^-i r` is `x -> -x + 2i`,
/// the reflection about `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DihedralElem {
    pub flip: bool,
    pub t: i64,
}

impl DihedralElem {
    pub const IDENTITY: DihedralElem = DihedralElem { flip: false, t: 0 };

    pub fn new(flip: bool, t: i64) -> Result<Self> {
        if t % 2 != 0 {
            return Err(Error::Constraint(format!("translation {t} is not even")));
        }
        Ok(DihedralElem { flip, t })
    }

    pub fn a() -> Self {
        DihedralElem { flip: false, t: 2 }
    }

    pub fn r() -> Self {
        DihedralElem { flip: true, t: 0 }
    }

    /// `a^j`.
    pub fn a_pow(j: i64) -> Self {
        DihedralElem { flip: false, t: 2 * j }
    }

    /// `r_i = a^-i r`, the reflection about `i`.
    pub fn reflection(i: i64) -> Self {
        DihedralElem { flip: true, t: 2 * i }
    }

    /// The point fixed by a reflection.
    pub fn reflection_point(&self) -> Option<i64> {
        self.flip.then_some(self.t / 2)
    }

    fn sign(&self) -> i64 {
        if self.flip {
            -1
        } else {
            1
        }
    }

    /// The word `self · other`: first `self`, then `other`.
    pub fn mul(&self, other: &DihedralElem) -> DihedralElem {
        DihedralElem {
            flip: self.flip != other.flip,
            t: other.sign() * self.t + other.t,
        }
    }

    pub fn inv(&self) -> DihedralElem {
        DihedralElem {
            flip: self.flip,
            t: -self.sign() * self.t,
        }
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        let v = if self.flip { -x.clone() } else { x.clone() };
        v + BigRational::from_integer(self.t.into())
    }

    /// Evaluate a word in `a, r` (uppercase for inverses).
    pub fn eval_word(w: &str) -> Result<DihedralElem> {
        let mut acc = Self::IDENTITY;
        for c in w.chars() {
            let g = match c {
                'a' => Self::a(),
                'A' => Self::a().inv(),
                'r' | 'R' => Self::r(),
                _ => return Err(Error::Parse(format!("letter {c:?} is not in a, r"))),
            };
            acc = acc.mul(&g);
        }
        Ok(acc)
    }

    /// Normal form `a^j` or `a^j r`.
    pub fn normal_form(&self) -> String {
        let mut w = power_word('a', self.t / 2 * if self.flip { -1 } else { 1 });
        if self.flip {
            w.push('r');
        }
        w
    }
}

/// Whether the endomorphism fixes a reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndoMode {
    /// `a -> a^m`, `r -> r`.
    FixReflection,
    /// `a -> a^m`, `r -> a^-k r` with `m = 2k + 1`.
    NoFixedReflection,
}

/// An injective, non-surjective, end-preserving endomorphism of `B`,
/// realized in `Aff_+(R)` by `x -> m x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DihedralEndo {
    pub m: i64,
    pub mode: EndoMode,
    /// `0` for a fixed reflection, `k` otherwise.
    pub c: i64,
}

pub fn dihedral_endo(m: i64, mode: EndoMode) -> Result<DihedralEndo> {
    match mode {
        EndoMode::FixReflection if m >= 2 => Ok(DihedralEndo { m, mode, c: 0 }),
        EndoMode::NoFixedReflection if m >= 3 && m % 2 == 1 => Ok(DihedralEndo { m, mode, c: (m - 1) / 2 }),
        EndoMode::FixReflection => Err(Error::Constraint(format!("m >= 2 required, got {m}"))),
        EndoMode::NoFixedReflection => Err(Error::Constraint(format!("an odd m = 2k + 1 >= 3 is required, got {m}"))),
    }
}

impl DihedralEndo {
    /// `φ(x -> s x + t) = (x -> s x + m t + c (1 - s))`.
    pub fn apply(&self, g: &DihedralElem) -> DihedralElem {
        DihedralElem {
            flip: g.flip,
            t: self.m * g.t + if g.flip { 2 * self.c } else { 0 },
        }
    }

    /// `φ(r_i) = r_{m i + c}`.
    pub fn on_reflection_index(&self, i: i64) -> i64 {
        self.m * i + self.c
    }

    /// The realization `x -> m x + c`.
    pub fn realize(&self, x: &BigRational) -> BigRational {
        x * BigRational::from_integer(self.m.into()) + BigRational::from_integer(self.c.into())
    }

    /// A preimage under `φ`, if one exists.
    pub fn preimage(&self, g: &DihedralElem) -> Option<DihedralElem> {
        let shift = if g.flip { 2 * self.c } else { 0 };
        let u = g.t - shift;
        if u % (2 * self.m) != 0 {
            return None;
        }
        Some(DihedralElem { flip: g.flip, t: u / self.m })
    }

    /// The fixed reflection index, if any.
    pub fn fixed_reflection(&self) -> Option<i64> {
        let d = self.m - 1;
        (self.c % d == 0).then(|| -self.c / d)
    }
}

/// Virtual cohomological dimension of `<Z^r, t | t b t^-1 = ψ(b)>`.
pub fn vcd_mapping_torus(r: u32) -> u32 {
    r + 1
}

/// A compactly supported cohomology group `H^k_c(R^r × T_I; Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CohomologyGroup {
    Zero,
    /// Free abelian of the given finite rank.
    Free(u32),
    InfiniteRank,
}

/// `k -> H^k_c(R^r × T_I)` for `k = 0..=r + 2`; nonzero only at `k = r + 1`.
pub fn cohomology_profile(r: u32, index: u64) -> Result<BTreeMap<u32, CohomologyGroup>> {
    if index == 0 {
        return Err(Error::Constraint("index must be positive".into()));
    }
    let top = if index == 1 {
        CohomologyGroup::Free(1)
    } else {
        CohomologyGroup::InfiniteRank
    };
    Ok((0..=r + 2)
        .map(|k| (k, if k == r + 1 { top } else { CohomologyGroup::Zero }))
        .collect())
}

/// `[Z^r : ψ(Z^r)] = |det ψ|`, by fraction-free elimination.
pub fn endo_index(psi: &[Vec<i64>]) -> Result<BigInt> {
    let r = psi.len();
    if r == 0 || psi.iter().any(|row| row.len() != r) {
        return Err(Error::Constraint("matrix must be square and nonempty".into()));
    }
    let mut a: Vec<Vec<BigInt>> = psi.iter().map(|row| row.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut prev = BigInt::from(1);
    let mut sign = 1i32;
    for k in 0..r {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..r).find(|&i| !a[i][k].is_zero()) else {
                return Err(Error::Singular);
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..r {
            for j in k + 1..r {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = &a[r - 1][r - 1] * sign;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    Ok(det.abs())
}

/// The torsion-free group BS(1,k) and its commensurability class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionFreeClass {
    pub k: i64,
    pub presentation: GammaPresentation,
    /// BS(1, `commensurable_to`) sits in BS(1,k) with index 1 (`k > 0`) or 2 (`k < 0`).
    pub commensurable_to: u64,
    /// Every BS(1, `root`^e) is in the class.
    pub root: u64,
}

pub fn torsionfree_classify(k: i64) -> Result<TorsionFreeClass> {
    if k.abs() < 2 {
        return Err(Error::Constraint(format!("|k| >= 2 required, got {k}")));
    }
    let case = if k > 0 { GammaCase::Case1 } else { GammaCase::Case2 };
    let presentation = enumerate_gamma(case, k)?;
    let commensurable_to = if k > 0 {
        k as u64
    } else {
        k.checked_mul(k)
            .and_then(|v| v.to_u64())
            .ok_or_else(|| Error::Constraint("k is too large".into()))?
    };
    Ok(TorsionFreeClass {
        k,
        presentation,
        commensurable_to,
        root: primitive_root(commensurable_to)?.0,
    })
}
