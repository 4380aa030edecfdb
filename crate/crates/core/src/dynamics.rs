//! Diagonal actions of BS(1,n) on the triple spaces `T(R,R,Q_n)` and
//! `T(R,Q_n,Q_n)`: censuses on compact blocks, fundamental-domain witnesses,
//! contraction elements and source-sink probes.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bsgroup::{ball_spheres, AffElem, AffJson};
use crate::error::{Error, Result};
use crate::nadic::{pow_n, CloneBall, CloneJson, CloneRelation, NAdic, Radius};

/// `(x, y, zeta)` with `x != y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TripleRRQ {
    x: BigRational,
    y: BigRational,
    zeta: NAdic,
}

/// `(x, eta, zeta)` with `eta != zeta`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TripleRQQ {
    x: BigRational,
    eta: NAdic,
    zeta: NAdic,
}

impl TripleRRQ {
    pub fn new(x: BigRational, y: BigRational, zeta: NAdic) -> Result<Self> {
        if x == y {
            return Err(Error::EqualPoints);
        }
        Ok(TripleRRQ { x, y, zeta })
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn zeta(&self) -> &NAdic {
        &self.zeta
    }

    pub fn base(&self) -> u32 {
        self.zeta.base()
    }
}

impl TripleRQQ {
    pub fn new(x: BigRational, eta: NAdic, zeta: NAdic) -> Result<Self> {
        if eta.base() != zeta.base() {
            return Err(Error::BaseMismatch(eta.base(), zeta.base()));
        }
        if eta == zeta {
            return Err(Error::EqualPoints);
        }
        Ok(TripleRQQ { x, eta, zeta })
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn eta(&self) -> &NAdic {
        &self.eta
    }

    pub fn zeta(&self) -> &NAdic {
        &self.zeta
    }

    pub fn base(&self) -> u32 {
        self.zeta.base()
    }
}

/// A triple space carrying the diagonal action.
pub trait Triple: Sized {
    fn act(&self, g: &AffElem) -> Self;
}

impl Triple for TripleRRQ {
    fn act(&self, g: &AffElem) -> Self {
        TripleRRQ {
            x: g.act_r(&self.x),
            y: g.act_r(&self.y),
            zeta: g.act_qn(&self.zeta),
        }
    }
}

impl Triple for TripleRQQ {
    fn act(&self, g: &AffElem) -> Self {
        TripleRQQ {
            x: g.act_r(&self.x),
            eta: g.act_qn(&self.eta),
            zeta: g.act_qn(&self.zeta),
        }
    }
}

pub fn act_triple<T: Triple>(g: &AffElem, t: &T) -> T {
    t.act(g)
}

/// A closed interval `[lo, hi]` of R.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RealInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RealInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Constraint(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(RealInterval { lo, hi })
    }

    pub fn from_ints(lo: i64, hi: i64) -> Result<Self> {
        Self::new(BigRational::from_integer(lo.into()), BigRational::from_integer(hi.into()))
    }

    /// Image under an element of BS(1,n); these are increasing maps.
    pub fn image(&self, g: &AffElem) -> RealInterval {
        RealInterval {
            lo: g.act_r(&self.lo),
            hi: g.act_r(&self.hi),
        }
    }

    pub fn intersects(&self, other: &RealInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }
}

fn clones_meet(c: &CloneBall, d: &CloneBall) -> bool {
    c.relation(d) != CloneRelation::Disjoint
}

/// A compact product set inside one of the triple spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompactBlock {
    /// `X × Y × C` in `T(R, R, Q_n)`, with `X`, `Y` disjoint.
    Rrq { x: RealInterval, y: RealInterval, zeta: CloneBall },
    /// `X × C × D` in `T(R, Q_n, Q_n)`, with `C`, `D` disjoint.
    Rqq { x: RealInterval, eta: CloneBall, zeta: CloneBall },
    /// `X × Y × Z` in `T(R, R, R)`, pairwise disjoint; the control space.
    Rrr { x: RealInterval, y: RealInterval, z: RealInterval },
}

impl CompactBlock {
    pub fn rrq(x: RealInterval, y: RealInterval, zeta: CloneBall) -> Result<Self> {
        if x.intersects(&y) {
            return Err(Error::Constraint("real factors of the block must be disjoint".into()));
        }
        Ok(CompactBlock::Rrq { x, y, zeta })
    }

    pub fn rqq(x: RealInterval, eta: CloneBall, zeta: CloneBall) -> Result<Self> {
        if eta.base() != zeta.base() {
            return Err(Error::BaseMismatch(eta.base(), zeta.base()));
        }
        if clones_meet(&eta, &zeta) {
            return Err(Error::Constraint("clone factors of the block must be disjoint".into()));
        }
        Ok(CompactBlock::Rqq { x, eta, zeta })
    }

    pub fn rrr(x: RealInterval, y: RealInterval, z: RealInterval) -> Result<Self> {
        if x.intersects(&y) || y.intersects(&z) || x.intersects(&z) {
            return Err(Error::Constraint("real factors of the block must be pairwise disjoint".into()));
        }
        Ok(CompactBlock::Rrr { x, y, z })
    }

    /// `[0,1] × [2,3] × Z_n`.
    pub fn standard(n: u32) -> Result<Self> {
        let z = CloneBall::containing(&NAdic::zero(n)?, -1);
        Self::rrq(RealInterval::from_ints(0, 1)?, RealInterval::from_ints(2, 3)?, z)
    }

    /// `[0,1] × [2,3] × [4,5]`.
    pub fn standard_control() -> Result<Self> {
        Self::rrr(
            RealInterval::from_ints(0, 1)?,
            RealInterval::from_ints(2, 3)?,
            RealInterval::from_ints(4, 5)?,
        )
    }

    /// Base of the clone factors, if any.
    pub fn base(&self) -> Option<u32> {
        match self {
            CompactBlock::Rrq { zeta, .. } | CompactBlock::Rqq { zeta, .. } => Some(zeta.base()),
            CompactBlock::Rrr { .. } => None,
        }
    }

    /// Radii of the clone factors.
    pub fn clone_radii(&self) -> Vec<Radius> {
        match self {
            CompactBlock::Rrq { zeta, .. } => vec![zeta.radius()],
            CompactBlock::Rqq { eta, zeta, .. } => vec![eta.radius(), zeta.radius()],
            CompactBlock::Rrr { .. } => vec![],
        }
    }

    pub fn image(&self, g: &AffElem) -> CompactBlock {
        match self {
            CompactBlock::Rrq { x, y, zeta } => CompactBlock::Rrq {
                x: x.image(g),
                y: y.image(g),
                zeta: g.act_tree(zeta),
            },
            CompactBlock::Rqq { x, eta, zeta } => CompactBlock::Rqq {
                x: x.image(g),
                eta: g.act_tree(eta),
                zeta: g.act_tree(zeta),
            },
            CompactBlock::Rrr { x, y, z } => CompactBlock::Rrr {
                x: x.image(g),
                y: y.image(g),
                z: z.image(g),
            },
        }
    }

    /// Exact test of `g A ∩ A ≠ ∅`; products intersect factorwise.
    pub fn meets_translate(&self, g: &AffElem) -> bool {
        match self {
            CompactBlock::Rrq { x, y, zeta } => {
                x.image(g).intersects(x) && y.image(g).intersects(y) && clones_meet(&g.act_tree(zeta), zeta)
            }
            CompactBlock::Rqq { x, eta, zeta } => {
                x.image(g).intersects(x) && clones_meet(&g.act_tree(eta), eta) && clones_meet(&g.act_tree(zeta), zeta)
            }
            CompactBlock::Rrr { x, y, z } => {
                x.image(g).intersects(x) && y.image(g).intersects(y) && z.image(g).intersects(z)
            }
        }
    }

    pub fn contains_rrq(&self, t: &TripleRRQ) -> bool {
        match self {
            CompactBlock::Rrq { x, y, zeta } => x.contains(&t.x) && y.contains(&t.y) && zeta.contains(&t.zeta),
            _ => false,
        }
    }

    pub fn contains_rqq(&self, t: &TripleRQQ) -> bool {
        match self {
            CompactBlock::Rqq { x, eta, zeta } => x.contains(&t.x) && eta.contains(&t.eta) && zeta.contains(&t.zeta),
            _ => false,
        }
    }
}

/// Census of `{g in ball(L) : g A ∩ A ≠ ∅}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n: u32,
    pub radius: usize,
    /// `counts[L]` for `L = 0..=radius`.
    pub counts: Vec<u64>,
    /// The hits in the full ball, in breadth-first order.
    pub elements: Vec<AffJson>,
}

impl Census {
    /// Whether the counts are constant on `from..=radius`.
    pub fn stable_from(&self, from: usize) -> bool {
        from <= self.radius && self.counts[from..].windows(2).all(|w| w[0] == w[1])
    }

    /// Whether the counts strictly increase on `from..=radius`.
    pub fn strictly_increasing_from(&self, from: usize) -> bool {
        from <= self.radius && self.counts[from..].windows(2).all(|w| w[0] < w[1])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("L,count\n");
        for (l, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{l},{c}\n"));
        }
        s
    }
}

fn hits_parallel(block: &CompactBlock, sphere: &[AffElem], threads: usize) -> Vec<AffElem> {
    if threads <= 1 || sphere.len() < 1024 {
        return sphere.iter().filter(|g| block.meets_translate(g)).cloned().collect();
    }
    let chunk = sphere.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = sphere
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().filter(|g| block.meets_translate(g)).cloned().collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("census worker"))
            .collect()
    })
}

/// Exact census of the ball elements whose translate of `block` meets `block`.
///
/// Work is sharded over threads; shards are merged in order, so the output
/// does not depend on the thread count.
pub fn pd_census(block: &CompactBlock, n: u32, radius: usize, budget: usize) -> Result<Census> {
    if let Some(b) = block.base() {
        if b != n {
            return Err(Error::BaseMismatch(b, n));
        }
    }
    let spheres = ball_spheres(n, radius, budget)?;
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get());
    let mut counts = Vec::with_capacity(radius + 1);
    let mut elements = Vec::new();
    let mut total = 0u64;
    for sphere in &spheres {
        let hits = hits_parallel(block, sphere, threads);
        total += hits.len() as u64;
        counts.push(total);
        elements.extend(hits.iter().map(AffElem::to_json));
    }
    Ok(Census {
        n,
        radius,
        counts,
        elements,
    })
}

/// Largest `i` with `n^i <= d`, for `d > 0`.
pub(crate) fn floor_log(d: &BigRational, n: u32) -> i64 {
    let ln = |v: &num_bigint::BigInt| -> f64 {
        let bits = v.bits();
        let shift = bits.saturating_sub(64);
        (v >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
    };
    let est = (ln(d.numer()) - ln(d.denom())) / (n as f64).ln();
    let mut i = est.floor() as i64;
    while pow_n(n, i) > *d {
        i -= 1;
    }
    while pow_n(n, i + 1) <= *d {
        i += 1;
    }
    i
}

/// Membership in `B* = {(x, y, zeta) : 0 <= x < 1, 1 <= |y - x| < n, zeta in Z_n}`.
pub fn in_standard_block(t: &TripleRRQ) -> bool {
    let n = t.base();
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let gap = (&t.y - &t.x).abs();
    t.x >= zero
        && t.x < one
        && gap >= one
        && gap < BigRational::from_integer(n.into())
        && t.zeta.order().is_none_or(|v| v >= 0)
}

/// Constant `C` in the word-length bound `|g| <= C (n + 3) * size(t)` of [`cocompact_witness`].
pub const WITNESS_LENGTH_CONSTANT: usize = 1;

/// Output of [`cocompact_witness`].
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub g: AffElem,
    /// `g^-1 · t`, a point of the standard block.
    pub normalized: TripleRRQ,
    pub word_length: usize,
    /// `size(t)` in the word-length bound.
    pub log_size: i64,
}

impl Witness {
    pub fn length_bound(&self) -> usize {
        WITNESS_LENGTH_CONSTANT * (self.g.base() as usize + 3) * self.log_size as usize
    }
}

fn ceil_log_abs(x: &BigRational, n: u32) -> i64 {
    if x.is_zero() {
        0
    } else {
        floor_log(&x.abs(), n).max(0) + 1
    }
}

/// An element `g` with `g^-1 · t` in the standard block.
///
/// `g(x) = n^i x + s` where `n^i <= |y - x| < n^{i+1}`, `s` agrees with `zeta`
/// below index `i` and `s ≡ x` in the sense `0 <= (x - s)/n^i < 1`.
pub fn cocompact_witness(t: &TripleRRQ) -> Witness {
    let n = t.base();
    let i = floor_log(&(&t.y - &t.x).abs(), n);
    let scale = pow_n(n, i);
    let s0 = CloneBall::containing(&t.zeta, i - 1).center();
    let m = ((&t.x - s0.value()) / &scale).floor();
    let s = s0.value() + m * &scale;
    let g = AffElem::new(n, i, s).expect("truncations lie in Z[1/n]");
    let normalized = t.act(&g.inv());
    let word_length = g.normal_form_word().len();
    let low = t.zeta.order().map_or(0, |v| (-v).max(0));
    let log_size = 2 + i.abs() + low + ceil_log_abs(&t.x, n) + ceil_log_abs(&t.y, n);
    Witness {
        g,
        normalized,
        word_length,
        log_size,
    }
}

/// Output of [`contraction_element`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    pub g: AffJson,
    /// The b-exponent; minimal among elements with `g K ⊆ U`.
    pub j: i64,
    pub image: CloneJson,
    /// The digitwise inclusion check of `g K` in `U`.
    pub verified: bool,
    /// The same check with exponent `j - 1`, which must fail.
    pub previous_fails: bool,
}

/// Digitwise test of `inner ⊆ outer`: the prefix of `outer` is a prefix of `inner`.
pub fn digitwise_inclusion(inner: &CloneBall, outer: &CloneBall) -> bool {
    if inner.base() != outer.base() || inner.height() < outer.height() {
        return false;
    }
    let (a, b) = (inner.center(), outer.center());
    let low = match (a.order(), b.order()) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return true,
    };
    (low..=outer.height()).all(|i| a.digit(i) == b.digit(i))
}

fn contractor(k: &CloneBall, u: &CloneBall, j: i64) -> AffElem {
    let n = k.base();
    let s = u.center().value() - pow_n(n, j) * k.center().value();
    AffElem::new(n, j, s).expect("clone centers lie in Z[1/n]")
}

/// `g = (x -> x + c_U) ∘ b^j ∘ (x -> x - c_K)` with `j = h(U) - h(K)`, the least
/// `j` for which `n^{-j} radius(K) <= radius(U)`.
pub fn contraction_element(k: &CloneBall, u: &CloneBall) -> Result<Contraction> {
    if k.base() != u.base() {
        return Err(Error::BaseMismatch(k.base(), u.base()));
    }
    let j = u.height() - k.height();
    let g = contractor(k, u, j);
    let image = g.act_tree(k);
    let verified = digitwise_inclusion(&image, u);
    let prev = contractor(k, u, j - 1);
    let previous_fails = !digitwise_inclusion(&prev.act_tree(k), u);
    Ok(Contraction {
        g: g.to_json(),
        j,
        image: image.to_json(),
        verified,
        previous_fails,
    })
}

/// One time step of a probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeStep {
    pub i: usize,
    /// `sup_{zeta in compactQ} d(g_i zeta, sink candidate)`, as an exponent of `n` (`None` for 0).
    pub q_sup_exp: Option<i64>,
    pub q_sup: f64,
    /// `sup_{x in compactR} |g_i^-1 x - source candidate|`.
    pub r_sup: f64,
    /// Stretch of `g_i` on Q_n and of `g_i^-1` on R.
    pub stretch_q: f64,
    pub stretch_r_inv: f64,
    /// Product of the stretch of `g_i` on R and on Q_n.
    pub stretch_product: f64,
}

/// Source-sink report for a sequence `g_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub steps: Vec<ProbeStep>,
    /// The limit of `g_i` on `compactQ`, when contraction is detected.
    pub sink: Option<String>,
    /// Mean decrease of `log_n` of the Q_n sup-distance per step.
    pub sink_rate: Option<f64>,
    /// The limit of `g_i^-1` on `compactR`, when contraction is detected.
    pub source: Option<String>,
    pub source_rate: Option<f64>,
    /// `L = max_i max(p_i, 1/p_i)` for the stretch products `p_i`.
    pub stretch_product_bound: f64,
}

fn radius_to_sup(r: Radius) -> (Option<i64>, f64) {
    (r.exp, r.to_f64())
}

/// Sup of `d(w, c)` over `w` in a clone.
fn clone_sup_dist(c: &CloneBall, p: &NAdic) -> Radius {
    if c.contains(p) {
        c.radius()
    } else {
        c.center().dist(p)
    }
}

/// A sequence converges when it ends below where it starts and does not
/// increase over its second half.
fn contracting(v: &[f64]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let half = v.len() / 2;
    v[v.len() - 1] < v[0] && v[half..].windows(2).all(|w| w[1] <= w[0])
}

fn log_rate(first: f64, last: f64, steps: usize) -> f64 {
    if last <= 0.0 {
        return f64::INFINITY;
    }
    (first.ln() - last.ln()) / steps as f64
}

/// Measure source-sink behavior of `g_i` on a compact interval of R and a clone of Q_n.
pub fn source_sink_probe(gs: &[AffElem], compact_r: &RealInterval, compact_q: &CloneBall) -> Result<ProbeReport> {
    let Some(last) = gs.last() else {
        return Err(Error::Constraint("empty probe sequence".into()));
    };
    let n = compact_q.base();
    if let Some(g) = gs.iter().find(|g| g.base() != n) {
        return Err(Error::BaseMismatch(g.base(), n));
    }
    let sink = last.act_tree(compact_q).center();
    let source_iv = compact_r.image(&last.inv());
    let source = source_iv.midpoint();
    let len = compact_r.length();
    let mut steps = Vec::with_capacity(gs.len());
    let mut bound = 1.0f64;
    for (i, g) in gs.iter().enumerate() {
        let img = g.act_tree(compact_q);
        let (q_sup_exp, q_sup) = radius_to_sup(clone_sup_dist(&img, &sink));
        let riv = compact_r.image(&g.inv());
        let r_sup = (&riv.lo - &source).abs().max((&riv.hi - &source).abs());
        let stretch_q = Radius::pow(n, -(compact_q.height() + g.exp())).to_rational() / compact_q.radius().to_rational();
        let stretch_r = if len.is_zero() {
            g.stretch_r()
        } else {
            compact_r.image(g).length() / &len
        };
        let product = &stretch_r * &stretch_q;
        let p = product.to_f64().unwrap_or(f64::NAN);
        bound = bound.max(p).max(1.0 / p);
        steps.push(ProbeStep {
            i,
            q_sup_exp,
            q_sup,
            r_sup: r_sup.to_f64().unwrap_or(f64::NAN),
            stretch_q: stretch_q.to_f64().unwrap_or(f64::NAN),
            stretch_r_inv: stretch_r.recip().to_f64().unwrap_or(f64::NAN),
            stretch_product: p,
        });
    }
    let qs: Vec<f64> = steps.iter().map(|s| s.q_sup).collect();
    let rs: Vec<f64> = steps.iter().map(|s| s.r_sup).collect();
    let last_step = steps.len() - 1;
    let (sink, sink_rate) = if contracting(&qs) {
        (Some(sink.to_string()), Some(log_rate(qs[0], qs[last_step], last_step) / (n as f64).ln()))
    } else {
        (None, None)
    };
    let (source, source_rate) = if contracting(&rs) {
        (Some(source.to_string()), Some(log_rate(rs[0], rs[last_step], last_step) / (n as f64).ln()))
    } else {
        (None, None)
    };
    Ok(ProbeReport {
        steps,
        sink,
        sink_rate,
        source,
        source_rate,
        stretch_product_bound: bound,
    })
}
