//! Acceptance suite: one PASS/FAIL line per check, nonzero exit on failure.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bsgeom::bsgroup::{ball, eval_word, growth, growth_z2, AffElem, Gen, GroupWord, DEFAULT_BALL_BUDGET};
use bsgeom::dynamics::{contraction_element, pd_census, CompactBlock};
use bsgeom::fibercomplex::{
    barycenter_pi, barycenter_pi_exact, common_plane, dist_bounds, kappa, leaf_intersection, FiberPoint,
    BARYCENTER_RATIO,
};
use bsgeom::nadic::{CloneBall, NAdic, Radius};
use bsgeom::quasisim::{
    conjugacy_error, conjugate_to_dilation, conjugate_to_translation, power_stretch_profile, test_grid,
    uniform_power_bound, PLHomeo, PowerProfile, Scalar, DEFAULT_SEGMENT_CAP,
};
use bsgeom::rigidity::{
    cohomology_profile, commensurable, dihedral_endo, vcd_mapping_torus, CohomologyGroup, DihedralElem, EndoMode,
};
use num_bigint::BigInt;
use num_rational::BigRational as Q;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

/// Digits of `r` in base `n` at indices `lo..=hi`, by repeated
/// "take the unit digit, subtract, divide by n".
fn oracle_digits(r: &Q, n: u32, lo: i64, hi: i64) -> Vec<u32> {
    let nb = BigInt::from(n);
    let mut v = r.clone();
    let mut shift = 0i64;
    while num_integer::Integer::gcd(v.denom(), &nb) != BigInt::from(1) {
        v *= Q::from_integer(nb.clone());
        shift += 1;
    }
    // v = r n^shift has denominator prime to n; its digit i is digit i - shift of r.
    let b = v.denom().clone();
    let inv = {
        let e = num_integer::Integer::extended_gcd(&b, &nb);
        num_integer::Integer::mod_floor(&e.x, &nb)
    };
    let mut a = v.numer().clone();
    let mut out = Vec::new();
    for idx in (-shift)..=hi {
        let d = num_integer::Integer::mod_floor(&(&a * &inv), &nb);
        if idx >= lo {
            out.push(num_traits::ToPrimitive::to_u32(&d).expect("digit"));
        }
        a = (a - &d * &b) / &nb;
    }
    if lo < -shift {
        let mut pad = vec![0; (-shift - lo) as usize];
        pad.extend(out);
        out = pad;
    }
    out.truncate((hi - lo + 1) as usize);
    out
}

fn random_rational(g: &mut ChaCha8Rng, n: u32) -> Q {
    let p: i64 = g.gen_range(-1_000_000..=1_000_000);
    let d: i64 = g.gen_range(1..=1000);
    let e: i64 = g.gen_range(-5..=5);
    q(p, d) * bsgeom::nadic::pow_n(n, e)
}

fn random_nadic(g: &mut ChaCha8Rng, n: u32) -> NAdic {
    NAdic::new(n, random_rational(g, n)).expect("valid base")
}

// 1 ------------------------------------------------------------------------

fn ultrametric_and_clones() -> Check {
    let mut checked = 0usize;
    for &n in &[2u32, 10] {
        let mut g = rng(n as u64);
        for _ in 0..10_000 {
            let (x, y, z) = (random_nadic(&mut g, n), random_nadic(&mut g, n), random_nadic(&mut g, n));
            let (dxz, dxy, dyz) = (x.dist(&z), x.dist(&y), y.dist(&z));
            ensure!(dxz <= dxy.max(dyz), "ultrametric inequality fails for {x}, {y}, {z}");
            ensure!(dxy == y.dist(&x), "asymmetric distance");
            // oracle: first differing digit
            let (lo, hi) = (-40, 60);
            let (a, b) = (oracle_digits(x.value(), n, lo, hi), oracle_digits(y.value(), n, lo, hi));
            let first = a.iter().zip(&b).position(|(u, v)| u != v);
            let expect = match first {
                None => ensure_equal_or_far(&x, &y)?,
                Some(i) => Radius::pow(n, -(lo + i as i64 - 1)),
            };
            ensure!(dxy == expect, "d({x}, {y}) = {dxy:?}, oracle {expect:?}");
            checked += 1;
        }
        for _ in 0..10 {
            let zeta = random_nadic(&mut g, n);
            let k: i64 = g.gen_range(-4..=6);
            let ball = CloneBall::containing(&zeta, k);
            let mut inside = 0;
            for _ in 0..1000 {
                let e: i64 = g.gen_range(k - 2..=k + 3);
                let u: i64 = g.gen_range(-50..=50);
                let v: i64 = *[1i64, 1, 1, 3, 7].get(g.gen_range(0..5)).expect("index");
                let x = NAdic::new(n, zeta.value() + q(u, v) * bsgeom::nadic::pow_n(n, e)).expect("valid");
                let in_ball = x.dist(&zeta) <= Radius::pow(n, -k);
                let lo = -40;
                let prefix_agree = oracle_digits(x.value(), n, lo, k) == oracle_digits(zeta.value(), n, lo, k);
                ensure!(in_ball == prefix_agree, "ball and clone differ at {x} around {zeta}, k = {k}");
                ensure!(in_ball == ball.contains(&x), "clone membership differs at {x}");
                inside += in_ball as usize;
            }
            ensure!(inside > 0 && inside < 1000, "degenerate sample around {zeta}");
        }
    }
    Ok(format!("{checked} triples; 20 clones x 1000 points"))
}

/// Distinct values whose digits agree on the whole oracle range sit below it.
fn ensure_equal_or_far(x: &NAdic, y: &NAdic) -> std::result::Result<Radius, String> {
    if x == y {
        return Ok(Radius::zero(x.base()));
    }
    let k = x.agreement_index(y).ok_or("agreement index missing")?;
    if k < 60 {
        return Err(format!("oracle range too short for {x}, {y}"));
    }
    Ok(Radius::pow(x.base(), -k))
}

// 2 ------------------------------------------------------------------------

fn random_word(g: &mut ChaCha8Rng, len: usize) -> GroupWord {
    GroupWord((0..len).map(|_| Gen::ALL[g.gen_range(0..4)]).collect())
}

fn insert(w: &GroupWord, at: usize, piece: &GroupWord) -> GroupWord {
    let mut v = w.0[..at].to_vec();
    v.extend(piece.0.iter().copied());
    v.extend(w.0[at..].iter().copied());
    GroupWord(v)
}

fn word_problem() -> Check {
    let mut g = rng(2);
    for &n in &[2u32, 3] {
        let rel = GroupWord::relator(n);
        ensure!(eval_word(&rel, n).map_err(|e| e.to_string())?.is_identity(), "relator is not trivial");
        for _ in 0..1000 {
            let budget = 40 - rel.len();
            let ul = g.gen_range(0..=budget / 2);
            let u = random_word(&mut g, ul);
            let base = u.concat(&u.inverse());
            let piece = if g.gen_bool(0.5) { rel.clone() } else { rel.inverse() };
            let w = insert(&base, g.gen_range(0..=base.len()), &piece);
            ensure!(w.len() <= 40, "word too long");
            let e = eval_word(&w, n).map_err(|e| e.to_string())?;
            ensure!(e.is_identity(), "{w} evaluates to {e}");
            let vl = g.gen_range(0..=budget);
            let v = random_word(&mut g, vl);
            let w2 = insert(&v, g.gen_range(0..=v.len()), &piece);
            ensure!(
                eval_word(&w2, n).map_err(|e| e.to_string())? == eval_word(&v, n).map_err(|e| e.to_string())?,
                "inserting the relator into {v} changes its value"
            );
        }
        let mut nontrivial = 0;
        while nontrivial < 1000 {
            let h = AffElem::from_parts(n, g.gen_range(-5..=5), g.gen_range(-1000i64..=1000), g.gen_range(0..=5))
                .map_err(|e| e.to_string())?;
            if h.is_identity() {
                continue;
            }
            let w = h.normal_form_word();
            let e = eval_word(&w, n).map_err(|e| e.to_string())?;
            ensure!(e == h, "normal form {w} of {h} evaluates to {e}");
            ensure!(!e.is_identity(), "nontrivial normal form {w} is the identity");
            nontrivial += 1;
        }
    }
    Ok("n = 2, 3: relator, 2000 inserted words, 1000 normal forms each".into())
}

// 3 ------------------------------------------------------------------------

fn stretch_product() -> Check {
    let n = 2;
    let elems = ball(n, 8, DEFAULT_BALL_BUDGET).map_err(|e| e.to_string())?;
    let (x0, x1) = (Q::zero(), Q::one());
    let z0 = NAdic::zero(n).map_err(|e| e.to_string())?;
    let z1 = NAdic::from_int(1, n).map_err(|e| e.to_string())?;
    let d0 = z0.dist(&z1).to_rational();
    for g in &elems {
        let sr = (g.act_r(&x1) - g.act_r(&x0)) / (&x1 - &x0);
        let sq = g.act_qn(&z0).dist(&g.act_qn(&z1)).to_rational() / &d0;
        ensure!(&sr * &sq == Q::one(), "stretch product of {g} is {}", &sr * &sq);
        ensure!(sr == g.stretch_r() && sq == g.stretch_qn(), "stretch accessors disagree for {g}");
    }
    Ok(format!("{} elements of the radius-8 ball", elems.len()))
}

// 4 ------------------------------------------------------------------------

/// Independent element model: `(i, p, j)` for `x -> 2^i x + p / 2^j`, `p` odd unless `j = 0`.
fn oracle_growth(radius: usize) -> Vec<u64> {
    type E = (i64, i128, i64);
    fn norm((i, mut p, mut j): E) -> E {
        while j > 0 && p % 2 == 0 {
            p /= 2;
            j -= 1;
        }
        if p == 0 {
            j = 0;
        }
        (i, p, j)
    }
    // (x -> 2^i x + p/2^j) then apply generator on the right: e ∘ gen
    fn right(e: E, gen: usize) -> E {
        let (i, p, j) = e;
        match gen {
            0 | 1 => {
                let sign = if gen == 0 { 1 } else { -1 };
                // 2^i * (±1) + p/2^j
                if i >= 0 {
                    norm((i, p + sign * (1i128 << i) * (1i128 << j), j))
                } else {
                    let jj = j.max(-i);
                    let p2 = p * (1i128 << (jj - j)) + sign * (1i128 << (jj + i));
                    norm((i, p2, jj))
                }
            }
            2 => (i + 1, p, j),
            _ => (i - 1, p, j),
        }
    }
    let mut dist: HashMap<E, usize> = HashMap::new();
    let start: E = (0, 0, 0);
    dist.insert(start, 0);
    let mut frontier = vec![start];
    let mut counts = vec![1u64];
    for l in 1..=radius {
        let mut next = Vec::new();
        for e in &frontier {
            for gen in 0..4 {
                let f = right(*e, gen);
                dist.entry(f).or_insert_with(|| {
                    next.push(f);
                    l
                });
            }
        }
        counts.push(counts[l - 1] + next.len() as u64);
        frontier = next;
    }
    counts
}

fn growth_dichotomy() -> Check {
    let beta = growth(2, 16, DEFAULT_BALL_BUDGET).map_err(|e| e.to_string())?;
    let oracle = oracle_growth(10);
    ensure!(beta[..=10] == oracle[..], "growth {:?} vs oracle {:?}", &beta[..=10], oracle);
    // local polynomial exponent d log beta / d log L
    let expo = |b: &[u64], l: usize| (b[l] as f64 / b[l - 1] as f64).ln() / (l as f64 / (l - 1) as f64).ln();
    for l in 10..=16 {
        ensure!(beta[l] as f64 >= 1.5 * beta[l - 1] as f64, "ratio at L = {l} below 1.5");
        if l > 10 {
            ensure!(expo(&beta, l) > expo(&beta, l - 1), "local exponent stops increasing at L = {l}");
        }
    }
    let z2 = growth_z2(30, DEFAULT_BALL_BUDGET).map_err(|e| e.to_string())?;
    let fit = quadratic_fit(&z2);
    let at30 = fit[0] + fit[1] * 30.0 + fit[2] * 900.0;
    let rel = (at30 - z2[30] as f64).abs() / z2[30] as f64;
    ensure!(rel < 0.01, "quadratic fit off by {rel} at L = 30");
    Ok(format!(
        "beta(10) = {}, beta(16) = {}, exponent at 16 = {:.2}; Z^2 fit error {:.1e}",
        beta[10],
        beta[16],
        expo(&beta, 16),
        rel
    ))
}

/// Least-squares `c0 + c1 L + c2 L^2`.
fn quadratic_fit(v: &[u64]) -> [f64; 3] {
    let mut a = [[0.0f64; 4]; 3];
    for (l, &y) in v.iter().enumerate() {
        let p = [1.0, l as f64, (l * l) as f64];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += p[r] * p[c];
            }
            a[r][3] += p[r] * y as f64;
        }
    }
    for c in 0..3 {
        let piv = (c..3).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).expect("rows");
        a.swap(c, piv);
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
}

// 5, 6, 7 --------------------------------------------------------------------

/// A random PL homeomorphism with breakpoints in `[-10, 10]` and slopes in `[1/4, 4]`.
fn random_psi(g: &mut ChaCha8Rng, max_breaks: usize) -> PLHomeo<Q> {
    let k = g.gen_range(1..=max_breaks);
    let mut xs: Vec<i64> = Vec::new();
    while xs.len() < k {
        let x = g.gen_range(-80..=80);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort();
    let slope = |g: &mut ChaCha8Rng| q(g.gen_range(1..=16), 4);
    let mut pts = vec![(q(xs[0], 8), q(g.gen_range(-40..=40), 8))];
    for w in xs.windows(2) {
        let s = slope(g);
        let (x0, v0) = pts.last().expect("nonempty").clone();
        let x1 = q(w[1], 8);
        let v1 = v0 + s * (&x1 - &x0);
        pts.push((x1, v1));
    }
    let (lo, hi) = (slope(g), slope(g));
    PLHomeo::from_points(&pts, lo, hi).expect("valid map")
}

fn conj_model(psi: &PLHomeo<Q>, model: &PLHomeo<Q>) -> PLHomeo<Q> {
    psi.compose(model).compose(&psi.inverse())
}

fn case_one() -> Check {
    let mut g = rng(5);
    let grid = test_grid(1000.0, 4097);
    let mut worst_err = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for inst in 0..100 {
        let psi = random_psi(&mut g, 20);
        let alpha = q(g.gen_range(4..=16), 4);
        let f = conj_model(&psi, &PLHomeo::translation(alpha));
        let c = conjugate_to_translation(&f, &Q::zero(), &q(1000, 1), DEFAULT_SEGMENT_CAP).map_err(|e| format!("instance {inst}: {e}"))?;
        let a = c.alpha.to_f64();
        let err = conjugacy_error(&f.to_f64_map(), &c.phi.to_f64_map(), |y| y + a, &grid);
        ensure!(err < 1e-9, "instance {inst}: conjugacy error {err:e}");
        let bound = uniform_power_bound(&f, 64, 1_000_000).map_err(|e| e.to_string())?;
        let lip = c.phi.bilipschitz_constant();
        ensure!(lip <= bound, "instance {inst}: bilipschitz constant {lip} exceeds power bound {bound}");
        worst_err = worst_err.max(err);
        worst_ratio = worst_ratio.max(lip.to_f64() / bound.to_f64());
    }
    Ok(format!("100 instances; max sup-error {worst_err:.2e}; max L/bound {worst_ratio:.3}"))
}

/// Profiles of the Case-2 instances, kept for the nesting check.
struct CaseTwoData {
    profiles: Vec<PowerProfile<Q>>,
    profile_time: Duration,
}

fn case_two(store: &mut Option<CaseTwoData>) -> Check {
    let mut g = rng(6);
    let grid = test_grid(1000.0, 4097);
    let ss = [q(2, 1), q(3, 1), q(5, 1), q(3, 2)];
    let mut profiles = Vec::with_capacity(100);
    let mut profile_time = Duration::ZERO;
    let mut worst_err = 0.0f64;
    let mut worst_rel = 0.0f64;
    for inst in 0..100 {
        let s = ss[inst % 4].clone();
        let psi = random_psi(&mut g, 8);
        let f = conj_model(&psi, &PLHomeo::dilation(s.clone()).expect("positive"));
        let c = conjugate_to_dilation(&f, 32, 1_000_000, &q(1000, 1), &Q::from_f64(1e-12), DEFAULT_SEGMENT_CAP)
            .map_err(|e| format!("instance {inst}: {e}"))?;
        let sf = s.to_f64();
        let rel = (c.s - sf).abs() / sf;
        let bound = c.estimate.rel_err;
        // the estimate may sit exactly on the certified edge; allow rounding only
        ensure!(rel <= bound * (1.0 + 1e-12) + 4.0 * f64::EPSILON, "instance {inst}: s = {} vs {sf}, bound {bound}", c.s);
        let t = Instant::now();
        let profile = power_stretch_profile(&f, 400, 1_000_000).map_err(|e| e.to_string())?;
        profile_time += t.elapsed();
        let i32 = profile.interval(32);
        let s32 = s.powi(32);
        ensure!(i32.a <= s32 && s32 <= i32.b, "instance {inst}: s^32 outside the exact interval I_32");
        let k32 = profile
            .entries()
            .iter()
            .filter(|e| e.m.abs() <= 32)
            .map(|e| e.interval.ratio())
            .fold(Q::one(), |a, b| if b > a { b } else { a });
        ensure!(k32.to_f64() == c.estimate.k, "instance {inst}: K mismatch");
        let k3 = k32.powi(3);
        for sl in c.phi.slopes() {
            ensure!(*sl <= k3 && sl.clone() * &k3 >= Q::one(), "instance {inst}: slope {sl} outside [1/K^3, K^3]");
        }
        let model = if c.inverted { c.s_used.recip() } else { c.s_used.clone() }.to_f64();
        let err = conjugacy_error(&f.to_f64_map(), &c.phi.to_f64_map(), |y| model * y, &grid);
        ensure!(err < 1e-9, "instance {inst}: conjugacy error {err:e}");
        worst_err = worst_err.max(err);
        if bound > 0.0 {
            worst_rel = worst_rel.max(rel / bound);
        }
        profiles.push(profile);
    }
    *store = Some(CaseTwoData { profiles, profile_time });
    Ok(format!(
        "100 instances; max sup-error {worst_err:.2e}; max |s err|/bound {worst_rel:.3}; M = 400 profiles built in {:.2} s",
        profile_time.as_secs_f64()
    ))
}

fn nested_intervals(data: &Option<CaseTwoData>) -> Check {
    let Some(data) = data else {
        return Err("Case-2 profiles unavailable".into());
    };
    let mut pairs = 0usize;
    for (i, p) in data.profiles.iter().enumerate() {
        ensure!(p.all_exact(), "instance {i}: profile not exact");
        let bad = p.nested_failures(20, 20);
        ensure!(bad.is_empty(), "instance {i}: I_mn not inside I_n for {:?}", &bad[..bad.len().min(5)]);
        pairs += 400;
        let m = p.max_power;
        let iv = p.interval(m);
        // (b_M / a_M)^{1/M} <= K^{1/M}
        ensure!(iv.ratio() <= p.k, "instance {i}: I_M ratio exceeds K^(1/M)");
    }
    Ok(format!(
        "{pairs} pairs on {} profiles (M = 400, built in {:.2} s during the Case-2 run)",
        data.profiles.len(),
        data.profile_time.as_secs_f64()
    ))
}

// 8 ------------------------------------------------------------------------

fn censuses() -> Check {
    let std_block = CompactBlock::standard(2).map_err(|e| e.to_string())?;
    let c = pd_census(&std_block, 2, 12, DEFAULT_BALL_BUDGET).map_err(|e| e.to_string())?;
    ensure!(c.stable_from(9), "standard census not constant on 9..12: {:?}", c.counts);
    let r = pd_census(&CompactBlock::standard_control().map_err(|e| e.to_string())?, 2, 12, DEFAULT_BALL_BUDGET)
        .map_err(|e| e.to_string())?;
    ensure!(r.strictly_increasing_from(9), "control census not increasing on 9..12: {:?}", r.counts);
    Ok(format!("T(R,R,Q_2): {:?}; T(R,R,R): {:?}", &c.counts[9..], &r.counts[9..]))
}

// 9 ------------------------------------------------------------------------

fn contraction() -> Check {
    let mut g = rng(9);
    let n = 2;
    for _ in 0..100 {
        let kc = CloneBall::containing(&random_nadic(&mut g, n), g.gen_range(-6..=6));
        let uc = CloneBall::containing(&random_nadic(&mut g, n), g.gen_range(-6..=6));
        let c = contraction_element(&kc, &uc).map_err(|e| e.to_string())?;
        ensure!(c.verified && c.previous_fails, "library check failed for {kc} -> {uc}");
        let h = AffElem::from_json(&c.g).map_err(|e| e.to_string())?;
        ensure!(h.exp() == c.j && c.j == uc.height() - kc.height(), "wrong exponent");
        let img = h.act_tree(&kc);
        let lo = -40;
        ensure!(img.height() >= uc.height(), "image clone too large");
        ensure!(
            oracle_digits(img.center().value(), n, lo, uc.height()) == oracle_digits(uc.center().value(), n, lo, uc.height()),
            "digits of g K and U differ"
        );
        // any element with exponent j - 1 maps K onto a clone of height h(U) - 1
        let prev = AffElem::new(n, c.j - 1, h.shift().clone()).map_err(|e| e.to_string())?;
        let pimg = prev.act_tree(&kc);
        ensure!(pimg.height() == uc.height() - 1 && !uc.contains_clone(&pimg), "exponent j - 1 still contracts");
    }
    Ok("100 clone pairs with heights in [-6, 6]".into())
}

// 10 -----------------------------------------------------------------------

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Independent check of the barycenter height: the point `(m, c w)` lies on the
/// geodesic from each vertex perpendicular to the opposite side.
fn perpendicularity_oracle(x: f64, y: f64) -> Check {
    let (m, w) = ((x + y) / 2.0, (y - x).abs());
    let p = (m, BARYCENTER_RATIO * w);
    // geodesic through the ideal point v and p is the semicircle centered at c, |c - v| = |c - p|
    let center = |v: f64| ((p.0 * p.0 + p.1 * p.1) - v * v) / (2.0 * (p.0 - v));
    // it meets the vertical side over u perpendicularly iff it is centered at u
    ensure!((center(x) - y).abs() <= 1e-12 * w.max(1.0), "altitude from {x} not perpendicular");
    ensure!((center(y) - x).abs() <= 1e-12 * w.max(1.0), "altitude from {y} not perpendicular");
    // the vertical through p is perpendicular to the semicircle over [x, y] iff it passes through its center
    ensure!((p.0 - m).abs() <= 1e-12 * w.max(1.0), "altitude from infinity not perpendicular");
    // equidistance from the three sides
    let rho = w / 2.0;
    let to_vertical = (rho / p.1).asinh();
    let to_circle = ((p.1 * p.1 - rho * rho).abs() / (2.0 * rho * p.1)).asinh();
    ensure!(close(to_vertical, to_circle), "barycenter not equidistant from the sides");
    Ok(String::new())
}

fn barycenters() -> Check {
    let n = 2;
    let elems = ball(n, 5, DEFAULT_BALL_BUDGET).map_err(|e| e.to_string())?;
    let mut g = rng(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = q(g.gen_range(-400..=400), 16);
        let mut y = q(g.gen_range(-400..=400), 16);
        if y == x {
            y += Q::one();
        }
        let zeta = random_nadic(&mut g, n);
        let mut eta = random_nadic(&mut g, n);
        if eta == zeta {
            eta = NAdic::new(n, eta.value() + Q::one()).map_err(|e| e.to_string())?;
        }
        perpendicularity_oracle(x.to_f64(), y.to_f64())?;
        let pi = barycenter_pi(x.to_f64(), y.to_f64(), &zeta).map_err(|e| e.to_string())?;
        let pe = barycenter_pi_exact(&x, &y, &zeta).map_err(|e| e.to_string())?;
        let kp = kappa(&x, &eta, &zeta).map_err(|e| e.to_string())?;
        for h in &elems {
            let (gx, gy) = (h.act_r(&x), h.act_r(&y));
            let (gz, ge) = (h.act_qn(&zeta), h.act_qn(&eta));
            let lhs = barycenter_pi(gx.to_f64(), gy.to_f64(), &gz).map_err(|e| e.to_string())?;
            let rhs = pi.act(h);
            let (a, b) = (lhs.proj_p(), rhs.proj_p());
            ensure!(close(a.x, b.x) && close(a.y, b.y), "pi not equivariant under {h}: {a:?} vs {b:?}");
            ensure!(lhs.proj_q().upper_vertex() == rhs.proj_q().upper_vertex(), "tree part of pi moves under {h}");
            ensure!(close(lhs.proj_q().offset(), rhs.proj_q().offset()), "tree offset of pi moves under {h}");
            worst = worst.max((a.y - b.y).abs() / a.y.abs().max(1.0));
            let exact = barycenter_pi_exact(&gx, &gy, &gz).map_err(|e| e.to_string())?;
            ensure!(exact == pe.act(h), "exact pi not equivariant under {h}");
            let k2 = kappa(&gx, &ge, &gz).map_err(|e| e.to_string())?;
            ensure!(k2 == kp.act(h), "kappa not equivariant under {h}");
        }
    }
    ensure!(close(BARYCENTER_RATIO, 3f64.sqrt() / 2.0), "ratio constant is not sqrt(3)/2");
    Ok(format!("{} elements x 100 inputs; max float deviation {worst:.1e}", elems.len()))
}

// 11 -----------------------------------------------------------------------

fn brute_commensurable(m: u64, n: u64) -> bool {
    (2..=m.max(n)).any(|r| {
        let is_pow = |mut v: u64| {
            while v.is_multiple_of(r) {
                v /= r;
            }
            v == 1
        };
        is_pow(m) && is_pow(n)
    })
}

fn rigidity_algebra() -> Check {
    for m in 2..=200u64 {
        for n in 2..=200u64 {
            ensure!(
                commensurable(m, n).map_err(|e| e.to_string())? == brute_commensurable(m, n),
                "commensurable({m}, {n}) disagrees with brute force"
            );
        }
    }
    for k in 1..=25i64 {
        let phi = dihedral_endo(2 * k + 1, EndoMode::NoFixedReflection).map_err(|e| e.to_string())?;
        for i in -50..=50i64 {
            let img = phi.apply(&DihedralElem::reflection(i));
            ensure!(img == DihedralElem::reflection(2 * k * i + k + i), "phi(r_{i}) wrong for k = {k}");
            ensure!(img.reflection_point() != Some(i), "phi fixes r_{i} for k = {k}");
            // realization: Phi(r_i(x)) = phi(r_i)(Phi(x))
            for x in [q(0, 1), q(1, 3), q(-7, 2)] {
                ensure!(
                    phi.realize(&DihedralElem::reflection(i).apply(&x)) == img.apply(&phi.realize(&x)),
                    "realization does not intertwine r_{i}"
                );
            }
        }
    }
    for r in 1..=8u32 {
        ensure!(vcd_mapping_torus(r) == r + 1, "vcd formula");
        for index in 2..=6u64 {
            let prof = cohomology_profile(r, index).map_err(|e| e.to_string())?;
            let support: Vec<u32> = prof.iter().filter(|(_, g)| **g != CohomologyGroup::Zero).map(|(k, _)| *k).collect();
            ensure!(support == vec![r + 1], "support for r = {r}, I = {index} is {support:?}");
        }
    }
    Ok("39601 pairs; 2525 reflections; r <= 8".into())
}

// 12 -----------------------------------------------------------------------

fn random_fiber_point(g: &mut ChaCha8Rng, zeta: &NAdic) -> std::result::Result<FiberPoint, String> {
    let n = zeta.base() as f64;
    let x = g.gen_range(-50.0..50.0);
    let hc: f64 = g.gen_range(-5.0..5.0);
    FiberPoint::on_leaf(zeta, x, n.powf(hc)).map_err(|e| e.to_string())
}

fn distance_bounds() -> Check {
    let mut g = rng(12);
    let mut common = 0usize;
    let mut worst_gap = 0.0f64;
    for i in 0..10_000 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let z1 = random_nadic(&mut g, n);
        let z2 = match g.gen_range(0..3) {
            0 => z1.clone(),
            1 => NAdic::new(n, z1.value() + bsgeom::nadic::pow_n(n, g.gen_range(-3..=6))).map_err(|e| e.to_string())?,
            _ => random_nadic(&mut g, n),
        };
        let (p1, p2) = (random_fiber_point(&mut g, &z1)?, random_fiber_point(&mut g, &z2)?);
        let b = dist_bounds(&p1, &p2).map_err(|e| e.to_string())?;
        ensure!(b.lo <= b.hi, "lo {} > hi {} for pair {i}", b.lo, b.hi);
        if common_plane(&p1, &p2).is_some() {
            common += 1;
            let gap = (b.hi - b.lo) / b.hi.max(1.0);
            ensure!(gap <= 1e-9, "common-plane gap {gap:e} for pair {i}");
            worst_gap = worst_gap.max(gap);
        }
    }
    ensure!(common > 1000, "too few common-plane pairs ({common})");
    for i in 0..1000 {
        let n = [2u32, 3, 10][i % 3];
        let z1 = random_nadic(&mut g, n);
        let mut z2 = NAdic::new(n, z1.value() + random_rational(&mut g, n)).map_err(|e| e.to_string())?;
        if z2 == z1 {
            z2 = NAdic::new(n, z1.value() + Q::one()).map_err(|e| e.to_string())?;
        }
        let li = leaf_intersection(&z1, &z2).map_err(|e| e.to_string())?;
        let d = z1.dist(&z2);
        ensure!(li.boundary_distance == d, "boundary distance {:?} vs {:?}", li.boundary_distance, d);
        ensure!(close((-li.height).exp(), d.to_f64()), "exp(-height) = {} vs {}", (-li.height).exp(), d.to_f64());
    }
    Ok(format!("10^4 pairs ({common} on a common plane, max gap {worst_gap:.1e}); 1000 leaf pairs"))
}

// ---------------------------------------------------------------------------

struct Outcome {
    ok: bool,
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> Outcome {
    let t = Instant::now();
    let res = f();
    let el = t.elapsed();
    let over = limit.is_some_and(|l| el > l);
    let ok = res.is_ok() && !over;
    let limit_s = limit.map_or("none".to_string(), |l| format!("{} s", l.as_secs()));
    let detail = match &res {
        Ok(d) if over => format!("{d}; over time limit"),
        Ok(d) => d.clone(),
        Err(e) => e.clone(),
    };
    println!(
        "{} [{id:>2}] {name} ({:.2} s, limit {limit_s}): {detail}",
        if ok { "PASS" } else { "FAIL" },
        el.as_secs_f64()
    );
    Outcome { ok }
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let mut outcomes = Vec::new();
    outcomes.push(run(1, "ultrametric and clone balls", secs(5), ultrametric_and_clones));
    outcomes.push(run(2, "word problem", secs(5), word_problem));
    outcomes.push(run(3, "stretch product", secs(30), stretch_product));
    outcomes.push(run(4, "growth dichotomy", secs(120), growth_dichotomy));
    outcomes.push(run(5, "translation conjugacy", secs(60), case_one));
    let mut data = None;
    outcomes.push(run(6, "dilation conjugacy", secs(120), || case_two(&mut data)));
    outcomes.push(run(7, "nested intervals", secs(10), || nested_intervals(&data)));
    outcomes.push(run(8, "biconvergence censuses", secs(120), censuses));
    outcomes.push(run(9, "contraction property", secs(5), contraction));
    outcomes.push(run(10, "barycenter equivariance", None, barycenters));
    outcomes.push(run(11, "rigidity algebra", secs(5), rigidity_algebra));
    outcomes.push(run(12, "distance bounds", secs(60), distance_bounds));
    let failed = outcomes.iter().filter(|o| !o.ok).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
