//! The complex X_n as the fiber product of the height functions
//! `log y` on the upper half-plane and `h` on T_n.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::bsgroup::AffElem;
use crate::error::{Error, Result};
use crate::nadic::{CloneBall, NAdic, Radius};
use crate::treespace::{kappa_vertex, line_distance, tree_dist, TreePoint};

const FIBER_TOL: f64 = 1e-9;

/// Ratio of barycenter height to the width `|y - x|` of the ideal triangle `(x, y, ∞)`.
pub const BARYCENTER_RATIO: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2Point {
    pub x: f64,
    pub y: f64,
}

impl H2Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Constraint(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(H2Point { x, y })
    }

    pub fn height(&self) -> f64 {
        self.y.ln()
    }
}

/// Hyperbolic distance in the upper half-plane.
pub fn h2_dist(p: &H2Point, q: &H2Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (p.y * q.y).sqrt())).asinh()
}

/// A point of X_n in fiber-product coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    hyp: H2Point,
    tree: TreePoint,
}

impl FiberPoint {
    pub fn new(hyp: H2Point, tree: TreePoint) -> Result<Self> {
        let log_y = hyp.height();
        let th = tree.height();
        if (log_y - th).abs() > FIBER_TOL * log_y.abs().max(1.0) {
            return Err(Error::FiberViolation {
                log_y,
                tree_height: th,
            });
        }
        Ok(FiberPoint { hyp, tree })
    }

    /// The point `(x, y)` of the plane leaf indexed by `zeta`.
    pub fn on_leaf(zeta: &NAdic, x: f64, y: f64) -> Result<Self> {
        let hyp = H2Point::new(x, y)?;
        let tree = TreePoint::on_line(zeta, hyp.height());
        FiberPoint::new(hyp, tree)
    }

    pub fn proj_p(&self) -> H2Point {
        self.hyp
    }

    pub fn proj_q(&self) -> &TreePoint {
        &self.tree
    }

    pub fn height(&self) -> f64 {
        self.tree.height()
    }

    pub fn base(&self) -> u32 {
        self.tree.base()
    }

    pub fn act(&self, g: &AffElem) -> FiberPoint {
        let (x, y) = g.act_h2(self.hyp.x, self.hyp.y);
        FiberPoint {
            hyp: H2Point { x, y },
            tree: g.act_tree_point(&self.tree),
        }
    }

    pub fn on_leaf_of(&self, zeta: &NAdic) -> bool {
        self.tree.on_vertical_line(zeta)
    }
}

/// An end of a vertical line through both tree positions, if one exists.
pub fn common_plane(p1: &FiberPoint, p2: &FiberPoint) -> Option<NAdic> {
    let d1 = p1.tree.lower_vertex();
    let d2 = p2.tree.lower_vertex();
    if d1.contains_clone(&d2) {
        Some(d2.center())
    } else if d2.contains_clone(&d1) {
        Some(d1.center())
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistBounds {
    pub lo: f64,
    pub hi: f64,
    /// Text form of a common leaf, when there is one.
    #[serde(rename = "commonPlane")]
    pub common_plane: Option<String>,
}

const GRID: usize = 64;
const GOLDEN_TOL: f64 = 1e-9;
const GOLDEN_MAX_ITER: usize = 400;
/// Relative outward rounding applied to both bounds.
const ROUNDING_SLACK: f64 = 1e-13;

/// Certified bounds on the distance in X_n.
///
/// The lower bound uses that both projections are 1-Lipschitz. The upper
/// bound is the length of a path inside one or two plane leaves; two leaves
/// share the region below the height of their divergence vertex, and the
/// best transfer point may be taken on the bounding horocycle.
pub fn dist_bounds(p1: &FiberPoint, p2: &FiberPoint) -> Result<DistBounds> {
    let dh = h2_dist(&p1.hyp, &p2.hyp);
    let dt = tree_dist(&p1.tree, &p2.tree);
    let lo = dh.max(dt) * (1.0 - ROUNDING_SLACK);
    let dh = dh * (1.0 + ROUNDING_SLACK);
    if let Some(z) = common_plane(p1, p2) {
        return Ok(DistBounds {
            lo,
            hi: dh,
            common_plane: Some(z.to_string()),
        });
    }
    let meet = p1.tree.lower_vertex().meet(&p2.tree.lower_vertex());
    let y0 = meet.tree_height().exp();
    let cost = |x: f64| {
        let z = H2Point { x, y: y0 };
        h2_dist(&p1.hyp, &z) + h2_dist(&z, &p2.hyp)
    };
    let (hi, _) = minimize_1d(cost, p1.hyp.x.min(p2.hyp.x), p1.hyp.x.max(p2.hyp.x))?;
    Ok(DistBounds {
        lo,
        hi: hi * (1.0 + ROUNDING_SLACK),
        common_plane: None,
    })
}

/// Coarse grid followed by golden-section refinement; returns `(min value, argmin)`.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((f(a), a));
    }
    let step = (b - a) / (GRID - 1) as f64;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..GRID {
        let v = f(a + step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = a + step * best_i.saturating_sub(1) as f64;
    let mut hi = (a + step * (best_i + 1) as f64).min(b);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best_x = a + step * best_i as f64;
    let tol = GOLDEN_TOL * (b - a).abs().max(1.0);
    for _ in 0..GOLDEN_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best {
                best = v;
                best_x = x;
            }
        }
    }
    if hi - lo > tol {
        return Err(Error::NonConvergence { lo, hi });
    }
    Ok((best, best_x))
}

/// Where two plane leaves stop coinciding.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafIntersection {
    /// Divergence vertex of the two vertical lines.
    pub vertex: CloneBall,
    /// Height of the boundary horocycle of the shared region.
    pub height: f64,
    /// `exp(-height) = n^{-k}`, exact.
    pub boundary_distance: Radius,
}

pub fn leaf_intersection(zeta: &NAdic, zeta2: &NAdic) -> Result<LeafIntersection> {
    let (vertex, _) = line_distance(zeta, zeta2)?;
    Ok(LeafIntersection {
        height: vertex.tree_height(),
        boundary_distance: Radius::pow(vertex.base(), -vertex.height()),
        vertex,
    })
}

/// Barycenter of the ideal triangle `(x, y, ∞)` in the leaf of `zeta`.
pub fn barycenter_pi(x: f64, y: f64, zeta: &NAdic) -> Result<FiberPoint> {
    if x == y {
        return Err(Error::EqualPoints);
    }
    FiberPoint::on_leaf(zeta, (x + y) / 2.0, BARYCENTER_RATIO * (y - x).abs())
}

/// Exact form of the barycenter: hyperbolic coordinates `(mid, sqrt(3) * half_width)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiExact {
    pub mid: BigRational,
    pub half_width: BigRational,
    pub zeta: NAdic,
}

pub fn barycenter_pi_exact(x: &BigRational, y: &BigRational, zeta: &NAdic) -> Result<PiExact> {
    if x == y {
        return Err(Error::EqualPoints);
    }
    let two = BigRational::from_integer(2.into());
    Ok(PiExact {
        mid: (x + y) / &two,
        half_width: (y - x).abs() / two,
        zeta: zeta.clone(),
    })
}

impl PiExact {
    pub fn act(&self, g: &AffElem) -> PiExact {
        PiExact {
            mid: g.act_r(&self.mid),
            half_width: &self.half_width * g.stretch_r(),
            zeta: g.act_qn(&self.zeta),
        }
    }

    pub fn to_fiber(&self) -> Result<FiberPoint> {
        let y = 3f64.sqrt() * self.half_width.to_f64().unwrap_or(f64::NAN);
        FiberPoint::on_leaf(&self.zeta, self.mid.to_f64().unwrap_or(f64::NAN), y)
    }
}

/// The median point of the ends `x`, `eta`, `zeta`: the branch vertex of
/// the tree leaf over `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaPoint {
    pub x: BigRational,
    pub vertex: CloneBall,
}

pub fn kappa(x: &BigRational, eta: &NAdic, zeta: &NAdic) -> Result<KappaPoint> {
    Ok(KappaPoint {
        x: x.clone(),
        vertex: kappa_vertex(eta, zeta)?,
    })
}

impl KappaPoint {
    pub fn act(&self, g: &AffElem) -> KappaPoint {
        KappaPoint {
            x: g.act_r(&self.x),
            vertex: g.act_tree(&self.vertex),
        }
    }

    pub fn height(&self) -> f64 {
        self.vertex.tree_height()
    }

    pub fn to_fiber(&self) -> Result<FiberPoint> {
        let y = (self.vertex.base() as f64).powi(self.vertex.height() as i32);
        let hyp = H2Point::new(self.x.to_f64().unwrap_or(f64::NAN), y)?;
        FiberPoint::new(hyp, TreePoint::vertex(self.vertex.clone()))
    }
}

/// SVG picture of one plane leaf: the horocycles `y = n^k`, the ideal
/// triangle `(x, y, ∞)` and its barycenter.
pub fn leaf_svg(n: u32, x: f64, y: f64) -> Result<String> {
    if x == y {
        return Err(Error::EqualPoints);
    }
    let (w, h) = (640.0, 400.0);
    let mid = (x + y) / 2.0;
    let r = (y - x).abs() / 2.0;
    let span = 4.0 * r;
    let sx = |u: f64| (u - (mid - span / 2.0)) / span * w;
    let sy = |v: f64| h - v / (1.5 * span) * h;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let nf = n as f64;
    let kmin = (1e-3 * span).log(nf).floor() as i32;
    let kmax = (1.5 * span).log(nf).ceil() as i32;
    for k in kmin..=kmax {
        let yy = sy(nf.powi(k));
        let _ = writeln!(s, r##"<line x1="0" y1="{yy:.3}" x2="{w}" y2="{yy:.3}" stroke="#bbb"/>"##);
    }
    for v in [x, y] {
        let xx = sx(v);
        let _ = writeln!(s, r#"<line x1="{xx:.3}" y1="{h}" x2="{xx:.3}" y2="0" stroke="black"/>"#);
    }
    let rx = r / span * w;
    let ry = r / (1.5 * span) * h;
    let _ = writeln!(
        s,
        r#"<path d="M {:.3} {h} A {rx:.3} {ry:.3} 0 0 1 {:.3} {h}" fill="none" stroke="black"/>"#,
        sx(x.min(y)),
        sx(x.max(y))
    );
    let by = BARYCENTER_RATIO * (y - x).abs();
    let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="red"/>"#, sx(mid), sy(by));
    s.push_str("</svg>\n");
    Ok(s)
}
