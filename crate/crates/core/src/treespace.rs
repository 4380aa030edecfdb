//! The directed tree T_n, realized virtually as the inclusion lattice of
//! clones. An edge runs from each clone to each of its `n` maximal
//! sub-clones; every edge has length `log n` and the height of a vertex is
//! `h_c * log n`, so the base vertex (the all-zero clone at index 0) has
//! height 0.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nadic::{order, pow_n, CloneBall, CloneJson, NAdic, Radius};

impl CloneBall {
    /// The unique clone one step up.
    pub fn parent(&self) -> CloneBall {
        CloneBall::containing(&self.center(), self.height() - 1)
    }

    /// The `n` sub-clones one step down, ordered by the new digit.
    pub fn children(&self) -> Vec<CloneBall> {
        let n = self.base();
        let k = self.height() + 1;
        let step = pow_n(n, k);
        (0..n)
            .map(|d| {
                let c = self.center_value() + &step * BigRational::from_integer(BigInt::from(d));
                let x = NAdic::new(n, c).expect("valid base");
                CloneBall::containing(&x, k)
            })
            .collect()
    }

    /// The smallest clone containing both.
    pub fn meet(&self, other: &CloneBall) -> CloneBall {
        assert_eq!(self.base(), other.base(), "base mismatch");
        let mut k = self.height().min(other.height());
        if let Some(v) = order(&(self.center_value() - other.center_value()), self.base()) {
            k = k.min(v - 1);
        }
        CloneBall::containing(&self.center(), k)
    }

    /// Height of the vertex in T_n.
    pub fn tree_height(&self) -> f64 {
        self.height() as f64 * (self.base() as f64).ln()
    }

    /// The digit that selects `child` among the children of `self`.
    pub fn child_digit(&self, child: &CloneBall) -> Option<u32> {
        if child.height() != self.height() + 1 || !self.contains_clone(child) {
            return None;
        }
        Some(child.center().digit(child.height()))
    }
}

/// A point of T_n: a vertex plus an offset along one of its outgoing edges.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePoint {
    vertex: CloneBall,
    offset: f64,
    toward: Option<u32>,
}

impl TreePoint {
    pub fn vertex(c: CloneBall) -> TreePoint {
        TreePoint {
            vertex: c,
            offset: 0.0,
            toward: None,
        }
    }

    /// The point at distance `offset` in `[0, log n)` from `c` toward child `digit`.
    pub fn new(c: CloneBall, offset: f64, digit: u32) -> Result<TreePoint> {
        let ln = (c.base() as f64).ln();
        if !(0.0..ln).contains(&offset) {
            return Err(Error::Constraint(format!(
                "edge offset {offset} outside [0, {ln})"
            )));
        }
        if digit >= c.base() {
            return Err(Error::Constraint(format!("child digit {digit} >= {}", c.base())));
        }
        if offset == 0.0 {
            return Ok(TreePoint::vertex(c));
        }
        Ok(TreePoint {
            vertex: c,
            offset,
            toward: Some(digit),
        })
    }

    /// The point at height `h` on the vertical line through `zeta`.
    pub fn on_line(zeta: &NAdic, h: f64) -> TreePoint {
        let ln = (zeta.base() as f64).ln();
        let mut k = (h / ln).floor();
        let mut t = h - k * ln;
        if t >= ln {
            k += 1.0;
            t = 0.0;
        }
        if t < 1e-12 * ln.max(h.abs()) {
            t = 0.0;
        }
        let k = k as i64;
        let c = CloneBall::containing(zeta, k);
        if t == 0.0 {
            TreePoint::vertex(c)
        } else {
            TreePoint {
                vertex: c,
                offset: t,
                toward: Some(zeta.digit(k + 1)),
            }
        }
    }

    pub fn base(&self) -> u32 {
        self.vertex.base()
    }

    /// The vertex at the top of the edge carrying this point.
    pub fn upper_vertex(&self) -> &CloneBall {
        &self.vertex
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn toward(&self) -> Option<u32> {
        self.toward
    }

    pub fn height(&self) -> f64 {
        self.vertex.tree_height() + self.offset
    }

    /// Smallest clone whose subtree (including its incoming edge) holds the point.
    pub fn lower_vertex(&self) -> CloneBall {
        match self.toward {
            None => self.vertex.clone(),
            Some(d) => self.vertex.children().swap_remove(d as usize),
        }
    }

    /// Whether the point lies on the vertical line of `zeta`.
    pub fn on_vertical_line(&self, zeta: &NAdic) -> bool {
        self.lower_vertex().contains(zeta)
    }
}

/// Geodesic distance in T_n.
pub fn tree_dist(u: &TreePoint, v: &TreePoint) -> f64 {
    let du = u.lower_vertex();
    let dv = v.lower_vertex();
    if du.contains_clone(&dv) || dv.contains_clone(&du) {
        return (u.height() - v.height()).abs();
    }
    let m = du.meet(&dv);
    u.height() + v.height() - 2.0 * m.tree_height()
}

/// Divergence vertex of two vertical lines and the distance `n^{-k}` between them.
pub fn line_distance(zeta: &NAdic, zeta2: &NAdic) -> Result<(CloneBall, Radius)> {
    let k = zeta
        .agreement_index(zeta2)
        .ok_or(Error::EqualPoints)?;
    Ok((CloneBall::containing(zeta, k), Radius::pow(zeta.base(), -k)))
}

/// The vertex where the vertical lines of `eta` and `zeta` meet.
pub fn kappa_vertex(eta: &NAdic, zeta: &NAdic) -> Result<CloneBall> {
    line_distance(eta, zeta).map(|(v, _)| v)
}

/// The vertical line of `zeta`: the chain of clones containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalLine {
    zeta: NAdic,
}

impl VerticalLine {
    pub fn new(zeta: NAdic) -> Self {
        VerticalLine { zeta }
    }

    pub fn end(&self) -> &NAdic {
        &self.zeta
    }

    pub fn clone_at(&self, k: i64) -> CloneBall {
        CloneBall::containing(&self.zeta, k)
    }

    /// Consecutive clones from height `from` to `to` inclusive.
    pub fn chain(&self, from: i64, to: i64) -> Vec<CloneBall> {
        (from..=to).map(|k| self.clone_at(k)).collect()
    }

    pub fn point_at(&self, h: f64) -> TreePoint {
        TreePoint::on_line(&self.zeta, h)
    }
}

/// A depth-bounded subtree hanging below `root`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Truncation {
    pub n: u32,
    pub vertices: Vec<CloneJson>,
    /// Index pairs into `vertices`, parent first.
    pub edges: Vec<(usize, usize)>,
}

pub fn truncation(root: &CloneBall, depth: u32) -> Truncation {
    let mut vertices = vec![root.clone()];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &p in &frontier {
            for c in vertices[p].children() {
                vertices.push(c);
                let idx = vertices.len() - 1;
                edges.push((p, idx));
                next.push(idx);
            }
        }
        frontier = next;
    }
    Truncation {
        n: root.base(),
        vertices: vertices.iter().map(CloneBall::to_json).collect(),
        edges,
    }
}

impl Truncation {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph T {\n  node [shape=point];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let label: String = v.prefix.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
            let _ = writeln!(s, "  v{i} [xlabel=\"k={} [{}]\"];", v.k, label);
        }
        for (a, b) in &self.edges {
            let _ = writeln!(s, "  v{a} -> v{b};");
        }
        s.push_str("}\n");
        s
    }

    /// Distinct heights present, for sanity checks.
    pub fn heights(&self) -> BTreeSet<i64> {
        self.vertices.iter().map(|v| v.k).collect()
    }
}
