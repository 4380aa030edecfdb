use std::fmt::Write;

use bsgeom::treespace::Truncation;

/// Layered drawing of a truncation: depth downward, leaves spread evenly.
pub fn tree_svg(t: &Truncation) -> String {
    let mut depth = vec![0usize; t.vertices.len()];
    let mut children = vec![Vec::new(); t.vertices.len()];
    for &(p, c) in &t.edges {
        depth[c] = depth[p] + 1;
        children[p].push(c);
    }
    let mut x = vec![0.0f64; t.vertices.len()];
    let mut next_leaf = 0.0;
    place(0, &children, &mut x, &mut next_leaf);
    let (dx, dy, pad) = (24.0, 60.0, 20.0);
    let w = (next_leaf.max(1.0) - 1.0) * dx + 2.0 * pad;
    let h = *depth.iter().max().unwrap_or(&0) as f64 * dy + 2.0 * pad;
    let pos = |i: usize| (pad + x[i] * dx, pad + depth[i] as f64 * dy);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}">"#);
    for &(p, c) in &t.edges {
        let ((x1, y1), (x2, y2)) = (pos(p), pos(c));
        let _ = writeln!(s, r#"  <line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="black"/>"#);
    }
    for (i, v) in t.vertices.iter().enumerate() {
        let (cx, cy) = pos(i);
        let _ = writeln!(s, r#"  <circle cx="{cx:.1}" cy="{cy:.1}" r="3"><title>k={}</title></circle>"#, v.k);
    }
    s.push_str("</svg>\n");
    s
}

fn place(v: usize, children: &[Vec<usize>], x: &mut [f64], next_leaf: &mut f64) {
    if children[v].is_empty() {
        x[v] = *next_leaf;
        *next_leaf += 1.0;
        return;
    }
    for &c in &children[v] {
        place(c, children, x, next_leaf);
    }
    let first = x[children[v][0]];
    let last = x[*children[v].last().expect("nonempty")];
    x[v] = (first + last) / 2.0;
}
