//! Triangulations of the unit disk and their plain-text format.
//!
//! Text format, one record per line (`#` starts a comment):
//!
//! ```text
//! nodes <count>
//! <x> <y>
//! ...
//! triangles <count>
//! <i> <j> <k>
//! ...
//! ```

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Triangle mesh with counter-clockwise triangles and an ordered boundary loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
    boundary_loop: Vec<usize>,
}

impl Mesh {
    /// Ring mesh of the unit disk: `K = ⌈1/h⌉` concentric rings, ring `k` carrying
    /// `6k` equally spaced nodes. Boundary nodes are placed exactly on the circle.
    pub fn disk(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Mesh(format!("invalid mesh size {h}")));
        }
        let rings = (1.0 / h).ceil() as usize;
        if rings > 2000 {
            return Err(Error::Mesh(format!("mesh size {h} too small")));
        }
        let mut nodes = vec![[0.0, 0.0]];
        let mut first = vec![0usize];
        for k in 1..=rings {
            first.push(nodes.len());
            let r = k as f64 / rings as f64;
            let m = 6 * k;
            for j in 0..m {
                let t = TAU * j as f64 / m as f64;
                if k == rings {
                    let (s, c) = t.sin_cos();
                    nodes.push([c, s]);
                } else {
                    nodes.push([r * t.cos(), r * t.sin()]);
                }
            }
        }
        let mut triangles = Vec::with_capacity(6 * rings * rings);
        for j in 0..6 {
            triangles.push([0, first[1] + j, first[1] + (j + 1) % 6]);
        }
        for k in 2..=rings {
            let (m0, m1) = (6 * (k - 1), 6 * k);
            let (b0, b1) = (first[k - 1], first[k]);
            let (mut i, mut j) = (0usize, 0usize);
            while i < m0 || j < m1 {
                let next_inner = (i + 1) as f64 / m0 as f64;
                let next_outer = (j + 1) as f64 / m1 as f64;
                let advance_inner = j == m1 || (i < m0 && next_inner < next_outer);
                if advance_inner {
                    triangles.push([b0 + i % m0, b1 + j % m1, b0 + (i + 1) % m0]);
                    i += 1;
                } else {
                    triangles.push([b0 + i % m0, b1 + j % m1, b1 + (j + 1) % m1]);
                    j += 1;
                }
            }
        }
        Self::from_parts(nodes, triangles)
    }

    /// Builds a mesh from raw arrays, orienting nothing: every triangle must
    /// already be counter-clockwise with positive area.
    pub fn from_parts(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if nodes.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::NonFinite("mesh nodes"));
        }
        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::Mesh(format!("triangle {t} references a missing node")));
            }
            let area = signed_area(&nodes, tri);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!("triangle {t} has non-positive signed area {area:e}")));
            }
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_insert((0, 0));
                entry.0 += 1;
                entry.1 = a;
            }
        }
        let mut next = HashMap::new();
        for (&(lo, hi), &(count, from)) in &edges {
            match count {
                1 => {
                    let to = if from == lo { hi } else { lo };
                    if next.insert(from, to).is_some() {
                        return Err(Error::Mesh(format!("boundary is not a simple loop at node {from}")));
                    }
                }
                2 => {}
                _ => return Err(Error::Mesh(format!("edge ({lo}, {hi}) shared by {count} triangles"))),
            }
        }
        let mut on_boundary = vec![false; nodes.len()];
        let mut boundary_loop = Vec::with_capacity(next.len());
        if let Some(&start) = next.keys().min() {
            let mut cur = start;
            loop {
                boundary_loop.push(cur);
                on_boundary[cur] = true;
                cur = *next.get(&cur).ok_or_else(|| Error::Mesh("open boundary chain".into()))?;
                if cur == start {
                    break;
                }
                if boundary_loop.len() > next.len() {
                    return Err(Error::Mesh("boundary walk did not close".into()));
                }
            }
        }
        if boundary_loop.len() != next.len() {
            return Err(Error::Mesh("boundary consists of several loops".into()));
        }
        Ok(Self { nodes, triangles, on_boundary, boundary_loop })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    /// Boundary nodes in counter-clockwise order.
    pub fn boundary_loop(&self) -> &[usize] {
        &self.boundary_loop
    }

    /// Consecutive boundary edges `(a, b)` in counter-clockwise order.
    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.boundary_loop.len();
        (0..n).map(move |k| (self.boundary_loop[k], self.boundary_loop[(k + 1) % n]))
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for e in 0..3 {
                let (p, q) = (self.nodes[tri[e]], self.nodes[tri[(e + 1) % 3]]);
                h = h.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        h
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| signed_area(&self.nodes, t)).sum()
    }

    /// Checks that every boundary node lies on the unit circle within 1e-12.
    pub fn check_disk_boundary(&self) -> Result<()> {
        for &i in &self.boundary_loop {
            let [x, y] = self.nodes[i];
            let dev = ((x * x + y * y).sqrt() - 1.0).abs();
            if dev > 1e-12 {
                return Err(Error::Mesh(format!("boundary node {i} is {dev:e} off the unit circle")));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let count = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<usize> {
            let (no, l) = lines.next().ok_or_else(|| Error::Parse(format!("missing '{key}' header")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(Error::Parse(format!("line {no}: expected '{key} <count>'")));
            }
            it.next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse(format!("line {no}: bad count")))
        };
        let n = count(&mut lines, "nodes")?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let (no, l) = lines.next().ok_or_else(|| Error::Parse("truncated node list".into()))?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {no}: bad coordinate '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("line {no}: expected two coordinates")));
            }
            nodes.push([v[0], v[1]]);
        }
        let m = count(&mut lines, "triangles")?;
        let mut triangles = Vec::with_capacity(m);
        for _ in 0..m {
            let (no, l) = lines.next().ok_or_else(|| Error::Parse("truncated triangle list".into()))?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("line {no}: bad index '{t}'"))))
                .collect::<Result<_>>()?;
            if v.len() != 3 {
                return Err(Error::Parse(format!("line {no}: expected three indices")));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        if let Some((no, _)) = lines.next() {
            return Err(Error::Parse(format!("line {no}: trailing content")));
        }
        Self::from_parts(nodes, triangles)
    }
}

pub(crate) fn signed_area(nodes: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}
