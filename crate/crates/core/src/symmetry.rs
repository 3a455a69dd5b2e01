//! Polygon geometry, the discrete symmetry groups of the two solution classes,
//! symmetrization and the angular cells around each polygon vertex.
//!
//! Axis indices are zero-based throughout the library: the plane of the outer
//! polygon is `(0, 1)` and the plane of the inner polygon is `(2, 3)`.

use crate::error::{Error, Result};
use crate::point::{dist, Point};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Vertices of a regular polygon in a coordinate plane of R^N, each carrying
/// a bubble of the same scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonConfig {
    pub count: usize,
    pub radius: f64,
    pub scale: f64,
    pub plane: (usize, usize),
    pub dim: usize,
}

impl PolygonConfig {
    pub fn new(count: usize, radius: f64, scale: f64, plane: (usize, usize), dim: usize) -> Self {
        PolygonConfig { count, radius, scale, plane, dim }
    }

    /// Outer polygon `x_j` in the `(y_1, y_2)` plane.
    pub fn outer(count: usize, radius: f64, scale: f64, dim: usize) -> Self {
        Self::new(count, radius, scale, (0, 1), dim)
    }

    /// Inner polygon `p_j` in the `(y_3, y_4)` plane.
    pub fn inner(count: usize, radius: f64, scale: f64, dim: usize) -> Self {
        Self::new(count, radius, scale, (2, 3), dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("polygon count must be positive".into()));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidConfig(format!("polygon radius must be positive, got {}", self.radius)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidConfig(format!("bubble scale must be positive, got {}", self.scale)));
        }
        let (a, b) = self.plane;
        if a == b || a >= self.dim || b >= self.dim {
            return Err(Error::InvalidConfig(format!("invalid plane {:?} for N = {}", self.plane, self.dim)));
        }
        Ok(())
    }

    /// Polar angle of vertex `j` (zero-based).
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.count as f64
    }

    pub fn vertex(&self, j: usize) -> Point {
        let th = self.angle(j);
        let mut p = vec![0.0; self.dim];
        p[self.plane.0] = self.radius * th.cos();
        p[self.plane.1] = self.radius * th.sin();
        p
    }

    /// Unit vector pointing from the origin to vertex `j`.
    pub fn radial_direction(&self, j: usize) -> Point {
        let th = self.angle(j);
        let mut e = vec![0.0; self.dim];
        e[self.plane.0] = th.cos();
        e[self.plane.1] = th.sin();
        e
    }
}

pub fn build_polygon(config: &PolygonConfig) -> Result<Vec<Point>> {
    config.validate()?;
    Ok((0..config.count).map(|j| config.vertex(j)).collect())
}

/// `|x_j - x_1| = 2 r sin(j pi / k)`, the chord length between vertices `j`
/// steps apart.
pub fn chord(radius: f64, count: usize, steps: usize) -> f64 {
    2.0 * radius * (steps as f64 * PI / count as f64).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    /// Rotations in `(y_1, y_2)`, evenness in `y_2, ..., y_N`.
    H,
    /// Rotations in `(y_1, y_2)` and `(y_3, y_4)`, evenness in every variable.
    X,
}

/// Dihedral factor acting on one coordinate plane: rotations by `2 pi / order`
/// and the flip `y_b -> -y_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DihedralFactor {
    pub plane: (usize, usize),
    pub order: usize,
}

/// One group element: per dihedral factor the pair (rotation steps, flip),
/// meaning `R^j F^s`, and a sign mask over `reflection_axes`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub rotations: Vec<(usize, bool)>,
    pub signs: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGroup {
    pub dim: usize,
    pub class: SymmetryClass,
    pub factors: Vec<DihedralFactor>,
    pub reflection_axes: Vec<usize>,
}

impl SymmetryGroup {
    pub fn h_class(k: usize, dim: usize) -> Self {
        SymmetryGroup {
            dim,
            class: SymmetryClass::H,
            factors: vec![DihedralFactor { plane: (0, 1), order: k }],
            reflection_axes: (2..dim).collect(),
        }
    }

    pub fn x_class(k: usize, n: usize, dim: usize) -> Self {
        SymmetryGroup {
            dim,
            class: SymmetryClass::X,
            factors: vec![
                DihedralFactor { plane: (0, 1), order: k },
                DihedralFactor { plane: (2, 3), order: n },
            ],
            reflection_axes: (4..dim).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|f| 2 * f.order).product::<usize>() << self.reflection_axes.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            rotations: vec![(0, false); self.factors.len()],
            signs: 0,
        }
    }

    /// Rotation by `steps * 2 pi / order` in factor `factor`.
    pub fn rotation(&self, factor: usize, steps: usize) -> GroupElement {
        let mut g = self.identity();
        g.rotations[factor] = (steps % self.factors[factor].order, false);
        g
    }

    /// Sign flip of coordinate `axis`, when it belongs to the group.
    pub fn reflection(&self, axis: usize) -> Option<GroupElement> {
        let mut g = self.identity();
        if let Some(pos) = self.reflection_axes.iter().position(|&a| a == axis) {
            g.signs = 1 << pos;
            return Some(g);
        }
        for (i, f) in self.factors.iter().enumerate() {
            if f.plane.1 == axis {
                g.rotations[i] = (0, true);
                return Some(g);
            }
            if f.plane.0 == axis && f.order % 2 == 0 {
                g.rotations[i] = (f.order / 2, true);
                return Some(g);
            }
        }
        None
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        let mut out = vec![self.identity()];
        for (i, f) in self.factors.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * 2 * f.order);
            for g in &out {
                for s in [false, true] {
                    for j in 0..f.order {
                        let mut h = g.clone();
                        h.rotations[i] = (j, s);
                        next.push(h);
                    }
                }
            }
            out = next;
        }
        let m = self.reflection_axes.len();
        let mut all = Vec::with_capacity(out.len() << m);
        for g in out {
            for mask in 0..(1u64 << m) {
                let mut h = g.clone();
                h.signs = mask;
                all.push(h);
            }
        }
        all
    }

    /// `a * b`, i.e. apply `b` first.
    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let rotations = self
            .factors
            .iter()
            .zip(a.rotations.iter().zip(&b.rotations))
            .map(|(f, (&(j1, s1), &(j2, s2)))| {
                let k = f.order;
                let j = if s1 { (j1 + k - j2 % k) % k } else { (j1 + j2) % k };
                (j, s1 ^ s2)
            })
            .collect();
        GroupElement { rotations, signs: a.signs ^ b.signs }
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let rotations = self
            .factors
            .iter()
            .zip(&g.rotations)
            .map(|(f, &(j, s))| if s { (j, true) } else { ((f.order - j) % f.order, false) })
            .collect();
        GroupElement { rotations, signs: g.signs }
    }

    pub fn apply(&self, g: &GroupElement, y: &[f64]) -> Point {
        let mut z = y.to_vec();
        for (f, &(j, s)) in self.factors.iter().zip(&g.rotations) {
            let (a, b) = f.plane;
            if s {
                z[b] = -z[b];
            }
            if j != 0 {
                let th = 2.0 * PI * j as f64 / f.order as f64;
                let (sn, cs) = th.sin_cos();
                let (u, v) = (z[a], z[b]);
                z[a] = cs * u - sn * v;
                z[b] = sn * u + cs * v;
            }
        }
        for (pos, &axis) in self.reflection_axes.iter().enumerate() {
            if g.signs >> pos & 1 == 1 {
                z[axis] = -z[axis];
            }
        }
        z
    }
}

pub fn apply_group_element(group: &SymmetryGroup, g: &GroupElement, y: &[f64]) -> Point {
    group.apply(g, y)
}

pub type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Group average of `f`. The result is invariant under every element, linear
/// in `f` and idempotent.
pub fn symmetrize(f: Field, group: &SymmetryGroup) -> Field {
    let group = group.clone();
    let elements = group.elements();
    let w = 1.0 / elements.len() as f64;
    Arc::new(move |y: &[f64]| elements.iter().map(|g| f(&group.apply(g, y))).sum::<f64>() * w)
}

/// The appendix formula taken literally: rotation average `f_bar` over the
/// `k` rotations in `(y_1, y_2)`, then `1/(N-1) sum_{i=2..N} (f_bar(y) +
/// f_bar(B_i y))/2`. With `include_b1` the sum also runs over `i = 1` (and is
/// normalised by `N`).
///
/// This map is not invariant under the full group in general; the
/// group-average [`symmetrize`] is the invariant projection.
pub fn appendix_symmetrize(f: Field, k: usize, dim: usize, include_b1: bool) -> Field {
    let first = if include_b1 { 0 } else { 1 };
    let count = (dim - first) as f64;
    Arc::new(move |y: &[f64]| {
        let fbar = |z: &[f64]| -> f64 {
            (1..=k).map(|j| f(&rotate_plane(z, 0, 1, 2.0 * PI * j as f64 / k as f64))).sum::<f64>() / k as f64
        };
        let base = fbar(y);
        let mut acc = 0.0;
        let mut z = y.to_vec();
        for i in first..dim {
            z[i] = -z[i];
            acc += 0.5 * (base + fbar(&z));
            z[i] = -z[i];
        }
        acc / count
    })
}

fn rotate_plane(y: &[f64], a: usize, b: usize, th: f64) -> Point {
    let (sn, cs) = th.sin_cos();
    let mut z = y.to_vec();
    z[a] = cs * y[a] - sn * y[b];
    z[b] = sn * y[a] + cs * y[b];
    z
}

/// Weighted point set standing in for a symmetrized point mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrizedPoints {
    pub points: Vec<(Point, f64)>,
}

impl SymmetrizedPoints {
    /// Orbit of `x` under the group with uniform weights; coincident images
    /// are merged.
    pub fn orbit(x: &[f64], group: &SymmetryGroup) -> Self {
        let elements = group.elements();
        let w = 1.0 / elements.len() as f64;
        let mut points: Vec<(Point, f64)> = Vec::new();
        for g in &elements {
            let z = group.apply(g, x);
            match points.iter_mut().find(|(p, _)| dist(p, &z) < 1e-12 * (1.0 + crate::point::norm(x))) {
                Some(entry) => entry.1 += w,
                None => points.push((z, w)),
            }
        }
        SymmetrizedPoints { points }
    }

    /// The appendix decomposition: masses `1/(2k(N-1))` at `A_j x` and at
    /// `B_i A_j x` for `i = 2..N`, `j = 1..k` (unmerged).
    pub fn appendix(x: &[f64], k: usize) -> Self {
        let dim = x.len();
        let w = 1.0 / (2.0 * k as f64 * (dim - 1) as f64);
        let mut points = Vec::with_capacity(2 * k * (dim - 1));
        for i in 1..dim {
            for j in 1..=k {
                let a = rotate_plane(x, 0, 1, 2.0 * PI * j as f64 / k as f64);
                let mut b = a.clone();
                b[i] = -b[i];
                points.push((a, w));
                points.push((b, w));
            }
        }
        SymmetrizedPoints { points }
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|(_, w)| w).sum()
    }

    /// Newtonian majorant `sum_p w_p C / |y - p|^{N-2}`.
    pub fn green_majorant(&self, y: &[f64], c: f64) -> f64 {
        let n = y.len() as i32;
        self.points.iter().map(|(p, w)| w * c / dist(y, p).powi(n - 2)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    /// Angular sectors of the outer plane.
    Omega,
    /// Angular sectors of the inner plane.
    D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub kind: CellKind,
    pub parent: PolygonConfig,
}

impl Cell {
    pub fn new(index: usize, parent: &PolygonConfig) -> Self {
        let kind = if parent.plane == (2, 3) { CellKind::D } else { CellKind::Omega };
        Cell { index, kind, parent: parent.clone() }
    }
}

const CELL_SLACK: f64 = 1e-12;

/// Closed angular sector test `<proj(y)/|proj(y)|, x_j/|x_j|> >= cos(pi/k)`.
pub fn cell_contains(cell: &Cell, y: &[f64]) -> Result<bool> {
    let (a, b) = cell.parent.plane;
    let r = y[a].hypot(y[b]);
    if r == 0.0 {
        return Err(Error::AmbiguousMembership);
    }
    let th = cell.parent.angle(cell.index);
    let c = (y[a] * th.cos() + y[b] * th.sin()) / r;
    Ok(c >= (PI / cell.parent.count as f64).cos() - CELL_SLACK)
}

/// Index of the cell containing `y`; ties go to the lowest index and points
/// on the axis go to cell 0.
pub fn cell_index(parent: &PolygonConfig, y: &[f64]) -> usize {
    let (a, b) = parent.plane;
    if y[a] == 0.0 && y[b] == 0.0 {
        return 0;
    }
    let th = y[b].atan2(y[a]).rem_euclid(2.0 * PI);
    let step = 2.0 * PI / parent.count as f64;
    ((th / step + 0.5).floor() as usize) % parent.count
}
