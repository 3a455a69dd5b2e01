//! Adaptive volume quadrature over R^N with symmetry reductions, and surface
//! and ball quadrature for spheres in R^N.
//!
//! A volume integrand is any `Fn(&[f64]) -> f64` on R^N. The reduction mode
//! decides which low-dimensional coordinates are integrated; the integrand is
//! evaluated at a representative point of each orbit, and the orbit measure
//! enters as a Jacobian weight.

pub mod rules;
pub mod sphere;
pub mod sum;

pub use sphere::{integrate_ball, integrate_sphere, integrate_sphere_aligned, SphereRule};
pub use sum::pairwise_sum;

use crate::error::{Error, Result};
use crate::point::{dist, dot, norm, orthogonal_unit, Point};
use crate::special::sphere_area;
use crate::symmetry::SymmetryGroup;
use rayon::prelude::*;
use rules::{gk15_combine, gk15_points, GenzMalik};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coordinate reduction used by [`integrate_volume`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Reduction {
    /// Box `[-R, R]^N`, no symmetry assumed.
    FullNd,
    /// Radial fields about `center`: `omega_{N-1} int r^{N-1} f dr`. With
    /// `radius` the ball `B_radius(center)` is integrated.
    Radial1d { center: Point, radius: Option<f64> },
    /// Fields invariant under rotations fixing the line `origin + s axis`.
    /// Polar coordinates `(r, phi)` about `origin`, weight
    /// `omega_{N-2} r^{N-1} sin^{N-2} phi`. With `radius` only the ball
    /// `B_radius(origin)` is integrated.
    Axial2d { origin: Point, axis: Point, radius: Option<f64> },
    /// Fields depending on `(y_a, y_b)` and on the norm `t` of the remaining
    /// coordinates. With `fold = k > 0` the field must also be invariant under
    /// rotation by `2 pi / k` and the flip `y_b -> -y_b` in the plane; the
    /// wedge `theta in [0, pi/k]` is integrated with weight
    /// `2k s omega_{N-3} t^{N-3}`. `fold = 0` integrates all angles.
    Cylinder3d { plane: (usize, usize), fold: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// Radius chosen so the tail bound from the declared decay exponent is
    /// below `abs_tol / 10`.
    Auto,
    Radius(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub truncation: Truncation,
    pub max_subdivisions: usize,
    pub seed: u64,
    pub reduction: Reduction,
    #[serde(default)]
    pub sphere_rule: SphereRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            truncation: Truncation::Auto,
            max_subdivisions: 200_000,
            seed: 0,
            reduction: Reduction::FullNd,
            sphere_rule: SphereRule::Auto,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn radial(center: Point) -> Self {
        QuadratureSpec::default().with_reduction(Reduction::Radial1d { center, radius: None })
    }

    pub fn axial(origin: Point, axis: Point) -> Self {
        QuadratureSpec::default().with_reduction(Reduction::Axial2d { origin, axis, radius: None })
    }

    pub fn cylinder(plane: (usize, usize), fold: usize) -> Self {
        QuadratureSpec::default().with_reduction(Reduction::Cylinder3d { plane, fold })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidSpec("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidSpec("max_subdivisions must be positive".into()));
        }
        if let Truncation::Radius(r) = self.truncation {
            if !(r > 0.0) {
                return Err(Error::InvalidSpec(format!("truncation radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    /// Cell error estimates plus the truncation bound.
    pub error_estimate: f64,
    pub cells_used: usize,
    pub truncation_bound: f64,
}

impl IntegralResult {
    pub fn scaled(self, c: f64) -> Self {
        IntegralResult {
            value: c * self.value,
            error_estimate: c.abs() * self.error_estimate,
            ..self
        }
    }

    pub fn plus(self, other: IntegralResult) -> Self {
        IntegralResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            cells_used: self.cells_used + other.cells_used,
            truncation_bound: self.truncation_bound + other.truncation_bound,
        }
    }
}

/// Location and width of a sharp feature, used to grade the initial mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: Point,
    pub width: f64,
}

impl Peak {
    pub fn new(center: Point, width: f64) -> Self {
        Peak { center, width }
    }
}

/// A volume integrand with its declared decay `|f(y)| <= A |y|^{-decay}`.
pub struct Integrand<'a> {
    pub dim: usize,
    pub f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub decay: f64,
    pub peaks: Vec<Peak>,
}

impl<'a> Integrand<'a> {
    pub fn new(dim: usize, f: &'a (dyn Fn(&[f64]) -> f64 + Sync), decay: f64) -> Self {
        Integrand { dim, f, decay, peaks: Vec::new() }
    }

    pub fn with_peaks(mut self, peaks: Vec<Peak>) -> Self {
        self.peaks = peaks;
        self
    }
}

/// Maps reduced coordinates to a representative point and Jacobian weight.
struct Chart {
    dim: usize,
    reduction: Reduction,
    /// Orthonormal frame for the axial chart.
    frame: Option<(Point, Point)>,
    rest_axis: usize,
}

impl Chart {
    fn new(dim: usize, reduction: &Reduction) -> Result<Self> {
        let mut frame = None;
        let mut rest_axis = 0;
        match reduction {
            Reduction::FullNd => {}
            Reduction::Radial1d { center, radius } => {
                check_len(center, dim)?;
                check_radius(*radius)?;
            }
            Reduction::Axial2d { origin, axis, radius } => {
                check_len(origin, dim)?;
                check_len(axis, dim)?;
                check_radius(*radius)?;
                let n = norm(axis);
                if !(n > 0.0) {
                    return Err(Error::InvalidSpec("axial reduction needs a nonzero axis".into()));
                }
                let a: Point = axis.iter().map(|v| v / n).collect();
                let e = orthogonal_unit(&a);
                frame = Some((a, e));
            }
            Reduction::Cylinder3d { plane, .. } => {
                let (a, b) = *plane;
                if a == b || a >= dim || b >= dim || dim < 4 {
                    return Err(Error::InvalidSpec(format!("invalid cylinder plane {plane:?} for N = {dim}")));
                }
                rest_axis = (0..dim).find(|i| *i != a && *i != b).unwrap();
            }
        }
        Ok(Chart { dim, reduction: reduction.clone(), frame, rest_axis })
    }

    fn reduced_dim(&self) -> usize {
        match self.reduction {
            Reduction::FullNd => self.dim,
            Reduction::Radial1d { .. } => 1,
            Reduction::Axial2d { .. } => 2,
            Reduction::Cylinder3d { .. } => 3,
        }
    }

    /// Center from which truncation and decay are measured.
    fn origin(&self) -> Point {
        match &self.reduction {
            Reduction::Radial1d { center, .. } => center.clone(),
            Reduction::Axial2d { origin, .. } => origin.clone(),
            _ => vec![0.0; self.dim],
        }
    }

    fn ball_radius(&self) -> Option<f64> {
        match &self.reduction {
            Reduction::Radial1d { radius, .. } | Reduction::Axial2d { radius, .. } => *radius,
            _ => None,
        }
    }

    fn domain(&self, r: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.reduction {
            Reduction::FullNd => (vec![-r; self.dim], vec![r; self.dim]),
            Reduction::Radial1d { .. } => (vec![0.0], vec![r]),
            Reduction::Axial2d { .. } => (vec![0.0, 0.0], vec![r, PI]),
            Reduction::Cylinder3d { fold, .. } => {
                let th = if *fold == 0 { 2.0 * PI } else { PI / *fold as f64 };
                (vec![0.0, 0.0, 0.0], vec![r, th, r])
            }
        }
    }

    fn map(&self, u: &[f64], y: &mut [f64]) -> f64 {
        let n = self.dim as i32;
        match &self.reduction {
            Reduction::FullNd => {
                y.copy_from_slice(u);
                1.0
            }
            Reduction::Radial1d { center, .. } => {
                y.copy_from_slice(center);
                y[0] += u[0];
                sphere_area(self.dim) * u[0].powi(n - 1)
            }
            Reduction::Axial2d { origin, .. } => {
                let (a, e) = self.frame.as_ref().unwrap();
                let (r, phi) = (u[0], u[1]);
                let (s, c) = phi.sin_cos();
                for i in 0..self.dim {
                    y[i] = origin[i] + r * (c * a[i] + s * e[i]);
                }
                sphere_area(self.dim - 1) * r.powi(n - 1) * s.abs().powi(n - 2)
            }
            Reduction::Cylinder3d { plane, fold } => {
                let (s, th, t) = (u[0], u[1], u[2]);
                y.iter_mut().for_each(|v| *v = 0.0);
                y[plane.0] = s * th.cos();
                y[plane.1] = s * th.sin();
                y[self.rest_axis] = t;
                let copies = if *fold == 0 { 1.0 } else { 2.0 * *fold as f64 };
                copies * s * sphere_area(self.dim - 2) * t.powi(n - 3)
            }
        }
    }

    /// Reduced coordinates and per-axis widths of a peak.
    fn reduce_peak(&self, p: &Peak) -> (Vec<f64>, Vec<f64>) {
        let w = p.width;
        match &self.reduction {
            Reduction::FullNd => (p.center.clone(), vec![w; self.dim]),
            Reduction::Radial1d { center, .. } => (vec![dist(&p.center, center)], vec![w]),
            Reduction::Axial2d { origin, .. } => {
                let (a, _) = self.frame.as_ref().unwrap();
                let d: Point = p.center.iter().zip(origin).map(|(x, o)| x - o).collect();
                let r = norm(&d);
                let phi = if r > 0.0 { (dot(&d, a) / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
                (vec![r, phi], vec![w, w / r.max(w)])
            }
            Reduction::Cylinder3d { plane, fold } => {
                let s = p.center[plane.0].hypot(p.center[plane.1]);
                let mut th = p.center[plane.1].atan2(p.center[plane.0]).rem_euclid(2.0 * PI);
                if *fold > 0 {
                    let wedge = 2.0 * PI / *fold as f64;
                    th = th.rem_euclid(wedge);
                    if th > wedge / 2.0 {
                        th = wedge - th;
                    }
                }
                let t = (0..self.dim)
                    .filter(|i| *i != plane.0 && *i != plane.1)
                    .map(|i| p.center[i] * p.center[i])
                    .sum::<f64>()
                    .sqrt();
                (vec![s, th, t], vec![w, w / s.max(w), w])
            }
        }
    }
}

fn check_len(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(Error::InvalidSpec(format!("point of length {} in an N = {dim} reduction", p.len())));
    }
    Ok(())
}

fn check_radius(r: Option<f64>) -> Result<()> {
    match r {
        Some(r) if !(r > 0.0) => Err(Error::InvalidSpec(format!("ball radius must be positive, got {r}"))),
        _ => Ok(()),
    }
}

/// Breakpoints on `[lo, hi]` graded geometrically around each feature.
fn graded_breaks(lo: f64, hi: f64, features: &[(f64, f64)], coarse: usize, ratio: f64) -> Vec<f64> {
    let mut b = vec![lo, hi];
    for i in 1..coarse {
        b.push(lo + (hi - lo) * i as f64 / coarse as f64);
    }
    for &(c, w) in features {
        if !(w > 0.0) {
            continue;
        }
        b.push(c);
        let mut h = 0.5 * w;
        while h < 2.0 * (hi - lo) {
            b.push(c - h);
            b.push(c + h);
            h *= ratio;
        }
    }
    b.retain(|x| *x >= lo && *x <= hi);
    b.sort_by(|x, y| x.total_cmp(y));
    let tol = 1e-12 * (hi - lo);
    let mut out: Vec<f64> = Vec::with_capacity(b.len());
    for x in b {
        if out.last().is_none_or(|l| x - l > tol) {
            out.push(x);
        }
    }
    if let Some(l) = out.last_mut() {
        *l = hi;
    }
    out
}

#[derive(Clone, Debug)]
struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
    axis: usize,
}

/// Applies the basic rule of the right dimension to boxes.
struct Engine<'a> {
    chart: &'a Chart,
    f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    gm: Option<GenzMalik>,
}

impl<'a> Engine<'a> {
    fn eval_point(&self, u: &[f64], y: &mut [f64]) -> f64 {
        let jac = self.chart.map(u, y);
        if jac == 0.0 {
            return 0.0;
        }
        let v = (self.f)(y);
        if v == 0.0 {
            0.0
        } else {
            jac * v
        }
    }

    fn eval(&self, lo: Vec<f64>, hi: Vec<f64>) -> Cell {
        let mut y = vec![0.0; self.chart.dim];
        match &self.gm {
            None => {
                let pts = gk15_points(lo[0], hi[0]);
                let vals: Vec<f64> = pts.iter().map(|&x| self.eval_point(&[x], &mut y)).collect();
                let (value, error) = gk15_combine(lo[0], hi[0], &vals);
                Cell { lo, hi, value, error, axis: 0 }
            }
            Some(gm) => {
                let d = gm.dim;
                let c: Vec<f64> = (0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect();
                let h: Vec<f64> = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).collect();
                let mut u = vec![0.0; d];
                let vals: Vec<f64> = gm
                    .points
                    .iter()
                    .map(|p| {
                        for i in 0..d {
                            u[i] = c[i] + h[i] * p[i];
                        }
                        self.eval_point(&u, &mut y)
                    })
                    .collect();
                let (value, error, axis) = gm.combine(&h, &vals);
                Cell { lo, hi, value, error, axis }
            }
        }
    }
}

/// Shared adaptive driver: returns `(value, cell error, cells)` or a
/// convergence failure carrying the best estimate.
fn adapt(
    engine: &Engine<'_>,
    initial: Vec<(Vec<f64>, Vec<f64>)>,
    rel_tol: f64,
    abs_tol: f64,
    extra_error: f64,
    max_cells: usize,
) -> Result<(f64, f64, usize)> {
    let mut cells: Vec<Cell> = initial.into_par_iter().map(|(lo, hi)| engine.eval(lo, hi)).collect();
    loop {
        let values: Vec<f64> = cells.iter().map(|c| c.value).collect();
        let errors: Vec<f64> = cells.iter().map(|c| c.error).collect();
        let value = pairwise_sum(&values);
        let error = pairwise_sum(&errors);
        let target = abs_tol.max(rel_tol * value.abs());
        if error + extra_error <= target {
            return Ok((value, error, cells.len()));
        }
        if cells.len() >= max_cells || !error.is_finite() {
            return Err(Error::ConvergenceFailure { value, error: error + extra_error, cells: cells.len() });
        }
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&a, &b| cells[b].error.total_cmp(&cells[a].error).then(a.cmp(&b)));
        let batch = (cells.len() / 8).clamp(1, 2048).min(max_cells - cells.len()).max(1);
        // stop splitting once the selected cells carry a negligible share
        let mut chosen = Vec::with_capacity(batch);
        let mut carried = 0.0;
        for &i in order.iter().take(batch) {
            if !chosen.is_empty() && carried >= 0.5 * (error + extra_error - target).max(0.0) {
                break;
            }
            chosen.push(i);
            carried += cells[i].error;
        }
        let children: Vec<(Vec<f64>, Vec<f64>)> = chosen
            .iter()
            .flat_map(|&i| {
                let c = &cells[i];
                let ax = c.axis;
                let mid = 0.5 * (c.lo[ax] + c.hi[ax]);
                let mut hi1 = c.hi.clone();
                hi1[ax] = mid;
                let mut lo2 = c.lo.clone();
                lo2[ax] = mid;
                [(c.lo.clone(), hi1), (lo2, c.hi.clone())]
            })
            .collect();
        let fresh: Vec<Cell> = children.into_par_iter().map(|(lo, hi)| engine.eval(lo, hi)).collect();
        let mut fresh = fresh.into_iter();
        chosen.sort_unstable();
        for &i in &chosen {
            cells[i] = fresh.next().unwrap();
        }
        cells.extend(fresh);
    }
}

/// Estimates `A` in `|f(y)| <= A |y - o|^{-p}` by sampling at radius `r1`
/// along coordinate and diagonal directions, with a safety factor.
fn decay_amplitude(f: &(dyn Fn(&[f64]) -> f64 + Sync), origin: &[f64], r1: f64, p: f64) -> f64 {
    let dim = origin.len();
    let mut dirs: Vec<Point> = Vec::new();
    for i in 0..dim {
        for s in [-1.0, 1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            dirs.push(e);
        }
    }
    let diag = 1.0 / (dim as f64).sqrt();
    dirs.push(vec![diag; dim]);
    dirs.push(vec![-diag; dim]);
    dirs.push((0..dim).map(|i| if i % 2 == 0 { diag } else { -diag }).collect());
    let m = dirs
        .iter()
        .map(|e| {
            let y: Point = origin.iter().zip(e).map(|(o, v)| o + r1 * v).collect();
            f(&y).abs()
        })
        .fold(0.0, f64::max);
    4.0 * m * r1.powf(p)
}

/// Integral of `f` over R^N (or the ball selected by the reduction).
///
/// With `symmetry` given, the integrand is first checked for invariance at
/// a few sample points; a reduction that assumes symmetry the field lacks is
/// rejected.
pub fn integrate_volume(
    integrand: &Integrand<'_>,
    spec: &QuadratureSpec,
    symmetry: Option<&SymmetryGroup>,
) -> Result<IntegralResult> {
    spec.validate()?;
    let dim = integrand.dim;
    let chart = Chart::new(dim, &spec.reduction)?;
    if let Some(g) = symmetry {
        check_invariance(integrand, g)?;
    }
    let origin = chart.origin();
    let ball = chart.ball_radius();

    // without hints, grade toward a unit-width feature at the chart origin
    let default_peak = [Peak::new(origin.clone(), 1.0)];
    let peaks: &[Peak] = if integrand.peaks.is_empty() { &default_peak } else { &integrand.peaks };
    let peak_reach = peaks
        .iter()
        .map(|p| dist(&p.center, &origin) + 20.0 * p.width)
        .fold(1.0, f64::max);
    let (radius, tail) = match (ball, &spec.truncation) {
        (Some(r), _) => (r, 0.0),
        (None, Truncation::Radius(r)) => {
            let p = integrand.decay;
            let tail = if p > dim as f64 {
                let a = decay_amplitude(integrand.f, &origin, *r, p);
                a * sphere_area(dim) * r.powf(dim as f64 - p) / (p - dim as f64)
            } else {
                f64::INFINITY
            };
            (*r, tail)
        }
        (None, Truncation::Auto) => {
            let p = integrand.decay;
            let n = dim as f64;
            if !(p > n) {
                return Err(Error::InvalidSpec(format!(
                    "auto truncation needs decay exponent > N = {dim}, got {p}"
                )));
            }
            let r1 = 2.0 * peak_reach;
            let a = decay_amplitude(integrand.f, &origin, r1, p);
            let omega = sphere_area(dim);
            let budget = spec.abs_tol / 10.0;
            let r = if a == 0.0 { r1 } else { (a * omega / ((p - n) * budget)).powf(1.0 / (p - n)).max(r1) };
            (r, a * omega * r.powf(n - p) / (p - n))
        }
    };

    let (lo, hi) = chart.domain(radius);
    let rd = chart.reduced_dim();
    let mut features: Vec<Vec<(f64, f64)>> = vec![Vec::new(); rd];
    for p in peaks {
        let (c, w) = chart.reduce_peak(p);
        for i in 0..rd {
            features[i].push((c[i], w[i]));
        }
    }
    // full-space boxes multiply breakpoints across many axes: grade coarsely
    let (coarse, ratio) = if rd >= 4 { (1, 8.0) } else { (2, 2.0) };
    let breaks: Vec<Vec<f64>> = (0..rd).map(|i| graded_breaks(lo[i], hi[i], &features[i], coarse, ratio)).collect();
    let mut initial = vec![(Vec::new(), Vec::new())];
    for b in &breaks {
        let mut next = Vec::with_capacity(initial.len() * b.len());
        for (l, h) in &initial {
            for w in b.windows(2) {
                let mut l2: Vec<f64> = l.clone();
                let mut h2: Vec<f64> = h.clone();
                l2.push(w[0]);
                h2.push(w[1]);
                next.push((l2, h2));
            }
        }
        initial = next;
    }
    if initial.len() > spec.max_subdivisions {
        return Err(Error::InvalidSpec(format!(
            "initial mesh of {} cells exceeds max_subdivisions = {}",
            initial.len(),
            spec.max_subdivisions
        )));
    }

    let engine = Engine {
        chart: &chart,
        f: integrand.f,
        gm: if rd >= 2 { Some(GenzMalik::new(rd)) } else { None },
    };
    let (value, error, cells) = adapt(&engine, initial, spec.rel_tol, spec.abs_tol, tail, spec.max_subdivisions)?;
    Ok(IntegralResult { value, error_estimate: error + tail, cells_used: cells, truncation_bound: tail })
}

fn check_invariance(integrand: &Integrand<'_>, group: &SymmetryGroup) -> Result<()> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let els = group.elements();
    for _ in 0..8 {
        let y: Point = (0..integrand.dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f0 = (integrand.f)(&y);
        let g = &els[rng.random_range(0..els.len())];
        let f1 = (integrand.f)(&group.apply(g, &y));
        if (f0 - f1).abs() > 1e-9 * (f0.abs() + f1.abs()) + 1e-300 {
            return Err(Error::InvalidSpec("integrand is not invariant under the declared symmetry".into()));
        }
    }
    Ok(())
}

/// Adaptive 1-d integral of `g` over `[lo, hi]` with interior breakpoints.
pub fn integrate_interval(
    g: &(dyn Fn(f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> Result<IntegralResult> {
    let f = |y: &[f64]| g(y[0]);
    let chart = Chart { dim: 1, reduction: Reduction::FullNd, frame: None, rest_axis: 0 };
    let engine = Engine { chart: &chart, f: &f, gm: None };
    let mut b: Vec<f64> = breaks.iter().cloned().filter(|x| *x > lo && *x < hi).collect();
    b.push(lo);
    b.push(hi);
    b.sort_by(|x, y| x.total_cmp(y));
    b.dedup();
    let initial = b.windows(2).map(|w| (vec![w[0]], vec![w[1]])).collect();
    let (value, error, cells) = adapt(&engine, initial, rel_tol, abs_tol, 0.0, max_cells)?;
    Ok(IntegralResult { value, error_estimate: error, cells_used: cells, truncation_bound: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{closed_moments, radial_moment, Bubble, KernelKind};
    use crate::symmetry::PolygonConfig;

    #[test]
    fn radial_moment_by_quadrature() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-5);
        let spec = QuadratureSpec::radial(vec![0.0; 5]).with_tol(1e-10, 1e-12);
        let r = integrate_volume(&Integrand::new(5, &f, 10.0), &spec, None).unwrap();
        let want = radial_moment(5, 5.0, 0.0).unwrap();
        assert!((r.value - want).abs() < 1e-9 * want, "{} vs {want}", r.value);
        assert!(r.error_estimate >= r.truncation_bound);
    }

    #[test]
    fn axial_matches_radial_for_radial_fields() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-6);
        let want = radial_moment(6, 6.0, 0.0).unwrap();
        let spec = QuadratureSpec::axial(vec![0.0; 6], crate::point::unit(6, 0)).with_tol(1e-8, 1e-10);
        let r = integrate_volume(&Integrand::new(6, &f, 12.0), &spec, None).unwrap();
        assert!((r.value - want).abs() < 1e-7 * want);
        // off-center origin: field is still axial about the line through 0
        let mut o = vec![0.0; 6];
        o[0] = 0.7;
        let spec = QuadratureSpec::axial(o, crate::point::unit(6, 0)).with_tol(1e-8, 1e-10);
        let r = integrate_volume(&Integrand::new(6, &f, 12.0), &spec, None).unwrap();
        assert!((r.value - want).abs() < 1e-7 * want);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let dim = 5;
        let b = Bubble::standard(dim);
        let p = crate::bubble::nonlinear_power(dim);
        let f = |y: &[f64]| b.eval_kernel(KernelKind::Psi(0), y).unwrap() * b.eval(y).powf(p);
        let abs_tol = 1e-8;
        let spec = QuadratureSpec::axial(vec![0.0; dim], crate::point::unit(dim, 0)).with_tol(1e-8, abs_tol);
        let r = integrate_volume(&Integrand::new(dim, &f, 2.0 * dim as f64 + 1.0), &spec, None).unwrap();
        assert!(r.value.abs() < abs_tol);
    }

    #[test]
    fn cylinder_matches_full_space_and_closed_form() {
        let dim = 5;
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-5);
        let want = radial_moment(dim, 5.0, 0.0).unwrap();
        let spec = QuadratureSpec::cylinder((0, 1), 4).with_tol(1e-7, 1e-10);
        let c = integrate_volume(&Integrand::new(dim, &f, 10.0), &spec, None).unwrap();
        assert!((c.value - want).abs() < 1e-6 * want, "{} vs {want}", c.value);
        let spec = QuadratureSpec::default().with_tol(2e-4, 1e-5);
        let full = integrate_volume(
            &Integrand::new(dim, &f, 10.0).with_peaks(vec![Peak::new(vec![0.0; 5], 1.0)]),
            &spec,
            None,
        )
        .unwrap();
        assert!((full.value - c.value).abs() <= full.error_estimate + c.error_estimate);
    }

    #[test]
    fn tower_mass_is_additive_when_separated() {
        let dim = 5;
        let k = 8;
        let mu = 30.0;
        let cfg = PolygonConfig::outer(k, 5.0, mu, dim);
        let tower = crate::bubble::Tower::from_polygon(&cfg).unwrap();
        let spacing = crate::symmetry::chord(5.0, k, 1);
        assert!(mu * spacing > 50.0);
        let two_star = crate::special::critical_exponent(dim);
        let f = |y: &[f64]| tower.eval(y).powf(two_star);
        let peaks = vec![Peak::new(cfg.vertex(0), 1.0 / mu)];
        let spec = QuadratureSpec::cylinder((0, 1), k).with_tol(1e-5, 1e-6);
        let group = crate::symmetry::SymmetryGroup::h_class(k, dim);
        let r = integrate_volume(&Integrand::new(dim, &f, 2.0 * dim as f64).with_peaks(peaks), &spec, Some(&group)).unwrap();
        let want = k as f64 * closed_moments(dim).unwrap().s_mass;
        assert!(((r.value - want) / want).abs() < 0.01, "{} vs {want}", r.value);
    }

    #[test]
    fn asymmetric_field_rejected() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-5) * (1.0 + 0.1 * y[1]);
        let spec = QuadratureSpec::cylinder((0, 1), 4);
        let group = crate::symmetry::SymmetryGroup::h_class(4, 5);
        let r = integrate_volume(&Integrand::new(5, &f, 9.0), &spec, Some(&group));
        assert!(matches!(r, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn slow_decay_rejected_for_auto() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powf(-2.0);
        let spec = QuadratureSpec::radial(vec![0.0; 5]);
        assert!(matches!(integrate_volume(&Integrand::new(5, &f, 4.0), &spec, None), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn budget_exhaustion_reports_best_value() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-5);
        let mut spec = QuadratureSpec::cylinder((0, 1), 0).with_tol(1e-14, 1e-16);
        spec.max_subdivisions = 3000;
        match integrate_volume(&Integrand::new(5, &f, 10.0), &spec, None) {
            Err(Error::ConvergenceFailure { value, cells, .. }) => {
                let want = radial_moment(5, 5.0, 0.0).unwrap();
                assert!(cells >= 3000);
                assert!((value - want).abs() < 1e-3 * want);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let f = |y: &[f64]| (1.0 + crate::point::norm_sq(y)).powi(-5) * (1.0 + y[0] * y[0]);
        let spec = QuadratureSpec::cylinder((0, 1), 2).with_tol(1e-6, 1e-8);
        let a = integrate_volume(&Integrand::new(5, &f, 8.0), &spec, None).unwrap();
        let b = integrate_volume(&Integrand::new(5, &f, 8.0), &spec, None).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }

    #[test]
    fn interval_integration() {
        let g = |x: f64| x.sqrt();
        let r = integrate_interval(&g, 0.0, 4.0, &[1.0], 1e-12, 1e-14, 10_000).unwrap();
        assert!((r.value - 16.0 / 3.0).abs() < 1e-10);
    }
}
