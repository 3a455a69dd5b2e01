//! Aubin-Talenti bubbles `U_{x,mu}(y) = c_N mu^{(N-2)/2} (1 + mu^2 |y-x|^2)^{-(N-2)/2}`,
//! their derivative kernels and sums of bubbles.

pub mod moments;

pub use moments::{closed_moments, quadrature_moments, radial_moment, MomentTable};

use crate::error::{Error, Result};
use crate::point::{dot, norm_sq, sub, Point};
use crate::special::{bubble_constant, critical_exponent};
use crate::symmetry::PolygonConfig;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A smooth scalar field on R^N with closed-form gradient and Laplacian.
pub trait SmoothField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn grad(&self, y: &[f64]) -> Point;
    fn laplacian(&self, y: &[f64]) -> f64;
}

pub type FieldRef = Arc<dyn SmoothField>;

#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    pub center: Point,
    pub scale: f64,
    pub dim: usize,
    cn: f64,
    /// Polygon the center belongs to, and its vertex index. Needed for the
    /// radial-location kernel.
    pub parent: Option<(PolygonConfig, usize)>,
}

/// Derivative kernels of a bubble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `dU/dmu`; at the standard bubble this is `psi_0`.
    Psi0,
    /// `dU/dy_i` (zero-based axis); at the standard bubble this is `psi_{i+1}`.
    Psi(usize),
    /// Derivative with respect to the polygon radius, center moving along its
    /// radial direction.
    Z1,
    /// Derivative with respect to the scale.
    Z2,
}

impl Bubble {
    pub fn new(center: Point, scale: f64) -> Self {
        let dim = center.len();
        assert!(dim >= 3, "bubbles need N >= 3");
        assert!(scale > 0.0, "bubble scale must be positive");
        Bubble { center, scale, dim, cn: bubble_constant(dim), parent: None }
    }

    pub fn standard(dim: usize) -> Self {
        Bubble::new(vec![0.0; dim], 1.0)
    }

    pub fn on_polygon(config: &PolygonConfig, j: usize) -> Self {
        let mut b = Bubble::new(config.vertex(j), config.scale);
        b.parent = Some((config.clone(), j));
        b
    }

    pub fn cn(&self) -> f64 {
        self.cn
    }

    fn a(&self) -> f64 {
        (self.dim as f64 - 2.0) / 2.0
    }

    /// `(d, mu^2 |d|^2, q)` with `d = y - x`, `q = 1 + mu^2|d|^2`.
    fn geometry(&self, y: &[f64]) -> (Point, f64, f64) {
        let d = sub(y, &self.center);
        let s = self.scale * self.scale * norm_sq(&d);
        (d, s, 1.0 + s)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let (_, _, q) = self.geometry(y);
        let a = self.a();
        self.cn * self.scale.powf(a) * q.powf(-a)
    }

    pub fn eval_grad(&self, y: &[f64]) -> Point {
        let (d, _, q) = self.geometry(y);
        let (n, a, mu) = (self.dim as f64, self.a(), self.scale);
        let f = -(n - 2.0) * self.cn * mu.powf(a + 2.0) * q.powf(-a - 1.0);
        d.iter().map(|di| f * di).collect()
    }

    pub fn eval_hessian(&self, y: &[f64]) -> Vec<Point> {
        let (d, _, q) = self.geometry(y);
        let (n, a, mu) = (self.dim as f64, self.a(), self.scale);
        let pre = -(n - 2.0) * self.cn * mu.powf(a + 2.0);
        let q0 = q.powf(-n / 2.0);
        let q1 = n * mu * mu * q.powf(-n / 2.0 - 1.0);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| pre * (if i == j { q0 } else { 0.0 } - q1 * d[i] * d[j]))
                    .collect()
            })
            .collect()
    }

    pub fn eval_laplacian(&self, y: &[f64]) -> f64 {
        let (_, _, q) = self.geometry(y);
        let (n, a, mu) = (self.dim as f64, self.a(), self.scale);
        -n * (n - 2.0) * self.cn * mu.powf(a + 2.0) * q.powf(-n / 2.0 - 1.0)
    }

    /// `dU/dmu`.
    pub fn d_scale(&self, y: &[f64]) -> f64 {
        let (_, s, q) = self.geometry(y);
        let (a, mu) = (self.a(), self.scale);
        a * self.cn * mu.powf(a - 1.0) * q.powf(-a - 1.0) * (1.0 - s)
    }

    pub fn d_scale_grad(&self, y: &[f64]) -> Point {
        let (d, s, q) = self.geometry(y);
        let (a, mu) = (self.a(), self.scale);
        let f = -2.0 * a * self.cn * mu.powf(a + 1.0) * q.powf(-a - 2.0) * ((a + 2.0) - a * s);
        d.iter().map(|di| f * di).collect()
    }

    pub fn d_scale_laplacian(&self, y: &[f64]) -> f64 {
        let (_, s, q) = self.geometry(y);
        let (n, mu) = (self.dim as f64, self.scale);
        -n * (n - 2.0) * (n + 2.0) / 2.0 * self.cn * mu.powf(n / 2.0) * q.powf(-(n + 4.0) / 2.0) * (1.0 - s)
    }

    /// `grad(Delta U)`, used for the Laplacian of translation kernels.
    fn grad_laplacian(&self, y: &[f64]) -> Point {
        let (d, _, q) = self.geometry(y);
        let (n, mu) = (self.dim as f64, self.scale);
        let f = n * (n - 2.0) * (n + 2.0) * self.cn * mu.powf((n + 6.0) / 2.0) * q.powf(-(n + 4.0) / 2.0);
        d.iter().map(|di| f * di).collect()
    }

    fn radial(&self) -> Result<Point> {
        match &self.parent {
            Some((cfg, j)) => Ok(cfg.radial_direction(*j)),
            None => Err(Error::MissingContext(
                "radial-location kernel needs the bubble's parent polygon".into(),
            )),
        }
    }

    pub fn eval_kernel(&self, kind: KernelKind, y: &[f64]) -> Result<f64> {
        Ok(match kind {
            KernelKind::Psi0 | KernelKind::Z2 => self.d_scale(y),
            KernelKind::Psi(i) => self.eval_grad(y)[i],
            KernelKind::Z1 => -dot(&self.eval_grad(y), &self.radial()?),
        })
    }

    pub fn kernel_grad(&self, kind: KernelKind, y: &[f64]) -> Result<Point> {
        Ok(match kind {
            KernelKind::Psi0 | KernelKind::Z2 => self.d_scale_grad(y),
            KernelKind::Psi(i) => self.eval_hessian(y).swap_remove(i),
            KernelKind::Z1 => {
                let e = self.radial()?;
                self.eval_hessian(y).iter().map(|row| -dot(row, &e)).collect()
            }
        })
    }

    pub fn kernel_laplacian(&self, kind: KernelKind, y: &[f64]) -> Result<f64> {
        Ok(match kind {
            KernelKind::Psi0 | KernelKind::Z2 => self.d_scale_laplacian(y),
            KernelKind::Psi(i) => self.grad_laplacian(y)[i],
            KernelKind::Z1 => -dot(&self.grad_laplacian(y), &self.radial()?),
        })
    }

    /// The kernel as a standalone field.
    pub fn kernel_field(&self, kind: KernelKind) -> Result<KernelField> {
        if kind == KernelKind::Z1 {
            self.radial()?;
        }
        if let KernelKind::Psi(i) = kind {
            if i >= self.dim {
                return Err(Error::InvalidConfig(format!("axis {i} out of range for N = {}", self.dim)));
            }
        }
        Ok(KernelField { bubble: self.clone(), kind })
    }
}

impl SmoothField for Bubble {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y)
    }
    fn grad(&self, y: &[f64]) -> Point {
        self.eval_grad(y)
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.eval_laplacian(y)
    }
}

#[derive(Debug, Clone)]
pub struct KernelField {
    pub bubble: Bubble,
    pub kind: KernelKind,
}

impl SmoothField for KernelField {
    fn dim(&self) -> usize {
        self.bubble.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.bubble.eval_kernel(self.kind, y).expect("validated at construction")
    }
    fn grad(&self, y: &[f64]) -> Point {
        self.bubble.kernel_grad(self.kind, y).expect("validated at construction")
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.bubble.kernel_laplacian(self.kind, y).expect("validated at construction")
    }
}

/// Linear combination `sum c_i f_i`.
#[derive(Clone)]
pub struct Combination {
    pub dim: usize,
    pub terms: Vec<(f64, FieldRef)>,
}

impl Combination {
    pub fn new(dim: usize) -> Self {
        Combination { dim, terms: Vec::new() }
    }

    pub fn with(mut self, c: f64, f: FieldRef) -> Self {
        assert_eq!(f.dim(), self.dim);
        self.terms.push((c, f));
        self
    }
}

impl SmoothField for Combination {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(y)).sum()
    }
    fn grad(&self, y: &[f64]) -> Point {
        let mut g = vec![0.0; self.dim];
        for (c, f) in &self.terms {
            for (gi, fi) in g.iter_mut().zip(f.grad(y)) {
                *gi += c * fi;
            }
        }
        g
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.laplacian(y)).sum()
    }
}

/// Sum of bubbles plus an optional background field.
#[derive(Clone)]
pub struct Tower {
    pub dim: usize,
    pub bubbles: Vec<Bubble>,
    pub background: Option<FieldRef>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tower")
            .field("dim", &self.dim)
            .field("bubbles", &self.bubbles.len())
            .field("background", &self.background.is_some())
            .finish()
    }
}

impl Tower {
    pub fn new(dim: usize, bubbles: Vec<Bubble>) -> Self {
        assert!(bubbles.iter().all(|b| b.dim == dim), "bubbles must share the dimension");
        Tower { dim, bubbles, background: None }
    }

    pub fn from_polygon(config: &PolygonConfig) -> Result<Self> {
        config.validate()?;
        Ok(Tower::new(config.dim, (0..config.count).map(|j| Bubble::on_polygon(config, j)).collect()))
    }

    /// Bubbles of two polygons summed.
    pub fn glued(outer: &PolygonConfig, inner: &PolygonConfig) -> Result<Self> {
        let mut t = Tower::from_polygon(outer)?;
        t.bubbles.extend(Tower::from_polygon(inner)?.bubbles);
        Ok(t)
    }

    pub fn with_background(mut self, background: FieldRef) -> Self {
        assert_eq!(background.dim(), self.dim);
        self.background = Some(background);
        self
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let s: f64 = self.bubbles.iter().map(|b| b.eval(y)).sum();
        s + self.background.as_ref().map_or(0.0, |f| f.value(y))
    }

    pub fn eval_grad(&self, y: &[f64]) -> Point {
        let mut g = self.background.as_ref().map_or_else(|| vec![0.0; self.dim], |f| f.grad(y));
        for b in &self.bubbles {
            for (gi, bi) in g.iter_mut().zip(b.eval_grad(y)) {
                *gi += bi;
            }
        }
        g
    }

    pub fn eval_laplacian(&self, y: &[f64]) -> f64 {
        let s: f64 = self.bubbles.iter().map(|b| b.eval_laplacian(y)).sum();
        s + self.background.as_ref().map_or(0.0, |f| f.laplacian(y))
    }
}

impl SmoothField for Tower {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y)
    }
    fn grad(&self, y: &[f64]) -> Point {
        self.eval_grad(y)
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.eval_laplacian(y)
    }
}

/// `2* - 1 = (N+2)/(N-2)`.
pub fn nonlinear_power(dim: usize) -> f64 {
    critical_exponent(dim) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::PolygonConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Point {
        (0..dim).map(|_| rng.random_range(-spread..spread)).collect()
    }

    #[test]
    fn value_at_center_is_cn() {
        let b = Bubble::standard(5);
        assert!((b.eval(&[0.0; 5]) - 15f64.powf(0.75)).abs() < 1e-13);
    }

    #[test]
    fn scaling_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let dim = rng.random_range(5..9);
            let mu: f64 = rng.random_range(0.1..10.0);
            let y = random_point(&mut rng, dim, 2.0);
            let lhs = Bubble::new(vec![0.0; dim], mu).eval(&y);
            let my: Point = y.iter().map(|v| v * mu).collect();
            let rhs = mu.powf((dim as f64 - 2.0) / 2.0) * Bubble::standard(dim).eval(&my);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }
    }

    #[test]
    fn solves_critical_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let dim = rng.random_range(5..10);
            let b = Bubble::new(random_point(&mut rng, dim, 1.0), rng.random_range(0.2..5.0));
            let y = random_point(&mut rng, dim, 2.0);
            let u = b.eval(&y);
            let rhs = u.powf(nonlinear_power(dim));
            assert!((-b.eval_laplacian(&y) - rhs).abs() <= 1e-10 * rhs);
        }
    }

    fn fd_grad(f: impl Fn(&[f64]) -> f64, y: &[f64], h: f64) -> Point {
        (0..y.len())
            .map(|i| {
                let mut p = y.to_vec();
                let mut m = y.to_vec();
                p[i] += h;
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    fn fd_laplacian(f: impl Fn(&[f64]) -> f64, y: &[f64], h: f64) -> f64 {
        let f0 = f(y);
        (0..y.len())
            .map(|i| {
                let mut p = y.to_vec();
                let mut m = y.to_vec();
                p[i] += h;
                m[i] -= h;
                (f(&p) - 2.0 * f0 + f(&m)) / (h * h)
            })
            .sum()
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = PolygonConfig::inner(6, 1.3, 2.0, 7);
        let b = Bubble::on_polygon(&cfg, 1);
        for _ in 0..20 {
            let y: Point = b.center.iter().map(|c| c + rng.random_range(-0.6..0.6)).collect();
            let g = b.eval_grad(&y);
            let g_fd = fd_grad(|z| b.eval(z), &y, 1e-5);
            for (a, c) in g.iter().zip(&g_fd) {
                assert!((a - c).abs() < 1e-6 * (1.0 + a.abs()));
            }
            for kind in [KernelKind::Psi0, KernelKind::Psi(0), KernelKind::Psi(3), KernelKind::Z1] {
                let f = |z: &[f64]| b.eval_kernel(kind, z).unwrap();
                let g = b.kernel_grad(kind, &y).unwrap();
                let g_fd = fd_grad(f, &y, 1e-5);
                for (a, c) in g.iter().zip(&g_fd) {
                    assert!((a - c).abs() < 1e-5 * (1.0 + a.abs()), "{kind:?}: {a} vs {c}");
                }
                let l = b.kernel_laplacian(kind, &y).unwrap();
                let l_fd = fd_laplacian(f, &y, 1e-3);
                assert!((l - l_fd).abs() < 1e-4 * (1.0 + l.abs()), "{kind:?}: {l} vs {l_fd}");
            }
        }
    }

    #[test]
    fn scale_kernel_matches_difference_quotient() {
        let cfg = PolygonConfig::inner(4, 1.0, 3.0, 7);
        let b = Bubble::on_polygon(&cfg, 0);
        let h = 1e-4;
        let up = Bubble::new(b.center.clone(), b.scale + h);
        let dn = Bubble::new(b.center.clone(), b.scale - h);
        for y in [vec![0.0, 0.0, 1.1, 0.1, 0.0, 0.2, 0.0], vec![0.3, 0.0, 0.7, -0.2, 0.1, 0.0, 0.0]] {
            let fd = (up.eval(&y) - dn.eval(&y)) / (2.0 * h);
            let z2 = b.eval_kernel(KernelKind::Z2, &y).unwrap();
            assert!((z2 - fd).abs() < 1e-6 * z2.abs());
        }
        // radial kernel against moving the polygon radius
        let moved = |t: f64| Bubble::on_polygon(&PolygonConfig::inner(4, t, 3.0, 7), 0);
        let y = [0.1, 0.0, 1.2, 0.3, 0.0, 0.0, 0.1];
        let fd = (moved(1.0 + h).eval(&y) - moved(1.0 - h).eval(&y)) / (2.0 * h);
        let z1 = b.eval_kernel(KernelKind::Z1, &y).unwrap();
        assert!((z1 - fd).abs() < 1e-6 * z1.abs());
    }

    #[test]
    fn psi0_at_origin() {
        for dim in 5..10 {
            let b = Bubble::standard(dim);
            let want = (dim as f64 - 2.0) / 2.0 * b.cn();
            assert!((b.eval_kernel(KernelKind::Psi0, &vec![0.0; dim]).unwrap() - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn translation_kernel_is_odd() {
        let b = Bubble::standard(6);
        let y = [0.3, -0.5, 0.2, 0.1, 0.0, 0.4];
        for i in 0..6 {
            let mut z = y.to_vec();
            z[i] = -z[i];
            let a = b.eval_kernel(KernelKind::Psi(i), &y).unwrap();
            let c = b.eval_kernel(KernelKind::Psi(i), &z).unwrap();
            assert!((a + c).abs() < 1e-14);
        }
    }

    #[test]
    fn z1_needs_parent() {
        let b = Bubble::standard(5);
        assert!(matches!(b.eval_kernel(KernelKind::Z1, &[0.0; 5]), Err(Error::MissingContext(_))));
    }

    #[test]
    fn tower_evaluation() {
        let cfg = PolygonConfig::outer(6, 2.0, 4.0, 5);
        let t = Tower::from_polygon(&cfg).unwrap();
        let x = crate::symmetry::build_polygon(&cfg).unwrap();
        assert!((t.eval(&x[0]) - t.eval(&x[1])).abs() < 1e-12 * t.eval(&x[0]));
        let single = Tower::new(5, vec![Bubble::new(x[0].clone(), 4.0)]);
        let y = [0.3, 0.1, 0.0, 0.2, 0.0];
        assert_eq!(single.eval(&y), Bubble::new(x[0].clone(), 4.0).eval(&y));
    }

    #[test]
    fn two_bubble_tail() {
        let dim = 5;
        let (mu, d) = (40.0, 2.0);
        let b1 = Bubble::new(vec![0.0; dim], mu);
        let mut c2 = vec![0.0; dim];
        c2[0] = d;
        let b2 = Bubble::new(c2, mu);
        let t = Tower::new(dim, vec![b1.clone(), b2]);
        let peak = b1.cn() * mu.powf(1.5);
        let tail = b1.cn() * mu.powf(1.5) * (1.0 + (mu * d).powi(2)).powf(-1.5);
        assert!((t.eval(&[0.0; 5]) - peak - tail).abs() < 1e-12 * peak);
        assert!(tail / peak < 2.0 * (mu * d).powi(-3));
    }
}
