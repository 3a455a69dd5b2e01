//! Stationary points of a function of `(t, lambda)` inside a rectangular
//! window, by Newton iteration on finite-difference derivatives.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Window {
    /// `(r0 - delta, r0 + delta) x [l0 n^e, l1 n^e]`, `e = (N-2)/(N-4)`.
    pub fn around(r0: f64, delta: f64, l0: f64, l1: f64, n: usize, dim: usize) -> Self {
        let e = (dim as f64 - 2.0) / (dim as f64 - 4.0);
        let s = (n as f64).powf(e);
        Window { t_min: r0 - delta, t_max: r0 + delta, lambda_min: l0 * s, lambda_max: l1 * s }
    }

    fn center(&self) -> (f64, f64) {
        (0.5 * (self.t_min + self.t_max), 0.5 * (self.lambda_min + self.lambda_max))
    }

    fn half(&self) -> (f64, f64) {
        (0.5 * (self.t_max - self.t_min), 0.5 * (self.lambda_max - self.lambda_min))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: f64,
    pub lambda: f64,
    pub value: f64,
    pub classification: Classification,
    /// Hessian in `(t, lambda)`, row-major.
    pub hessian: [f64; 4],
    /// Gradient norm in window-scaled coordinates at the final iterate.
    pub gradient_norm: f64,
    pub iterations: usize,
}

const H: f64 = 1e-3;

fn derivatives(g: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> (Vector2<f64>, Matrix2<f64>) {
    let d1 = |f: &dyn Fn(f64) -> f64| (-f(2.0 * H) + 8.0 * f(H) - 8.0 * f(-H) + f(-2.0 * H)) / (12.0 * H);
    let d2 = |f: &dyn Fn(f64) -> f64| {
        (-f(2.0 * H) + 16.0 * f(H) - 30.0 * f(0.0) + 16.0 * f(-H) - f(-2.0 * H)) / (12.0 * H * H)
    };
    let fu = |s: f64| g(u + s, v);
    let fv = |s: f64| g(u, v + s);
    let mixed = (g(u + H, v + H) - g(u + H, v - H) - g(u - H, v + H) + g(u - H, v - H)) / (4.0 * H * H);
    let grad = Vector2::new(d1(&fu), d1(&fv));
    let hess = Matrix2::new(d2(&fu), mixed, mixed, d2(&fv));
    (grad, hess)
}

fn classify(h: &Matrix2<f64>) -> Classification {
    let e = h.symmetric_eigenvalues();
    let scale = e[0].abs().max(e[1].abs());
    let tiny = 1e-9 * scale;
    if scale == 0.0 || e[0].abs() <= tiny || e[1].abs() <= tiny {
        Classification::Degenerate
    } else if e[0] > 0.0 && e[1] > 0.0 {
        Classification::Minimum
    } else if e[0] < 0.0 && e[1] < 0.0 {
        Classification::Maximum
    } else {
        Classification::Saddle
    }
}

/// Newton iteration from a few interior starts in window-scaled coordinates.
/// `tol` bounds the last Newton step in those coordinates, unless the steps
/// stall at the finite-difference noise floor first. A start whose
/// iterates leave the window is abandoned; if every start does, the result
/// is a boundary-hit error.
pub fn find_critical_point(f: &dyn Fn(f64, f64) -> f64, window: &Window, tol: f64) -> Result<CriticalPoint> {
    let (tc, lc) = window.center();
    let (ht, hl) = window.half();
    if !(ht > 0.0 && hl > 0.0) {
        return Err(Error::InvalidConfig("critical-point window must have positive extent".into()));
    }
    let g = |u: f64, v: f64| f(tc + ht * u, lc + hl * v);
    let starts = [(0.0, 0.0), (0.5, 0.5), (-0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)];
    let mut last_reason = String::new();
    'starts: for (u0, v0) in starts {
        let (mut u, mut v) = (u0, v0);
        let mut prev = f64::INFINITY;
        for it in 1..=100 {
            let (grad, hess) = derivatives(&g, u, v);
            let step = match hess.try_inverse() {
                Some(inv) => -(inv * grad),
                None => {
                    last_reason = "singular Hessian".into();
                    continue 'starts;
                }
            };
            // damp long steps to half the window
            let damp = (0.5 / step.amax()).min(1.0);
            let (su, sv) = (step[0] * damp, step[1] * damp);
            u += su;
            v += sv;
            if u.abs() > 1.0 || v.abs() > 1.0 {
                last_reason = format!("iterate left the window at t = {}, lambda = {}", tc + ht * u, lc + hl * v);
                continue 'starts;
            }
            let size = su.abs().max(sv.abs());
            // below 1e-6 a step that fails to halve means the
            // finite-difference noise floor has been reached
            let stalled = size < 1e-6 && size > 0.5 * prev;
            prev = size;
            if size < tol || stalled {
                let (grad, hess) = derivatives(&g, u, v);
                let unscale = Matrix2::new(1.0 / (ht * ht), 1.0 / (ht * hl), 1.0 / (ht * hl), 1.0 / (hl * hl));
                let h = hess.component_mul(&unscale);
                return Ok(CriticalPoint {
                    t: tc + ht * u,
                    lambda: lc + hl * v,
                    value: g(u, v),
                    classification: classify(&hess),
                    hessian: [h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]],
                    gradient_norm: grad.norm(),
                    iterations: it,
                });
            }
        }
        last_reason = "Newton iteration did not settle".into();
    }
    Err(Error::BoundaryHit(last_reason))
}
