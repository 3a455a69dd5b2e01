//! Surface integrals over spheres in R^N and volume integrals over balls.
//!
//! The product rule uses hyperspherical angles `phi_1..phi_{N-2}` in
//! `[0, pi]` and `psi` in `[0, 2 pi)`. After `u_i = cos phi_i`, angle `i`
//! carries the weight `(1 - u^2)^{(N-2-i)/2}`, handled by Gauss-Gegenbauer
//! nodes; `psi` uses the trapezoid rule.

use super::rules::gauss_gegenbauer;
use super::{integrate_interval, pairwise_sum, IntegralResult, QuadratureSpec};
use crate::error::{Error, Result};
use crate::point::{householder_to, norm, reflect, Point};
use crate::special::sphere_area;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SphereRule {
    /// Product rule for N <= 7, Monte Carlo above.
    #[default]
    Auto,
    Product,
    /// Antithetic Monte Carlo with `samples` pairs.
    MonteCarlo { samples: usize },
}

const MAX_PRODUCT_POINTS: f64 = 2.5e7;
const MC_DEFAULT_SAMPLES: usize = 1 << 18;

fn product_rule(
    dim: usize,
    m: usize,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    to_space: &(dyn Fn(&[f64], &mut [f64]) + Sync),
) -> f64 {
    let levels: Vec<(Vec<f64>, Vec<f64>)> =
        (1..=dim - 2).map(|i| gauss_gegenbauer(m, (dim - 2 - i) as f64 / 2.0)).collect();
    let np = 2 * m;
    let trig: Vec<(f64, f64)> = (0..np).map(|j| (2.0 * PI * (j as f64 + 0.5) / np as f64).sin_cos()).collect();
    let wpsi = 2.0 * PI / np as f64;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        level: usize,
        s: f64,
        w: f64,
        x: &mut [f64],
        y: &mut [f64],
        levels: &[(Vec<f64>, Vec<f64>)],
        trig: &[(f64, f64)],
        wpsi: f64,
        f: &(dyn Fn(&[f64]) -> f64 + Sync),
        to_space: &(dyn Fn(&[f64], &mut [f64]) + Sync),
    ) -> f64 {
        let dim = x.len();
        if level == dim - 2 {
            let mut acc = 0.0;
            for &(sn, cs) in trig {
                x[dim - 2] = s * cs;
                x[dim - 1] = s * sn;
                to_space(x, y);
                acc += f(y);
            }
            return acc * w * wpsi;
        }
        let (u, wu) = &levels[level];
        let mut acc = 0.0;
        for (ui, wi) in u.iter().zip(wu) {
            x[level] = s * ui;
            let s2 = s * (1.0 - ui * ui).max(0.0).sqrt();
            acc += rec(level + 1, s2, w * wi, x, y, levels, trig, wpsi, f, to_space);
        }
        acc
    }

    let (u0, w0) = &levels[0];
    let partial: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            x[0] = u0[i];
            let s = (1.0 - u0[i] * u0[i]).max(0.0).sqrt();
            rec(1, s, w0[i], &mut x, &mut y, &levels, &trig, wpsi, f, to_space)
        })
        .collect();
    pairwise_sum(&partial)
}

fn monte_carlo(
    dim: usize,
    samples: usize,
    seed: u64,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    to_space: &(dyn Fn(&[f64], &mut [f64]) + Sync),
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Point> = (0..samples)
        .map(|_| {
            let g: Point = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = norm(&g);
            g.into_iter().map(|v| v / n).collect()
        })
        .collect();
    let vals: Vec<f64> = dirs
        .par_iter()
        .map(|x| {
            let mut y = vec![0.0; dim];
            to_space(x, &mut y);
            let a = f(&y);
            let xm: Point = x.iter().map(|v| -v).collect();
            to_space(&xm, &mut y);
            0.5 * (a + f(&y))
        })
        .collect();
    let n = samples as f64;
    let mean = pairwise_sum(&vals) / n;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0).max(1.0);
    (mean, 3.0 * (var / n).sqrt())
}

/// `int_{|y - center| = radius} f dS`.
pub fn integrate_sphere(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    center: &[f64],
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    integrate_sphere_aligned(f, center, radius, None, spec)
}

/// As [`integrate_sphere`], with the polar axis of the product rule turned
/// towards `pole` (useful when the integrand concentrates in one direction).
pub fn integrate_sphere_aligned(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    center: &[f64],
    radius: f64,
    pole: Option<&[f64]>,
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    spec.validate()?;
    let dim = center.len();
    if dim < 3 {
        return Err(Error::InvalidSpec("sphere quadrature needs N >= 3".into()));
    }
    if dim > 9 {
        return Err(Error::InvalidSpec(format!("sphere quadrature supports N <= 9, got {dim}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidSpec(format!("sphere radius must be positive, got {radius}")));
    }
    let house = match pole {
        Some(p) => {
            let n = norm(p);
            if !(n > 0.0) {
                return Err(Error::InvalidSpec("pole direction must be nonzero".into()));
            }
            householder_to(&p.iter().map(|v| v / n).collect::<Vec<_>>())
        }
        None => None,
    };
    let to_space = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        if let Some(v) = &house {
            reflect(v, y);
        }
        for (yi, ci) in y.iter_mut().zip(center) {
            *yi = ci + radius * *yi;
        }
    };
    let measure = radius.powi(dim as i32 - 1);
    let rule = match spec.sphere_rule {
        SphereRule::Auto if dim <= 7 => SphereRule::Product,
        SphereRule::Auto => SphereRule::MonteCarlo { samples: MC_DEFAULT_SAMPLES },
        r => r,
    };
    match rule {
        SphereRule::MonteCarlo { samples } => {
            let (mean, err) = monte_carlo(dim, samples.max(2), spec.seed, f, &to_space);
            let area = sphere_area(dim) * measure;
            let (value, error) = (area * mean, area * err);
            if error > spec.abs_tol.max(spec.rel_tol * value.abs()) {
                return Err(Error::ConvergenceFailure { value, error, cells: samples });
            }
            Ok(IntegralResult { value, error_estimate: error, cells_used: samples, truncation_bound: 0.0 })
        }
        _ => {
            let mut m = 6;
            let mut prev = product_rule(dim, m, f, &to_space);
            loop {
                let next_m = m + 4;
                let points = (next_m as f64).powi(dim as i32 - 2) * 2.0 * next_m as f64;
                if points > MAX_PRODUCT_POINTS {
                    return Err(Error::ConvergenceFailure {
                        value: prev * measure,
                        error: f64::INFINITY,
                        cells: m,
                    });
                }
                let cur = product_rule(dim, next_m, f, &to_space);
                let err = (cur - prev).abs() * measure;
                let value = cur * measure;
                if err <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
                    return Ok(IntegralResult { value, error_estimate: err, cells_used: next_m, truncation_bound: 0.0 });
                }
                m = next_m;
                prev = cur;
            }
        }
    }
}

/// `int_{B_radius(center)} f dy` as a radial integral of sphere integrals.
pub fn integrate_ball(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    center: &[f64],
    radius: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<IntegralResult> {
    let dim = center.len();
    let inner_err = Mutex::new(0.0f64);
    let failure = Mutex::new(None::<Error>);
    let shell = |r: f64| -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let mut inner = spec.clone();
        inner.abs_tol = spec.abs_tol / radius.powi(dim as i32).max(1e-300);
        match integrate_sphere(f, center, r, &inner) {
            Ok(res) => {
                let mut e = inner_err.lock().unwrap();
                *e = e.max(res.error_estimate / r.powi(dim as i32 - 1));
                res.value
            }
            Err(Error::ConvergenceFailure { value, .. }) => {
                failure.lock().unwrap().get_or_insert(Error::ConvergenceFailure {
                    value,
                    error: f64::INFINITY,
                    cells: 0,
                });
                value
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let outer = integrate_interval(&shell, 0.0, radius, breaks, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
    if let Some(e) = failure.into_inner().unwrap() {
        return match (e, outer) {
            (Error::ConvergenceFailure { .. }, Ok(o)) => Err(Error::ConvergenceFailure {
                value: o.value,
                error: f64::INFINITY,
                cells: o.cells_used,
            }),
            (e, _) => Err(e),
        };
    }
    let mut res = outer?;
    // shell errors integrated against r^{N-1} dr
    res.error_estimate += inner_err.into_inner().unwrap() * radius.powi(dim as i32) / dim as f64;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::Bubble;
    use crate::point::{dot, sub};

    #[test]
    fn surface_area() {
        for dim in 3..=7 {
            let spec = QuadratureSpec::default().with_tol(1e-12, 1e-12);
            let r = integrate_sphere(&|_: &[f64]| 1.0, &vec![0.3; dim], 2.0, &spec).unwrap();
            let want = sphere_area(dim) * 2f64.powi(dim as i32 - 1);
            assert!((r.value - want).abs() < 1e-12 * want, "N = {dim}");
        }
    }

    #[test]
    fn normal_components_cancel() {
        let c = [1.0, -0.5, 0.2, 0.0, 0.3];
        let spec = QuadratureSpec::default().with_tol(1e-10, 1e-12);
        for i in 0..5 {
            let f = |y: &[f64]| (y[i] - c[i]) / 0.7;
            let r = integrate_sphere(&f, &c, 0.7, &spec).unwrap();
            assert!(r.value.abs() < 1e-12);
        }
    }

    #[test]
    fn radial_flux_of_bubble() {
        let dim = 5;
        let b = Bubble::standard(dim);
        let delta = 0.8;
        let f = |y: &[f64]| dot(&b.eval_grad(y), y) / delta;
        let spec = QuadratureSpec::default().with_tol(1e-12, 1e-12);
        let r = integrate_sphere(&f, &[0.0; 5], delta, &spec).unwrap();
        let n = dim as f64;
        let want = sphere_area(dim) * delta.powi(4) * (-(n - 2.0) * b.cn() * delta * (1.0 + delta * delta).powf(-n / 2.0));
        assert!((r.value - want).abs() < 1e-11 * want.abs());
    }

    #[test]
    fn aligned_pole_agrees() {
        let c = [0.0; 5];
        let target = [0.0, 0.6, 0.8, 0.0, 0.0];
        let f = |y: &[f64]| (-30.0 * crate::point::norm_sq(&sub(y, &target))).exp();
        let spec = QuadratureSpec::default().with_tol(1e-9, 1e-14);
        let a = integrate_sphere_aligned(&f, &c, 1.0, Some(&target), &spec).unwrap();
        let b = integrate_sphere(&f, &c, 1.0, &spec).unwrap();
        assert!((a.value - b.value).abs() < 1e-8 * a.value);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_honest() {
        let dim = 6;
        let f = |y: &[f64]| 1.0 + y[0] * y[0];
        let mut spec = QuadratureSpec::default().with_tol(1e-2, 1e-2);
        spec.sphere_rule = SphereRule::MonteCarlo { samples: 20000 };
        spec.seed = 7;
        let a = integrate_sphere(&f, &[0.0; 6], 1.0, &spec).unwrap();
        let b = integrate_sphere(&f, &[0.0; 6], 1.0, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let want = sphere_area(dim) * (1.0 + 1.0 / dim as f64);
        assert!((a.value - want).abs() <= a.error_estimate);
    }

    #[test]
    fn ball_volume_and_moment() {
        let dim = 5;
        let spec = QuadratureSpec::default().with_tol(1e-10, 1e-12);
        let c = [0.5, 0.0, 0.0, 0.0, 0.0];
        let r = integrate_ball(&|_: &[f64]| 1.0, &c, 1.5, &[], &spec).unwrap();
        let want = sphere_area(dim) * 1.5f64.powi(5) / 5.0;
        assert!((r.value - want).abs() < 1e-10 * want);
        // int_B |y - c|^2 = omega R^{N+2} / (N + 2)
        let f = |y: &[f64]| crate::point::dist_sq(y, &c);
        let r = integrate_ball(&f, &c, 1.5, &[], &spec).unwrap();
        let want = sphere_area(dim) * 1.5f64.powi(7) / 7.0;
        assert!((r.value - want).abs() < 1e-10 * want);
    }
}
