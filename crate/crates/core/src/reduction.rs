//! Operators of the reduced problem for the glued configuration: the
//! linearized operators `L_k` and `Q_n`, the error `l_n` of the ansatz with its
//! three-term split, the nonlinear remainder `R_n`, the local kernel
//! projection and the Gram matrix of the orthogonality constraints.
//!
//! The outer tower stands in for `u_k`: the unperturbed sum of outer bubbles.

use crate::bubble::{nonlinear_power, Bubble, KernelKind, SmoothField, Tower};
use crate::energy::solve_balance;
use crate::error::{Error, Result};
use crate::norms::{weight_value, weighted_sup_norm, SearchBudget, SupNormEstimate, WeightKind, WeightSpec};
use crate::point::{dot, norm, unit, Point};
use crate::pohozaev::SymmetryHint;
use crate::potential::PotentialK;
use crate::quadrature::{integrate_ball, integrate_volume, Integrand, Peak, QuadratureSpec, Reduction};
use crate::regression::{loglog_fit, LineFit};
use crate::symmetry::PolygonConfig;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// `sign(x) |x|^p`.
fn spow(x: f64, p: f64) -> f64 {
    x.signum() * x.abs().powf(p)
}

/// Outer tower (optional) plus inner polygon of bubbles `U_{p_j, lambda}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluedConfig {
    pub outer: Option<PolygonConfig>,
    pub inner: PolygonConfig,
    pub potential: PotentialK,
    pub dim: usize,
}

impl GluedConfig {
    pub fn new(outer: Option<PolygonConfig>, inner: PolygonConfig, potential: PotentialK) -> Result<Self> {
        let dim = inner.dim;
        inner.validate()?;
        if let Some(o) = &outer {
            o.validate()?;
            if o.dim != dim {
                return Err(Error::InvalidConfig("outer and inner polygons must share the dimension".into()));
            }
        }
        Ok(GluedConfig { outer, inner, potential, dim })
    }

    /// Outer `k`-gon at `r0` with the balanced scale `mu = k mu_bar`, inner
    /// `n`-gon at radius `t` with scale `lambda`.
    pub fn balanced(k: usize, n: usize, t: f64, lambda: f64, potential: PotentialK, dim: usize) -> Result<Self> {
        let b = solve_balance(k, &potential, 1e-12, dim)?;
        let outer = PolygonConfig::outer(k, b.r0, b.mu, dim);
        GluedConfig::new(Some(outer), PolygonConfig::inner(n, t, lambda, dim), potential)
    }

    /// Evenness of both polygons, `N >= 7`, and `lambda` inside
    /// `[l0 n^e, l1 n^e]` with `e = (N-2)/(N-4)`.
    pub fn check_window(&self, l0: f64, l1: f64) -> Result<()> {
        if self.dim < 7 {
            return Err(Error::InvalidConfig(format!("inner estimates need N >= 7, got {}", self.dim)));
        }
        let k = self.outer.as_ref().map_or(0, |o| o.count);
        if k % 2 != 0 || self.inner.count % 2 != 0 {
            return Err(Error::InvalidConfig(format!("k and n must be even, got k = {k}, n = {}", self.inner.count)));
        }
        let (lo, hi) = lambda_window(self.inner.count, self.dim, l0, l1);
        let l = self.inner.scale;
        if l < lo || l > hi {
            return Err(Error::InvalidConfig(format!("lambda = {l} outside the window [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn outer_tower(&self) -> Result<Tower> {
        match &self.outer {
            Some(o) => Tower::from_polygon(o),
            None => Ok(Tower::new(self.dim, Vec::new())),
        }
    }

    pub fn inner_bubbles(&self) -> Vec<Bubble> {
        (0..self.inner.count).map(|j| Bubble::on_polygon(&self.inner, j)).collect()
    }

    pub fn inner_centers(&self) -> Vec<Point> {
        (0..self.inner.count).map(|j| self.inner.vertex(j)).collect()
    }

    pub fn outer_centers(&self) -> Vec<Point> {
        self.outer.as_ref().map_or_else(Vec::new, |o| (0..o.count).map(|j| o.vertex(j)).collect())
    }

    /// `(u_k, sum_j U_{p_j, lambda}, sum_j U_{p_j, lambda}^{2*-1})` at `y`.
    fn parts(&self, y: &[f64]) -> (f64, f64, f64) {
        let p = nonlinear_power(self.dim);
        let u = self.outer.as_ref().map_or(0.0, |o| {
            (0..o.count).map(|j| Bubble::on_polygon(o, j).eval(y)).sum()
        });
        let (mut s, mut sp) = (0.0, 0.0);
        for b in self.inner_bubbles() {
            let v = b.eval(y);
            s += v;
            sp += spow(v, p);
        }
        (u, s, sp)
    }
}

/// `[l0 n^e, l1 n^e]`, `e = (N-2)/(N-4)`.
pub fn lambda_window(n: usize, dim: usize, l0: f64, l1: f64) -> (f64, f64) {
    let e = (dim as f64 - 2.0) / (dim as f64 - 4.0);
    let s = (n as f64).powf(e);
    (l0 * s, l1 * s)
}

/// `L_k xi = -Delta xi - (2*-1) K(|y|) |u_k|^{2*-2} xi`.
pub fn apply_lk(xi: &dyn SmoothField, background: &Tower, k: &PotentialK, y: &[f64]) -> f64 {
    let p = nonlinear_power(xi.dim());
    let u = background.eval(y);
    -xi.laplacian(y) - p * k.eval_at(y) * u.abs().powf(p - 1.0) * xi.value(y)
}

/// `Q_n xi = -Delta xi - (2*-1) K(|y|) |u_k + sum U_{p_j}|^{2*-2} xi`.
pub fn apply_qn(xi: &dyn SmoothField, cfg: &GluedConfig, y: &[f64]) -> f64 {
    let p = nonlinear_power(cfg.dim);
    let (u, s, _) = cfg.parts(y);
    -xi.laplacian(y) - p * cfg.potential.eval_at(y) * (u + s).abs().powf(p - 1.0) * xi.value(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorGap {
    pub qn: f64,
    pub lk: f64,
    /// `(2*-1) sup|K| |xi| | |u_k + sum U|^{2*-2} - |u_k|^{2*-2} |`.
    pub bound: f64,
}

/// `Q_n xi` and `L_k xi` at `y` with the mean-value bound on their gap.
pub fn qn_lk_gap(xi: &dyn SmoothField, cfg: &GluedConfig, y: &[f64]) -> Result<OperatorGap> {
    let p = nonlinear_power(cfg.dim);
    let (u, s, _) = cfg.parts(y);
    let tower = cfg.outer_tower()?;
    let ksup = cfg.potential.eval_at(y).abs().max(sup_k(&cfg.potential));
    let bound = p * ksup * xi.value(y).abs() * ((u + s).abs().powf(p - 1.0) - u.abs().powf(p - 1.0)).abs();
    Ok(OperatorGap { qn: apply_qn(xi, cfg, y), lk: apply_lk(xi, &tower, &cfg.potential, y), bound })
}

fn sup_k(k: &PotentialK) -> f64 {
    match k.bump_parameters() {
        Some(_) => k.eval(k.bump_parameters().unwrap().0).abs(),
        None => (0..=2000).map(|i| k.eval(i as f64 * 0.005).abs()).fold(0.0, f64::max),
    }
}

/// The three parts of `l_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualParts {
    /// `K ((u_k + S)^{2*-1} - u_k^{2*-1} - S^{2*-1})`, `S = sum U_{p_j}`.
    pub j1: f64,
    /// `S^{2*-1} - sum U_{p_j}^{2*-1}`.
    pub j2: f64,
    /// `(K - 1) S^{2*-1}`.
    pub j3: f64,
}

/// `l_n = K (u_k + S)^{2*-1} - K u_k^{2*-1} - sum U_{p_j}^{2*-1}`.
pub fn residual_ln(cfg: &GluedConfig, y: &[f64]) -> f64 {
    let p = nonlinear_power(cfg.dim);
    let (u, s, sp) = cfg.parts(y);
    let k = cfg.potential.eval_at(y);
    k * spow(u + s, p) - k * spow(u, p) - sp
}

pub fn residual_decomposition(cfg: &GluedConfig, y: &[f64]) -> ResidualParts {
    let p = nonlinear_power(cfg.dim);
    let (u, s, sp) = cfg.parts(y);
    let k = cfg.potential.eval_at(y);
    ResidualParts {
        j1: k * (spow(u + s, p) - spow(u, p) - spow(s, p)),
        j2: spow(s, p) - sp,
        j3: (k - 1.0) * spow(s, p),
    }
}

/// Double-star weight at the inner centers with `tau = (N-4)/(N-2)`.
pub fn inner_double_star(cfg: &GluedConfig) -> Result<WeightSpec> {
    WeightSpec::new(cfg.inner_centers(), cfg.inner.scale, WeightSpec::inner_tau(cfg.dim), WeightKind::DoubleStar)
}

/// Star weight at the inner centers, the profile used for perturbations.
pub fn inner_star(cfg: &GluedConfig) -> Result<WeightSpec> {
    WeightSpec::new(cfg.inner_centers(), cfg.inner.scale, WeightSpec::inner_tau(cfg.dim), WeightKind::Star)
}

/// Lower bound for `||l_n||_{**,n}`. The search also starts at the outer
/// centers, where `u_k` is largest.
pub fn residual_ln_norm(cfg: &GluedConfig, budget: &SearchBudget) -> Result<SupNormEstimate> {
    let spec = inner_double_star(cfg)?;
    let mut budget = budget.clone();
    let step = cfg.outer.as_ref().map_or(1.0, |o| 0.5 / o.scale);
    budget.extra_starts.extend(cfg.outer_centers().into_iter().map(|c| (c, step)));
    let f = |y: &[f64]| residual_ln(cfg, y);
    weighted_sup_norm(&f, &spec, &budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub norm_lower_bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSweep {
    pub rows: Vec<SweepRow>,
    pub fit: LineFit,
}

/// `||l_n||_{**,n}` lower bounds along `lambdas`, with the log-log fit.
pub fn residual_sweep(
    make: &dyn Fn(f64) -> Result<GluedConfig>,
    lambdas: &[f64],
    budget: &SearchBudget,
) -> Result<ResidualSweep> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let est = residual_ln_norm(&make(l)?, budget)?;
        rows.push(SweepRow { lambda: l, norm_lower_bound: est.lower_bound, converged: est.converged });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.norm_lower_bound).collect();
    let fit = loglog_fit(&x, &y)?;
    Ok(ResidualSweep { rows, fit })
}

/// `(1+t)^p - 1 - p t`, with a series for small `t`.
fn taylor_defect(t: f64, p: f64) -> f64 {
    if t.abs() < 1e-3 {
        let c2 = p * (p - 1.0) / 2.0;
        let c3 = c2 * (p - 2.0) / 3.0;
        let c4 = c3 * (p - 3.0) / 4.0;
        t * t * (c2 + t * (c3 + t * c4))
    } else {
        spow(1.0 + t, p) - 1.0 - p * t
    }
}

/// `R_n(xi) = K ((B + xi)^{2*-1} - B^{2*-1} - (2*-1) B^{2*-2} xi)` with
/// `B = u_k + sum U_{p_j}`.
pub fn remainder_rn(xi: f64, cfg: &GluedConfig, y: &[f64]) -> f64 {
    let p = nonlinear_power(cfg.dim);
    let (u, s, _) = cfg.parts(y);
    let b = u + s;
    let k = cfg.potential.eval_at(y);
    if b > 0.0 {
        k * b.powf(p) * taylor_defect(xi / b, p)
    } else {
        k * (spow(b + xi, p) - spow(b, p) - p * b.abs().powf(p - 1.0) * xi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderProbe {
    pub point: Point,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// `|xi_0(y)| / B(y)` at the probe point.
    pub perturbation_ratio: f64,
    pub fit: LineFit,
}

/// Log-log slope of `|R_n(s xi_0)(y)|` against `s` at a fixed point.
pub fn remainder_exponent(
    xi0: &(dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &GluedConfig,
    y: &[f64],
    s: &[f64],
) -> Result<RemainderProbe> {
    let x = xi0(y);
    let values: Vec<f64> = s.iter().map(|si| remainder_rn(si * x, cfg, y).abs()).collect();
    let fit = loglog_fit(s, &values)?;
    let (u, sum, _) = cfg.parts(y);
    Ok(RemainderProbe { point: y.to_vec(), s: s.to_vec(), values, perturbation_ratio: x.abs() / (u + sum), fit })
}

/// Star-weight profile of the inner polygon as a perturbation.
pub fn star_profile(cfg: &GluedConfig) -> Result<impl Fn(&[f64]) -> f64 + Sync> {
    let spec = inner_star(cfg)?;
    Ok(move |y: &[f64]| weight_value(&spec, y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCoefficients {
    pub b0: f64,
    pub b1: f64,
    /// Translation direction paired with `psi_1`.
    pub direction: Point,
    pub bubble_index: Option<usize>,
    /// Weighted norm of the rescaled field minus its projection over `B_R`.
    pub residual: f64,
    pub relative_residual: f64,
}

/// Radius of the ball carrying the projection inner product.
pub const PROJECTION_RADIUS: f64 = 20.0;

/// Rescales `xi` about `b` to `xi~(z) = mu^{-(N-2)/2} xi(z/mu + x)` and
/// projects onto `psi_0` and the translation kernel along the bubble's radial
/// direction (axis 0 without a parent polygon), using
/// `<f, g> = int_{B_R} U^{2*-2} f g` with `R = 20`.
///
/// `hint` describes the symmetry of the rescaled field about the origin;
/// radial fields and fields axial about the translation direction use a
/// two-dimensional chart, anything else the full ball.
pub fn kernel_projection(
    xi: &(dyn Fn(&[f64]) -> f64 + Sync),
    b: &Bubble,
    hint: &SymmetryHint,
    spec: &QuadratureSpec,
) -> Result<KernelCoefficients> {
    let dim = b.dim;
    let a = (dim as f64 - 2.0) / 2.0;
    let mu = b.scale;
    let (direction, index) = match &b.parent {
        Some((cfg, j)) => (cfg.radial_direction(*j), Some(*j)),
        None => (unit(dim, 0), None),
    };
    let std = Bubble::standard(dim);
    let p = nonlinear_power(dim);
    let tilde = |z: &[f64]| {
        let y: Point = z.iter().zip(&b.center).map(|(zi, xi)| zi / mu + xi).collect();
        mu.powf(-a) * xi(&y)
    };
    let psi0 = |z: &[f64]| std.d_scale(z);
    let psi1 = |z: &[f64]| dot(&std.eval_grad(z), &direction);
    let w = |z: &[f64]| std.eval(z).powf(p - 1.0);

    let aligned = match hint {
        SymmetryHint::Radial => true,
        SymmetryHint::Axial(ax) => {
            let n = norm(ax);
            n > 0.0 && (dot(ax, &direction).abs() / n - 1.0).abs() < 1e-12
        }
        SymmetryHint::None => false,
    };
    let origin = vec![0.0; dim];
    let integrate = |f: &(dyn Fn(&[f64]) -> f64 + Sync), abs_tol: f64| {
        let s = spec.clone().with_tol(spec.rel_tol, spec.abs_tol.max(abs_tol));
        if aligned {
            let s = s.with_reduction(Reduction::Axial2d {
                origin: origin.clone(),
                axis: direction.clone(),
                radius: Some(PROJECTION_RADIUS),
            });
            integrate_volume(&Integrand::new(dim, f, 0.0).with_peaks(vec![Peak::new(origin.clone(), 1.0)]), &s, None)
        } else {
            integrate_ball(f, &origin, PROJECTION_RADIUS, &[1.0], &s)
        }
    };
    let g00 = integrate(&|z| w(z) * psi0(z) * psi0(z), 0.0)?.value;
    let g11 = integrate(&|z| w(z) * psi1(z) * psi1(z), 0.0)?.value;
    let t2 = integrate(&|z| w(z) * tilde(z) * tilde(z), 0.0)?.value;
    // pairings may vanish by parity: measure their error against the norms
    let b0 = integrate(&|z| w(z) * tilde(z) * psi0(z), spec.rel_tol * (t2 * g00).sqrt())?.value / g00;
    let b1 = integrate(&|z| w(z) * tilde(z) * psi1(z), spec.rel_tol * (t2 * g11).sqrt())?.value / g11;
    let r2 = integrate(
        &|z| {
            let r = tilde(z) - b0 * psi0(z) - b1 * psi1(z);
            w(z) * r * r
        },
        spec.rel_tol * t2,
    )?
    .value;
    let residual = r2.max(0.0).sqrt();
    Ok(KernelCoefficients {
        b0,
        b1,
        direction,
        bubble_index: index,
        residual,
        relative_residual: if t2 > 0.0 { residual / t2.sqrt() } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    /// Row `(j, i)`, column `(j', i')` at index `2j + i`, `i = 0` for the
    /// radial-location kernel and `i = 1` for the scale kernel.
    pub matrix: Vec<Vec<f64>>,
    /// `max |G - G^T|` over the largest diagonal entry.
    pub asymmetry: f64,
    /// Largest off-block entry over the smaller of its two diagonal entries.
    pub off_block_ratio: f64,
    /// Largest `|G_{(j,0),(j,1)}|` over the geometric mean of the block diagonal.
    pub in_block_ratio: f64,
    /// Eigenvalues of the diagonally rescaled symmetric part, ascending.
    pub eigenvalues: Vec<f64>,
    pub max_error: f64,
}

/// `G[(j,i),(j',i')] = int U_{p_j}^{2*-2} Z_{j,i} Z_{j',i'}` on the inner
/// polygon. Every integrand depends on the inner plane and the norm of the
/// remaining coordinates, so a three-dimensional chart suffices.
pub fn gram_matrix(cfg: &GluedConfig, spec: &QuadratureSpec) -> Result<GramReport> {
    let n = cfg.inner.count;
    let dim = cfg.dim;
    let p = nonlinear_power(dim);
    let bubbles = cfg.inner_bubbles();
    let kinds = [KernelKind::Z1, KernelKind::Z2];
    let width = 1.0 / cfg.inner.scale;
    let qspec = spec.clone().with_reduction(Reduction::Cylinder3d { plane: cfg.inner.plane, fold: 0 });
    let m = 2 * n;
    let mut g = vec![vec![0.0; m]; m];
    let mut max_error: f64 = 0.0;
    let entry = |r: usize, c: usize, abs_tol: f64| {
        let (j, i) = (r / 2, r % 2);
        let (jj, ii) = (c / 2, c % 2);
        let (bj, bjj) = (&bubbles[j], &bubbles[jj]);
        let f = |y: &[f64]| {
            bj.eval(y).powf(p - 1.0)
                * bj.eval_kernel(kinds[i], y).unwrap_or(0.0)
                * bjj.eval_kernel(kinds[ii], y).unwrap_or(0.0)
        };
        let mut peaks = vec![Peak::new(bj.center.clone(), width)];
        if jj != j {
            peaks.push(Peak::new(bjj.center.clone(), width));
        }
        let decay = 2.0 * (dim as f64 - 1.0) + 4.0;
        let s = qspec.clone().with_tol(qspec.rel_tol, qspec.abs_tol.max(abs_tol));
        integrate_volume(&Integrand::new(dim, &f, decay).with_peaks(peaks), &s, None)
    };
    for r in 0..m {
        let res = entry(r, r, 0.0)?;
        g[r][r] = res.value;
        max_error = max_error.max(res.error_estimate);
    }
    for r in 0..m {
        for c in 0..m {
            if r != c {
                // entries vanishing by parity are resolved against the diagonal
                let res = entry(r, c, qspec.rel_tol * (g[r][r] * g[c][c]).abs().sqrt())?;
                g[r][c] = res.value;
                max_error = max_error.max(res.error_estimate);
            }
        }
    }
    let dmax = (0..m).map(|i| g[i][i].abs()).fold(0.0, f64::max);
    let mut asym: f64 = 0.0;
    let mut off: f64 = 0.0;
    let mut inb: f64 = 0.0;
    for r in 0..m {
        for c in 0..m {
            asym = asym.max((g[r][c] - g[c][r]).abs());
            let scale = (g[r][r].abs() * g[c][c].abs()).sqrt();
            if r / 2 != c / 2 {
                off = off.max(g[r][c].abs() / g[r][r].abs().min(g[c][c].abs()));
            } else if r != c {
                inb = inb.max(g[r][c].abs() / scale);
            }
        }
    }
    let d: Vec<f64> = (0..m).map(|i| 1.0 / g[i][i].abs().sqrt()).collect();
    let sym = DMatrix::from_fn(m, m, |r, c| 0.5 * (g[r][c] + g[c][r]) * d[r] * d[c]);
    let mut eigenvalues: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(GramReport {
        matrix: g,
        asymmetry: if dmax > 0.0 { asym / dmax } else { 0.0 },
        off_block_ratio: off,
        in_block_ratio: inb,
        eigenvalues,
        max_error,
    })
}

/// A field given by values only, with central-difference derivatives of
/// step `h`.
pub struct FiniteDifference<F: Fn(&[f64]) -> f64 + Send + Sync> {
    pub f: F,
    pub dim: usize,
    pub h: f64,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> SmoothField for FiniteDifference<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
    fn grad(&self, y: &[f64]) -> Point {
        let mut z = y.to_vec();
        (0..self.dim)
            .map(|i| {
                z[i] = y[i] + self.h;
                let a = (self.f)(&z);
                z[i] = y[i] - self.h;
                let b = (self.f)(&z);
                z[i] = y[i];
                (a - b) / (2.0 * self.h)
            })
            .collect()
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        let mut z = y.to_vec();
        let f0 = (self.f)(y);
        let mut s = 0.0;
        for i in 0..self.dim {
            z[i] = y[i] + self.h;
            let a = (self.f)(&z);
            z[i] = y[i] - self.h;
            let b = (self.f)(&z);
            z[i] = y[i];
            s += a - 2.0 * f0 + b;
        }
        s / (self.h * self.h)
    }
}
