//! Local Pohozaev identities for a pair `(u, xi)` with
//! `-Delta u = K u^{2*-1}` and `-Delta xi = (2*-1) K u^{2*-2} xi`, flux
//! coefficients on small balls, and far-field Green fits.
//!
//! Each identity is evaluated term by term; the residual is the defect
//! between the two sides. For a pair that does not solve the equations the
//! defect is the quantity being measured, not a failure.

use crate::bubble::SmoothField;
use crate::error::{Error, Result};
use crate::point::{dot, norm, sub, Point};
use crate::potential::PotentialK;
use crate::quadrature::{
    integrate_ball, integrate_sphere_aligned, integrate_volume, IntegralResult, Integrand, Peak, QuadratureSpec, Reduction,
};
use crate::special::{critical_exponent, sphere_area};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    Translation,
    Dilation,
}

/// Symmetry of the integrands about the ball center, used to pick cheaper
/// rules. The caller vouches for it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryHint {
    #[default]
    None,
    /// Invariant under rotations about the center.
    Radial,
    /// Invariant under rotations fixing the line `center + s axis`.
    Axial(Point),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

impl Term {
    fn new(name: &str, r: IntegralResult) -> Self {
        Term { name: name.to_string(), value: r.value, error: r.error_estimate }
    }

    fn scaled(name: &str, r: IntegralResult, c: f64) -> Self {
        Term::new(name, r.scaled(c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub identity: Identity,
    pub boundary: Vec<Term>,
    pub volume: Term,
    /// Sum of the boundary terms.
    pub boundary_sum: f64,
    pub residual: f64,
    /// Largest term magnitude.
    pub scale: f64,
    pub relative_residual: f64,
    /// Sum of the term error estimates.
    pub error_budget: f64,
}

impl PohozaevReport {
    fn assemble(identity: Identity, boundary: Vec<Term>, volume: Term) -> Self {
        let boundary_sum: f64 = boundary.iter().map(|t| t.value).sum();
        let residual = (boundary_sum - volume.value).abs();
        let scale = boundary.iter().chain(std::iter::once(&volume)).map(|t| t.value.abs()).fold(0.0, f64::max);
        let error_budget = boundary.iter().map(|t| t.error).sum::<f64>() + volume.error;
        PohozaevReport {
            identity,
            boundary,
            volume,
            boundary_sum,
            residual,
            scale,
            relative_residual: if scale > 0.0 { residual / scale } else { 0.0 },
            error_budget,
        }
    }

    /// `Q(u, xi, delta)`: the three gradient terms of the translation identity.
    pub fn q_value(&self) -> Option<f64> {
        match self.identity {
            Identity::Translation => Some(self.boundary[..3].iter().map(|t| t.value).sum()),
            Identity::Dilation => None,
        }
    }
}

/// `|u|^{p-1} u`.
fn spow(u: f64, p: f64) -> f64 {
    u.abs().powf(p - 1.0) * u
}

struct Ball<'a> {
    center: &'a [f64],
    radius: f64,
    hint: &'a SymmetryHint,
    spec: &'a QuadratureSpec,
}

impl Ball<'_> {
    fn pole(&self) -> Option<&[f64]> {
        match self.hint {
            SymmetryHint::Axial(a) => Some(a.as_slice()),
            _ => None,
        }
    }

    fn surface(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<IntegralResult> {
        integrate_sphere_aligned(f, self.center, self.radius, self.pole(), self.spec)
    }

    fn volume(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), peaks: Vec<Peak>) -> Result<IntegralResult> {
        let dim = self.center.len();
        let c = self.center.to_vec();
        match self.hint {
            SymmetryHint::Radial => {
                let spec = self.spec.clone().with_reduction(Reduction::Radial1d { center: c, radius: Some(self.radius) });
                integrate_volume(&Integrand::new(dim, f, 0.0).with_peaks(peaks), &spec, None)
            }
            SymmetryHint::Axial(axis) => {
                let spec = self.spec.clone().with_reduction(Reduction::Axial2d {
                    origin: c,
                    axis: axis.clone(),
                    radius: Some(self.radius),
                });
                integrate_volume(&Integrand::new(dim, f, 0.0).with_peaks(peaks), &spec, None)
            }
            SymmetryHint::None => {
                let breaks: Vec<f64> =
                    peaks.iter().map(|p| norm(&sub(&p.center, self.center))).filter(|r| *r < self.radius).collect();
                integrate_ball(f, self.center, self.radius, &breaks, self.spec)
            }
        }
    }
}

fn normal(center: &[f64], radius: f64, y: &[f64]) -> Point {
    y.iter().zip(center).map(|(a, c)| (a - c) / radius).collect()
}

/// Translation identity on `B_delta(center)` along `axis`.
#[allow(clippy::too_many_arguments)]
pub fn pohozaev_translation(
    u: &dyn SmoothField,
    xi: &dyn SmoothField,
    k: &PotentialK,
    center: &[f64],
    delta: f64,
    axis: usize,
    hint: &SymmetryHint,
    peaks: Vec<Peak>,
    spec: &QuadratureSpec,
) -> Result<PohozaevReport> {
    let dim = u.dim();
    if axis >= dim || center.len() != dim || xi.dim() != dim {
        return Err(Error::InvalidConfig(format!("axis {axis} or center outside R^{dim}")));
    }
    let p = critical_exponent(dim) - 1.0;
    let ball = Ball { center, radius: delta, hint, spec };
    let t1 = |y: &[f64]| -dot(&u.grad(y), &normal(center, delta, y)) * xi.grad(y)[axis];
    let t2 = |y: &[f64]| -dot(&xi.grad(y), &normal(center, delta, y)) * u.grad(y)[axis];
    let t3 = |y: &[f64]| dot(&u.grad(y), &xi.grad(y)) * normal(center, delta, y)[axis];
    let t4 = |y: &[f64]| -k.eval_at(y) * spow(u.value(y), p) * xi.value(y) * normal(center, delta, y)[axis];
    let vol = |y: &[f64]| match k.grad(y) {
        Ok(g) => -spow(u.value(y), p) * xi.value(y) * g[axis],
        Err(_) => 0.0,
    };
    let boundary = vec![
        Term::new("-du/dnu dxi/dy_i", ball.surface(&t1)?),
        Term::new("-dxi/dnu du/dy_i", ball.surface(&t2)?),
        Term::new("<grad u, grad xi> nu_i", ball.surface(&t3)?),
        Term::new("-K u^{2*-1} xi nu_i", ball.surface(&t4)?),
    ];
    let volume = if k.is_constant() {
        Term { name: "-u^{2*-1} xi dK/dy_i".into(), value: 0.0, error: 0.0 }
    } else {
        Term::new("-u^{2*-1} xi dK/dy_i", ball.volume(&vol, peaks)?)
    };
    Ok(PohozaevReport::assemble(Identity::Translation, boundary, volume))
}

/// Dilation identity on `B_delta(center)` about `x0`.
#[allow(clippy::too_many_arguments)]
pub fn pohozaev_dilation(
    u: &dyn SmoothField,
    xi: &dyn SmoothField,
    k: &PotentialK,
    center: &[f64],
    delta: f64,
    x0: &[f64],
    hint: &SymmetryHint,
    peaks: Vec<Peak>,
    spec: &QuadratureSpec,
) -> Result<PohozaevReport> {
    let dim = u.dim();
    if center.len() != dim || x0.len() != dim || xi.dim() != dim {
        return Err(Error::InvalidConfig(format!("center or x0 outside R^{dim}")));
    }
    let p = critical_exponent(dim) - 1.0;
    let half = (dim as f64 - 2.0) / 2.0;
    let ball = Ball { center, radius: delta, hint, spec };
    let nu = |y: &[f64]| normal(center, delta, y);
    let rel = |y: &[f64]| sub(y, x0);
    let d1 = |y: &[f64]| k.eval_at(y) * spow(u.value(y), p) * xi.value(y) * dot(&nu(y), &rel(y));
    let d2 = |y: &[f64]| dot(&u.grad(y), &nu(y)) * dot(&xi.grad(y), &rel(y));
    let d3 = |y: &[f64]| dot(&xi.grad(y), &nu(y)) * dot(&u.grad(y), &rel(y));
    let d4 = |y: &[f64]| -dot(&u.grad(y), &xi.grad(y)) * dot(&nu(y), &rel(y));
    let d5 = |y: &[f64]| xi.value(y) * dot(&u.grad(y), &nu(y));
    let d6 = |y: &[f64]| u.value(y) * dot(&xi.grad(y), &nu(y));
    let vol = |y: &[f64]| match k.grad(y) {
        Ok(g) => spow(u.value(y), p) * xi.value(y) * dot(&g, &rel(y)),
        Err(_) => 0.0,
    };
    let boundary = vec![
        Term::new("K u^{2*-1} xi <nu, y-x0>", ball.surface(&d1)?),
        Term::new("du/dnu <grad xi, y-x0>", ball.surface(&d2)?),
        Term::new("dxi/dnu <grad u, y-x0>", ball.surface(&d3)?),
        Term::new("-<grad u, grad xi> <nu, y-x0>", ball.surface(&d4)?),
        Term::scaled("(N-2)/2 xi du/dnu", ball.surface(&d5)?, half),
        Term::scaled("(N-2)/2 u dxi/dnu", ball.surface(&d6)?, half),
    ];
    let volume = if k.is_constant() {
        Term { name: "u^{2*-1} xi <grad K, y-x0>".into(), value: 0.0, error: 0.0 }
    } else {
        Term::new("u^{2*-1} xi <grad K, y-x0>", ball.volume(&vol, peaks)?)
    };
    Ok(PohozaevReport::assemble(Identity::Dilation, boundary, volume))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllSpaceDilation {
    pub radii: Vec<f64>,
    /// Dilation reports on `B_R(0)` about the origin.
    pub reports: Vec<PohozaevReport>,
    /// Volume term extrapolated to `R = infinity` from the two largest radii.
    pub extrapolated_volume: f64,
    /// Same extrapolation from the two smallest radii.
    pub extrapolated_volume_coarse: f64,
    /// `|extrapolated volume|`: the identity asserts it vanishes.
    pub residual: f64,
    pub scale: f64,
    pub relative_residual: f64,
}

/// Dilation identity on `R^N` about the origin, from balls of radius
/// `R, 2R, 4R`. Boundary terms of fields decaying like `|y|^{2-N}` fall off
/// like `R^{2-N}`; the volume term is extrapolated with that rate. A boundary
/// sum that fails to decrease is reported as a non-decaying field.
pub fn pohozaev_dilation_all_space(
    u: &dyn SmoothField,
    xi: &dyn SmoothField,
    k: &PotentialK,
    r: f64,
    hint: &SymmetryHint,
    peaks: Vec<Peak>,
    spec: &QuadratureSpec,
) -> Result<AllSpaceDilation> {
    let dim = u.dim();
    let origin = vec![0.0; dim];
    let radii = vec![r, 2.0 * r, 4.0 * r];
    let mut reports = Vec::new();
    for &rr in &radii {
        reports.push(pohozaev_dilation(u, xi, k, &origin, rr, &origin, hint, peaks.clone(), spec)?);
    }
    let b: Vec<f64> = reports.iter().map(|r| r.boundary_sum.abs()).collect();
    let floor = reports.iter().map(|r| r.error_budget).fold(0.0, f64::max);
    if b[2] > floor && !(b[2] < 0.75 * b[1] && b[1] < 0.75 * b[0]) {
        return Err(Error::NonDecaying(format!("boundary sums {:.3e}, {:.3e}, {:.3e} do not decrease", b[0], b[1], b[2])));
    }
    let q = 2f64.powf(dim as f64 - 2.0);
    let v: Vec<f64> = reports.iter().map(|r| r.volume.value).collect();
    let fine = (q * v[2] - v[1]) / (q - 1.0);
    let coarse = (q * v[1] - v[0]) / (q - 1.0);
    let scale = reports.iter().map(|r| r.scale).fold(0.0, f64::max);
    Ok(AllSpaceDilation {
        radii,
        reports,
        extrapolated_volume: fine,
        extrapolated_volume_coarse: coarse,
        residual: fine.abs(),
        scale,
        relative_residual: if scale > 0.0 { fine.abs() / scale } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxCoefficients {
    /// `int_{B_delta} K u^{2*-1}`.
    pub a_flux: f64,
    /// `(2*-1) int_{B_delta} K u^{2*-2} xi`.
    pub b_flux_local: f64,
    /// Both multiplied by `mu^{(N-2)/2}` when a scale is given, which removes
    /// the bubble normalization.
    pub a_normalized: f64,
    pub b_normalized: f64,
    pub delta: f64,
    pub error: f64,
}

/// Flux coefficients of `(u, xi)` on `B_delta(center)`.
#[allow(clippy::too_many_arguments)]
pub fn flux_coefficients(
    u: &dyn SmoothField,
    xi: &dyn SmoothField,
    k: &PotentialK,
    center: &[f64],
    delta: f64,
    scale: Option<f64>,
    hint: &SymmetryHint,
    peaks: Vec<Peak>,
    spec: &QuadratureSpec,
) -> Result<FluxCoefficients> {
    let dim = u.dim();
    let p = critical_exponent(dim) - 1.0;
    let ball = Ball { center, radius: delta, hint, spec };
    let fa = |y: &[f64]| k.eval_at(y) * spow(u.value(y), p);
    let fb = |y: &[f64]| p * k.eval_at(y) * u.value(y).abs().powf(p - 1.0) * xi.value(y);
    let a = ball.volume(&fa, peaks.clone())?;
    let b = ball.volume(&fb, peaks)?;
    let norm = scale.map_or(1.0, |mu| mu.powf((dim as f64 - 2.0) / 2.0));
    Ok(FluxCoefficients {
        a_flux: a.value,
        b_flux_local: b.value,
        a_normalized: a.value * norm,
        b_normalized: b.value * norm,
        delta,
        error: a.error_estimate + b.error_estimate,
    })
}

/// `G(y, x) = |y - x|^{2-N} / ((N-2) omega_{N-1})`.
pub fn green(y: &[f64], x: &[f64]) -> f64 {
    let dim = y.len() as f64;
    norm(&sub(y, x)).powf(2.0 - dim) / ((dim - 2.0) * sphere_area(y.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldFit {
    /// Coefficient `a` in `u ~ a sum_j G(y, x_j)`.
    pub coefficient: f64,
    /// Relative RMS misfit at the sample points.
    pub relative_misfit: f64,
}

/// Least-squares fit of `u` against `sum_j G(y, x_j)` on `points`.
pub fn far_field_fit(u: &dyn SmoothField, centers: &[Point], points: &[Point]) -> Result<FarFieldFit> {
    if points.is_empty() {
        return Err(Error::Underdetermined("far-field fit needs sample points".into()));
    }
    let g = DVector::from_iterator(points.len(), points.iter().map(|y| centers.iter().map(|x| green(y, x)).sum()));
    let v = DVector::from_iterator(points.len(), points.iter().map(|y| u.value(y)));
    let design = DMatrix::from_column_slice(points.len(), 1, g.as_slice());
    let a = (design.transpose() * &v)[0] / g.norm_squared();
    let misfit = (&v - &g * a).norm() / v.norm();
    Ok(FarFieldFit { coefficient: a, relative_misfit: misfit })
}

/// `(x_j - x_1)_1 = -2 r sin^2(pi j / k)` for the `k`-gon of radius `r`
/// with `x_1` on the first axis; `j` counts steps from `x_1`.
pub fn neighbor_offset(r: f64, k: usize, j: usize) -> f64 {
    let s = (std::f64::consts::PI * j as f64 / k as f64).sin();
    -2.0 * r * s * s
}
