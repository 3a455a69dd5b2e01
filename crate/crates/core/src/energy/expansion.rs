//! Reduced-energy expansion in `(t, lambda)` for the inner polygon and the
//! least-squares fit of its constants.

use super::energy;
use crate::bubble::Tower;
use crate::error::{Error, Result};
use crate::potential::PotentialK;
use crate::quadrature::{IntegralResult, QuadratureSpec};
use crate::symmetry::PolygonConfig;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// Declared remainder exponent; not used in evaluation.
    pub sigma: f64,
    pub r0: f64,
    pub dim: usize,
}

/// How the `B_2` term is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadraticForm {
    /// `B_2 (r0 - t)^2`.
    #[default]
    Adopted,
    /// `B_2 (lambda r0 - t)^2 / lambda^2`, as printed.
    Verbatim,
}

/// `base + n A + n (B1/l^2 + B2 (r0-t)^2 - B3 n^{N-2} / l^{N-2})`.
pub fn expansion_energy(t: f64, lambda: f64, n: usize, c: &ExpansionConstants, base: f64) -> f64 {
    ReducedEnergy { constants: *c, n, base, form: QuadraticForm::Adopted, tilt: 0.0 }.eval(t, lambda)
}

/// `lambda* = ((N-2) B3 / (2 B1))^{1/(N-4)} n^{(N-2)/(N-4)}`.
pub fn critical_lambda(c: &ExpansionConstants, n: usize) -> f64 {
    let nn = c.dim as f64;
    ((nn - 2.0) * c.b3 / (2.0 * c.b1)).powf(1.0 / (nn - 4.0)) * (n as f64).powf((nn - 2.0) / (nn - 4.0))
}

/// `F(t, lambda)` for a fixed `n`. `tilt` adds `tilt (t - r0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedEnergy {
    pub constants: ExpansionConstants,
    pub n: usize,
    pub base: f64,
    pub form: QuadraticForm,
    #[serde(default)]
    pub tilt: f64,
}

impl ReducedEnergy {
    pub fn new(constants: ExpansionConstants, n: usize) -> Self {
        ReducedEnergy { constants, n, base: 0.0, form: QuadraticForm::Adopted, tilt: 0.0 }
    }

    pub fn eval(&self, t: f64, lambda: f64) -> f64 {
        let c = &self.constants;
        let n = self.n as f64;
        let nn = c.dim as f64;
        let quad = match self.form {
            QuadraticForm::Adopted => c.b2 * (c.r0 - t).powi(2),
            QuadraticForm::Verbatim => c.b2 * (lambda * c.r0 - t).powi(2) / (lambda * lambda),
        };
        let bracket = c.b1 / (lambda * lambda) + quad - c.b3 * n.powf(nn - 2.0) / lambda.powf(nn - 2.0);
        self.base + n * c.a + n * bracket + self.tilt * (t - c.r0)
    }
}

/// One energy observation `I = base + F(t, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub lambda: f64,
    pub n: usize,
    pub value: f64,
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Fit a separate coefficient of `(t - r0)` for each `n`, absorbing the
    /// `t` dependence of the interaction and of the curvature term.
    pub per_n_tilt: bool,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub constants: ExpansionConstants,
    /// `n -> tilt` when requested.
    pub tilts: BTreeMap<usize, f64>,
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
    pub max_residual: f64,
    /// All of `B1, B2, B3` positive.
    pub positive: bool,
}

impl ExpansionFit {
    pub fn reduced_energy(&self, n: usize) -> ReducedEnergy {
        ReducedEnergy { tilt: self.tilts.get(&n).copied().unwrap_or(0.0), ..ReducedEnergy::new(self.constants, n) }
    }
}

fn distinct(v: impl Iterator<Item = f64>) -> usize {
    let mut xs: Vec<f64> = v.collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    xs.len()
}

/// Least-squares fit of `(A, B1, B2, B3)` to `value - base` over samples
/// sharing `r0` and `N`.
pub fn fit_expansion_constants(samples: &[Sample], r0: f64, dim: usize, opts: &FitOptions) -> Result<ExpansionFit> {
    if samples.len() < 6 {
        return Err(Error::Underdetermined(format!("need at least 6 samples, got {}", samples.len())));
    }
    if distinct(samples.iter().map(|s| s.lambda)) < 2 || distinct(samples.iter().map(|s| s.t)) < 2 {
        return Err(Error::Underdetermined("samples must vary in both t and lambda".into()));
    }
    let nn = dim as f64;
    let groups: Vec<usize> = if opts.per_n_tilt {
        let mut g: Vec<usize> = samples.iter().map(|s| s.n).collect();
        g.sort();
        g.dedup();
        g
    } else {
        Vec::new()
    };
    let cols = 4 + groups.len();
    let mut m = DMatrix::<f64>::zeros(samples.len(), cols);
    let mut rhs = DVector::<f64>::zeros(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let n = s.n as f64;
        m[(i, 0)] = n;
        m[(i, 1)] = n / (s.lambda * s.lambda);
        m[(i, 2)] = n * (r0 - s.t).powi(2);
        m[(i, 3)] = -n * n.powf(nn - 2.0) / s.lambda.powf(nn - 2.0);
        if let Some(g) = groups.iter().position(|g| *g == s.n) {
            m[(i, 4 + g)] = s.t - r0;
        }
        rhs[i] = s.value - s.base;
    }
    // equilibrate columns before the rank test
    let scales: Vec<f64> = (0..cols).map(|j| m.column(j).norm()).collect();
    if scales.iter().any(|s| *s == 0.0) {
        return Err(Error::Underdetermined("a design column vanishes".into()));
    }
    let mut ms = m.clone();
    for j in 0..cols {
        ms.column_mut(j).scale_mut(1.0 / scales[j]);
    }
    let svd = ms.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::Underdetermined(format!("design is rank deficient (condition {:.3e})", smax / smin)));
    }
    let xs = svd.solve(&rhs, 0.0).map_err(|e| Error::Underdetermined(e.to_string()))?;
    let x: Vec<f64> = (0..cols).map(|j| xs[j] / scales[j]).collect();
    let fitted = &m * DVector::from_vec(x.clone());
    let residuals: Vec<f64> = (0..samples.len()).map(|i| rhs[i] - fitted[i]).collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let constants = ExpansionConstants { a: x[0], b1: x[1], b2: x[2], b3: x[3], sigma: opts.sigma, r0, dim };
    Ok(ExpansionFit {
        constants,
        tilts: groups.iter().enumerate().map(|(g, n)| (*n, x[4 + g])).collect(),
        max_residual: residuals.iter().map(|r| r.abs()).fold(0.0, f64::max),
        rms_residual: rms,
        residuals,
        positive: x[1] > 0.0 && x[2] > 0.0 && x[3] > 0.0,
    })
}

/// `I(sum_j U_{p_j, lambda})` for the `n`-gon of radius `t` in the `(2, 3)`
/// plane, integrated over one wedge of the polygon's symmetry.
pub fn inner_polygon_energy(n: usize, t: f64, lambda: f64, dim: usize, k: &PotentialK, rel_tol: f64, abs_tol: f64) -> Result<IntegralResult> {
    let tower = Tower::from_polygon(&PolygonConfig::inner(n, t, lambda, dim))?;
    let spec = QuadratureSpec::cylinder((2, 3), n).with_tol(rel_tol, abs_tol);
    energy(&tower, k, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> ExpansionConstants {
        ExpansionConstants { a: 3.0, b1: 1.3, b2: 0.7, b3: 0.4, sigma: 0.1, r0: 1.0, dim: 7 }
    }

    #[test]
    fn quadratic_term_vanishes_at_r0() {
        let c = consts();
        let with = expansion_energy(1.0, 20.0, 8, &c, 0.0);
        let no_b2 = expansion_energy(1.0, 20.0, 8, &ExpansionConstants { b2: 0.0, ..c }, 0.0);
        assert_eq!(with, no_b2);
        let v = ReducedEnergy { form: QuadraticForm::Verbatim, ..ReducedEnergy::new(c, 8) };
        assert!(v.eval(1.0, 20.0) > with);
    }

    #[test]
    fn lambda_star_is_stationary_and_bracket_positive() {
        let c = consts();
        for n in [4, 8, 16] {
            let l = critical_lambda(&c, n);
            let h = 1e-4 * l;
            let d = (expansion_energy(c.r0, l + h, n, &c, 0.0) - expansion_energy(c.r0, l - h, n, &c, 0.0)) / (2.0 * h);
            let scale = n as f64 * c.b1 / (l * l * l);
            assert!(d.abs() < 1e-6 * scale, "n={n}: {d}");
            let bracket = (expansion_energy(c.r0, l, n, &c, 0.0) - n as f64 * c.a) / n as f64;
            let want = c.b1 / (l * l) * (1.0 - 2.0 / (c.dim as f64 - 2.0));
            assert!((bracket - want).abs() < 1e-9 * want);
        }
    }

    fn synthetic(c: &ExpansionConstants) -> Vec<Sample> {
        let mut out = Vec::new();
        for n in [8usize, 12, 16] {
            for lf in [0.3, 0.45, 0.7] {
                for dt in [-0.02, 0.0, 0.02] {
                    let lambda = lf * (n as f64).powf(5.0 / 3.0);
                    let t = c.r0 + dt;
                    out.push(Sample { t, lambda, n, value: expansion_energy(t, lambda, n, c, 2.5), base: 2.5, error: 0.0 });
                }
            }
        }
        out
    }

    #[test]
    fn synthetic_constants_recovered() {
        let c = consts();
        for per_n_tilt in [false, true] {
            let fit = fit_expansion_constants(&synthetic(&c), c.r0, c.dim, &FitOptions { per_n_tilt, sigma: 0.1 }).unwrap();
            let f = fit.constants;
            for (got, want) in [(f.a, c.a), (f.b1, c.b1), (f.b2, c.b2), (f.b3, c.b3)] {
                assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
            }
            assert!(fit.positive);
            assert!(fit.tilts.values().all(|g| g.abs() < 1e-8));
        }
    }

    #[test]
    fn perturbed_sample_inflates_residual() {
        let c = consts();
        let mut s = synthetic(&c);
        let base = fit_expansion_constants(&s, c.r0, c.dim, &FitOptions::default()).unwrap();
        s[4].value *= 1.1;
        let bad = fit_expansion_constants(&s, c.r0, c.dim, &FitOptions::default()).unwrap();
        assert!(bad.rms_residual > 1e3 * base.rms_residual.max(1e-12));
    }

    #[test]
    fn underdetermined_designs_rejected() {
        let c = consts();
        let s = synthetic(&c);
        assert!(matches!(fit_expansion_constants(&s[..5], 1.0, 7, &FitOptions::default()), Err(Error::Underdetermined(_))));
        let fixed_t: Vec<Sample> = s.iter().filter(|x| x.t == 1.0).cloned().collect();
        assert!(fit_expansion_constants(&fixed_t, 1.0, 7, &FitOptions::default()).is_err());
    }
}
