//! Radial weights `K(|y|)`.
//!
//! The bump form is `K(r) = 1 - c0 s^2 exp(-s^2)`, `s = r - r0`: it has
//! `K(r0) = 1`, `K'(r0) = 0`, `K''(r0) = -2 c0`, and stays above
//! `1 - c0/e > 0` when `c0 < e`.

use crate::error::{Error, Result};
use crate::point::{norm, Point};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PotentialForm {
    ConstantOne,
    QuadraticBump { r0: f64, c0: f64 },
    UserTable(Table),
}

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes), constant
/// beyond the sample range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    pub fn new(r: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        if r.len() != k.len() || r.len() < 2 {
            return Err(Error::InvalidConfig("potential table needs at least two (r, K) rows".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
            return Err(Error::InvalidConfig("potential table radii must be nonnegative and strictly increasing".into()));
        }
        if let Some(bad) = k.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::InvalidConfig(format!("potential table must be positive, found K = {bad}")));
        }
        let n = r.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (k[i + 1] - k[i]) / (r[i + 1] - r[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { (delta[i - 1] + delta[i]) / 2.0 };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Ok(Table { r, k, slopes: m })
    }

    /// Reads a CSV with header `r,K`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let (ir, ik) = match (col("r"), col("K")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidConfig("potential CSV needs header columns r,K".into())),
        };
        let (mut r, mut k) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unparsable potential row {:?}", rec)))
            };
            r.push(parse(ir)?);
            k.push(parse(ik)?);
        }
        Table::new(r, k)
    }

    /// `(K, K', K'')` at `x`.
    fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let n = self.r.len();
        if x <= self.r[0] {
            return (self.k[0], 0.0, 0.0);
        }
        if x >= self.r[n - 1] {
            return (self.k[n - 1], 0.0, 0.0);
        }
        let i = self.r.partition_point(|&v| v <= x) - 1;
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (y0, y1, m0, m1) = (self.k[i], self.k[i + 1], self.slopes[i] * h, self.slopes[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let d = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1;
        let dd = (12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1;
        (v, d / h, dd / (h * h))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialK {
    pub form: PotentialForm,
    /// `K_k(y) = K(|y|/k)` when set.
    #[serde(default)]
    pub rescale: Option<f64>,
}

impl PotentialK {
    pub fn constant_one() -> Self {
        PotentialK { form: PotentialForm::ConstantOne, rescale: None }
    }

    pub fn quadratic_bump(r0: f64, c0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidConfig(format!("r0 must be positive, got {r0}")));
        }
        if !(c0 > 0.0) || c0 >= std::f64::consts::E {
            return Err(Error::InvalidConfig(format!("c0 must lie in (0, e) for positivity, got {c0}")));
        }
        Ok(PotentialK { form: PotentialForm::QuadraticBump { r0, c0 }, rescale: None })
    }

    pub fn table(table: Table) -> Self {
        PotentialK { form: PotentialForm::UserTable(table), rescale: None }
    }

    /// `K_k`, the weight seen in coordinates stretched by `k`.
    pub fn rescaled(&self, k: f64) -> Self {
        let mut p = self.clone();
        p.rescale = Some(k * self.rescale.unwrap_or(1.0));
        p
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.form, PotentialForm::ConstantOne)
    }

    /// Guaranteed lower bound of `K`.
    pub fn k_min(&self) -> f64 {
        match &self.form {
            PotentialForm::ConstantOne => 1.0,
            PotentialForm::QuadraticBump { c0, .. } => 1.0 - c0 / std::f64::consts::E,
            PotentialForm::UserTable(t) => t.k.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// `(K, K', K'')` of the unscaled profile.
    fn profile(&self, r: f64) -> (f64, f64, f64) {
        match &self.form {
            PotentialForm::ConstantOne => (1.0, 0.0, 0.0),
            PotentialForm::QuadraticBump { r0, c0 } => {
                let s = r - r0;
                let e = (-s * s).exp();
                let s2 = s * s;
                (
                    1.0 - c0 * s2 * e,
                    -2.0 * c0 * s * (1.0 - s2) * e,
                    -2.0 * c0 * (1.0 - 5.0 * s2 + 2.0 * s2 * s2) * e,
                )
            }
            PotentialForm::UserTable(t) => t.eval3(r),
        }
    }

    /// `(K, K', K'')` at radius `r`, including the rescaling.
    pub fn eval_all(&self, r: f64) -> (f64, f64, f64) {
        match self.rescale {
            None => self.profile(r),
            Some(k) => {
                let (v, d, dd) = self.profile(r / k);
                (v, d / k, dd / (k * k))
            }
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_all(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval_all(r).1
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        self.eval_all(r).2
    }

    pub fn eval_at(&self, y: &[f64]) -> f64 {
        self.eval(norm(y))
    }

    /// `grad_y K(|y|) = K'(|y|) y/|y|`.
    pub fn grad(&self, y: &[f64]) -> Result<Point> {
        let r = norm(y);
        let d = self.derivative(r);
        if r == 0.0 {
            if d != 0.0 {
                return Err(Error::SingularGradient(d));
            }
            return Ok(vec![0.0; y.len()]);
        }
        Ok(y.iter().map(|v| d * v / r).collect())
    }

    /// `Delta K = K'' + (N-1) K'/r` at radius `r` in R^N.
    pub fn laplacian(&self, r: f64, dim: usize) -> Result<f64> {
        let (_, d, dd) = self.eval_all(r);
        if r == 0.0 {
            if d != 0.0 {
                return Err(Error::SingularGradient(d));
            }
            return Ok(dim as f64 * dd);
        }
        Ok(dd + (dim as f64 - 1.0) * d / r)
    }

    /// `(r0, c0)` for the bump form.
    pub fn bump_parameters(&self) -> Option<(f64, f64)> {
        match self.form {
            PotentialForm::QuadraticBump { r0, c0 } => Some((r0, c0)),
            _ => None,
        }
    }
}
