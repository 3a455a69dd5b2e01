//! Center-anchored weighted sup norms.
//!
//! The weight is `sum_j mu^p / (1 + mu |y - x_j|)^q` with `(p, q) =
//! ((N-2)/2, (N-2)/2 + tau)` for the star kind and `((N+2)/2, (N+2)/2 + tau)`
//! for the double-star kind. Sup norms are estimated from below by pattern
//! search; every reported value is the ratio at an evaluated point.

use crate::error::{Error, Result};
use crate::point::{dist, norm, Point};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    Star,
    DoubleStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub centers: Vec<Point>,
    pub scale: f64,
    pub tau: f64,
    pub kind: WeightKind,
    pub dim: usize,
    /// Replaces the decay power `q` (used for decay bounds of the ansatz).
    #[serde(default)]
    pub decay_override: Option<f64>,
}

/// Default `sigma_bar` added to `(N-4)/(N-2)` for the outer-problem norm.
pub const DEFAULT_SIGMA_BAR: f64 = 0.01;

impl WeightSpec {
    pub fn new(centers: Vec<Point>, scale: f64, tau: f64, kind: WeightKind) -> Result<Self> {
        let dim = centers.first().map(|c| c.len()).ok_or_else(|| Error::InvalidConfig("weight needs at least one center".into()))?;
        let spec = WeightSpec { centers, scale, tau, kind, dim, decay_override: None };
        spec.validate()?;
        Ok(spec)
    }

    /// `tau = (N-4)/(N-2) + sigma_bar`.
    pub fn outer_tau(dim: usize, sigma_bar: f64) -> f64 {
        (dim as f64 - 4.0) / (dim as f64 - 2.0) + sigma_bar
    }

    /// `tau = (N-4)/(N-2)`.
    pub fn inner_tau(dim: usize) -> f64 {
        (dim as f64 - 4.0) / (dim as f64 - 2.0)
    }

    pub fn with_decay(mut self, q: f64) -> Self {
        self.decay_override = Some(q);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let half = (self.dim as f64 - 2.0) / 2.0;
        if !(self.tau > 0.0 && self.tau < half) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0, {half}), got {}", self.tau)));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidConfig(format!("weight scale must be positive, got {}", self.scale)));
        }
        if self.centers.iter().any(|c| c.len() != self.dim) {
            return Err(Error::InvalidConfig("weight centers must share the dimension".into()));
        }
        Ok(())
    }

    /// `(p, q)`: prefactor power of the scale and decay power.
    pub fn powers(&self) -> (f64, f64) {
        let n = self.dim as f64;
        let p = match self.kind {
            WeightKind::Star => (n - 2.0) / 2.0,
            WeightKind::DoubleStar => (n + 2.0) / 2.0,
        };
        (p, self.decay_override.unwrap_or(p + self.tau))
    }
}

pub fn weight_value(spec: &WeightSpec, y: &[f64]) -> f64 {
    let (p, q) = spec.powers();
    let mu = spec.scale;
    let pre = mu.powf(p);
    spec.centers.iter().map(|c| pre * (1.0 + mu * dist(y, c)).powf(-q)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Ratio evaluations allowed per start.
    pub evaluations_per_start: usize,
    /// Relative agreement required between half and full budget.
    pub rel_tol: f64,
    /// Additional starts `(point, initial step)`.
    #[serde(default)]
    pub extra_starts: Vec<(Point, f64)>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { evaluations_per_start: 2000, rel_tol: 1e-3, extra_starts: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormEstimate {
    /// Largest ratio `|f| / weight` found: a lower bound for the norm.
    pub lower_bound: f64,
    pub argmax: Point,
    /// Best value using half the per-start budget.
    pub half_budget_value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Pattern search from `start` along coordinate directions, returning the best
/// point and value after `budget` evaluations and after `budget / 2`.
fn compass_search(g: &(dyn Fn(&[f64]) -> f64 + Sync), start: &[f64], step: f64, budget: usize) -> (f64, Point, f64, usize) {
    let dim = start.len();
    let mut x = start.to_vec();
    let mut fx = g(&x);
    let mut evals = 1;
    let mut half_value = fx;
    let mut h = step;
    let min_step = step * 1e-7;
    while evals < budget && h > min_step {
        let mut best = (fx, None::<Point>);
        'dirs: for i in 0..dim {
            for s in [1.0, -1.0] {
                if evals >= budget {
                    break 'dirs;
                }
                let mut y = x.clone();
                y[i] += s * h;
                let v = g(&y);
                evals += 1;
                if evals <= budget / 2 {
                    half_value = half_value.max(v);
                }
                if v > best.0 {
                    best = (v, Some(y));
                }
            }
        }
        match best.1 {
            Some(y) => {
                x = y;
                fx = best.0;
                // expand a little after a successful move
                h *= 1.5;
            }
            None => h *= 0.5,
        }
    }
    (fx, x, half_value, evals)
}

/// Lower bound of `sup |f| / weight` by multi-start pattern search. Starts:
/// every center, midpoints of each center and its nearest neighbor, a
/// far-field ring, and any extra starts in `budget`.
pub fn weighted_sup_norm(f: &(dyn Fn(&[f64]) -> f64 + Sync), spec: &WeightSpec, budget: &SearchBudget) -> Result<SupNormEstimate> {
    spec.validate()?;
    let dim = spec.dim;
    let mu = spec.scale;
    let mut starts: Vec<(Point, f64)> = Vec::new();
    for c in &spec.centers {
        starts.push((c.clone(), 0.5 / mu));
    }
    for (i, c) in spec.centers.iter().enumerate() {
        let nearest = spec
            .centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .min_by(|a, b| dist(c, a.1).total_cmp(&dist(c, b.1)).then(a.0.cmp(&b.0)));
        if let Some((_, d)) = nearest {
            let m: Point = c.iter().zip(d).map(|(a, b)| 0.5 * (a + b)).collect();
            starts.push((m, 0.25 * dist(c, d).max(1.0 / mu)));
        }
    }
    let reach = spec.centers.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let ring = 2.0 * reach + 4.0 / mu;
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut y = vec![0.0; dim];
            y[i] = s * ring;
            starts.push((y, 0.25 * ring));
        }
    }
    starts.extend(budget.extra_starts.iter().cloned());

    let g = |y: &[f64]| f(y).abs() / weight_value(spec, y);
    let runs: Vec<(f64, Point, f64, usize)> = starts
        .par_iter()
        .map(|(x, h)| compass_search(&g, x, *h, budget.evaluations_per_start.max(2)))
        .collect();
    // lowest start index wins ties
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    let half = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    let value = runs[best].0;
    Ok(SupNormEstimate {
        lower_bound: value,
        argmax: runs[best].1.clone(),
        half_budget_value: half,
        converged: (value - half).abs() <= budget.rel_tol * value.abs(),
        evaluations: runs.iter().map(|r| r.3).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::Bubble;

    fn spec(centers: Vec<Point>, mu: f64, kind: WeightKind) -> WeightSpec {
        let dim = centers[0].len();
        WeightSpec::new(centers, mu, WeightSpec::outer_tau(dim, DEFAULT_SIGMA_BAR), kind).unwrap()
    }

    #[test]
    fn weight_at_center_and_midpoint() {
        let s = spec(vec![vec![0.0; 5]], 3.0, WeightKind::Star);
        assert!((weight_value(&s, &[0.0; 5]) - 3f64.powf(1.5)).abs() < 1e-14);
        let d = 2.0;
        let s = spec(vec![vec![0.0; 5], vec![d, 0.0, 0.0, 0.0, 0.0]], 3.0, WeightKind::Star);
        let (_, q) = s.powers();
        let want = 2.0 * 3f64.powf(1.5) * (1.0 + 3.0 * d / 2.0).powf(-q);
        assert!((weight_value(&s, &[1.0, 0.0, 0.0, 0.0, 0.0]) - want).abs() < 1e-14 * want);
    }

    #[test]
    fn tau_range_enforced() {
        assert!(WeightSpec::new(vec![vec![0.0; 5]], 1.0, 1.5, WeightKind::Star).is_err());
        assert!(WeightSpec::new(vec![vec![0.0; 5]], 1.0, 0.0, WeightKind::Star).is_err());
    }

    #[test]
    fn norm_of_weight_is_one() {
        let s = spec(vec![vec![0.0; 5], vec![1.0, 0.0, 0.0, 0.0, 0.0]], 4.0, WeightKind::DoubleStar);
        let f = |y: &[f64]| weight_value(&s, y);
        let e = weighted_sup_norm(&f, &s, &SearchBudget::default()).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-14);
        let f3 = |y: &[f64]| -3.0 * weight_value(&s, y);
        let e3 = weighted_sup_norm(&f3, &s, &SearchBudget::default()).unwrap();
        assert!((e3.lower_bound - 3.0).abs() < 1e-13);
    }

    #[test]
    fn single_bubble_against_radial_oracle() {
        let dim = 5;
        let mu = 2.0;
        let s = spec(vec![vec![0.0; dim]], mu, WeightKind::Star);
        let b = Bubble::new(vec![0.0; dim], mu);
        let f = |y: &[f64]| b.eval(y);
        let e = weighted_sup_norm(&f, &s, &SearchBudget::default()).unwrap();
        // radial profile in s = mu |z|, maximized by golden section
        let (_, q) = s.powers();
        let a = (dim as f64 - 2.0) / 2.0;
        let h = |t: f64| b.cn() * (1.0 + t).powf(q) * (1.0 + t * t).powf(-a);
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - gr * (hi - lo);
            let m2 = lo + gr * (hi - lo);
            if h(m1) < h(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let want = h(0.5 * (lo + hi));
        assert!(e.lower_bound <= want * (1.0 + 1e-12));
        assert!((e.lower_bound - want).abs() < 1e-6 * want, "{} vs {want}", e.lower_bound);
        assert!(e.converged);
    }

    #[test]
    fn more_budget_never_lowers_the_estimate() {
        let s = spec(vec![vec![0.0; 5], vec![0.0, 2.0, 0.0, 0.0, 0.0]], 3.0, WeightKind::Star);
        let f = |y: &[f64]| (y[0] * 3.0).sin() * (-(crate::point::norm_sq(y)) / 4.0).exp();
        let mut last = 0.0;
        for b in [10, 40, 160, 640] {
            let budget = SearchBudget { evaluations_per_start: b, ..Default::default() };
            let e = weighted_sup_norm(&f, &s, &budget).unwrap();
            assert!(e.lower_bound >= last);
            last = e.lower_bound;
        }
    }
}
