//! The energy functional `I(u) = 1/2 int |grad u|^2 - 1/2* int K |u|^{2*}`,
//! bubble interactions, the reduced-energy expansion, the balance relation
//! for the outer scale and the critical-point search over `(t, lambda)`.

mod balance;
mod critical;
mod expansion;

pub use balance::{balance_residual, solve_balance, solve_balance_at, BalanceSolution};
pub use critical::{find_critical_point, Classification, CriticalPoint, Window};
pub use expansion::{
    critical_lambda, expansion_energy, fit_expansion_constants, inner_polygon_energy, ExpansionConstants,
    ExpansionFit, FitOptions, QuadraticForm, ReducedEnergy, Sample,
};

use crate::bubble::{Bubble, SmoothField, Tower};
use crate::error::{Error, Result};
use crate::point::{dist, norm_sq, sub};
use crate::potential::PotentialK;
use crate::quadrature::{integrate_volume, IntegralResult, Integrand, Peak, QuadratureSpec, Reduction};
use crate::special::critical_exponent;
use serde::{Deserialize, Serialize};

/// Energy density `1/2 |grad u|^2 - K |u|^{2*} / 2*` of a field.
pub fn energy_density(u: &dyn SmoothField, k: &PotentialK, y: &[f64]) -> f64 {
    let p = critical_exponent(u.dim());
    0.5 * norm_sq(&u.grad(y)) - k.eval_at(y) * u.value(y).abs().powf(p) / p
}

/// `I(u)` for a field with declared peaks. The density decays like
/// `|y|^{-2(N-1)}` for bubble-like fields.
pub fn energy_of_field(u: &dyn SmoothField, peaks: Vec<Peak>, k: &PotentialK, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let dim = u.dim();
    let f = |y: &[f64]| energy_density(u, k, y);
    let integrand = Integrand::new(dim, &f, 2.0 * (dim as f64 - 1.0)).with_peaks(peaks);
    integrate_volume(&integrand, spec, None)
}

/// `I(u)` for a tower; peaks are taken from its bubbles.
pub fn energy(u: &Tower, k: &PotentialK, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let peaks = u.bubbles.iter().map(|b| Peak::new(b.center.clone(), 1.0 / b.scale)).collect();
    energy_of_field(u, peaks, k, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub integral: IntegralResult,
    /// `mu d` with `mu` the geometric mean of the two scales.
    pub mu_d: f64,
    /// `value (mu d)^{N-2} / (c_N A_mass)`; tends to one as `mu d` grows.
    pub asymptotic_ratio: f64,
}

/// `int U_1^{2*-1} U_2`, integrated in polar coordinates about the line
/// through the two centers. The reduction in `spec` is replaced.
pub fn interaction(b1: &Bubble, b2: &Bubble, spec: &QuadratureSpec) -> Result<Interaction> {
    if b1.dim != b2.dim {
        return Err(Error::InvalidConfig("bubbles must share the dimension".into()));
    }
    let d = dist(&b1.center, &b2.center);
    if d == 0.0 {
        return Err(Error::Degenerate("interaction of coincident centers".into()));
    }
    let dim = b1.dim;
    let p = critical_exponent(dim) - 1.0;
    let f = |y: &[f64]| b1.eval(y).powf(p) * b2.eval(y);
    let integrand = Integrand::new(dim, &f, 2.0 * dim as f64).with_peaks(vec![
        Peak::new(b1.center.clone(), 1.0 / b1.scale),
        Peak::new(b2.center.clone(), 1.0 / b2.scale),
    ]);
    let axis = sub(&b2.center, &b1.center);
    let axis: Vec<f64> = axis.iter().map(|v| v / d).collect();
    let spec = spec.clone().with_reduction(Reduction::Axial2d { origin: b1.center.clone(), axis, radius: None });
    let integral = integrate_volume(&integrand, &spec, None)?;
    let mu = (b1.scale * b2.scale).sqrt();
    let n = dim as f64;
    let a_mass = (n - 2.0) * crate::special::sphere_area(dim) * b1.cn();
    Ok(Interaction {
        integral,
        mu_d: mu * d,
        asymptotic_ratio: integral.value * (mu * d).powf(n - 2.0) / (b1.cn() * a_mass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::closed_moments;

    fn shifted(dim: usize, x0: f64, mu: f64) -> Bubble {
        let mut c = vec![0.0; dim];
        c[0] = x0;
        Bubble::new(c, mu)
    }

    #[test]
    fn single_bubble_energy_is_s_over_n() {
        for dim in [5, 6, 7] {
            let m = closed_moments(dim).unwrap();
            let b = Bubble::standard(dim);
            let t = Tower::new(dim, vec![b]);
            let spec = QuadratureSpec::radial(vec![0.0; dim]).with_tol(1e-10, 1e-10);
            let e = energy(&t, &PotentialK::constant_one(), &spec).unwrap();
            let want = m.bubble_energy();
            assert!((e.value - want).abs() < 1e-8 * want, "N={dim}: {} vs {want}", e.value);
        }
    }

    #[test]
    fn energy_is_translation_and_scale_invariant() {
        let dim = 5;
        let k = PotentialK::constant_one();
        let mut vals = Vec::new();
        for (x0, mu) in [(0.3, 1.7), (-1.1, 0.6)] {
            let b = shifted(dim, x0, mu);
            let spec = QuadratureSpec::radial(b.center.clone()).with_tol(1e-9, 1e-10);
            vals.push(energy(&Tower::new(dim, vec![b]), &k, &spec).unwrap());
        }
        assert!((vals[0].value - vals[1].value).abs() <= vals[0].error_estimate + vals[1].error_estimate + 1e-9);
    }

    #[test]
    fn two_bubble_deficit_matches_interaction() {
        let dim = 5;
        let m = closed_moments(dim).unwrap();
        let (b1, b2) = (shifted(dim, 0.0, 4.0), shifted(dim, 5.0, 4.0));
        let spec = QuadratureSpec::axial(vec![0.0; dim], crate::point::unit(dim, 0)).with_tol(1e-10, 1e-10);
        let e = energy(&Tower::new(dim, vec![b1.clone(), b2.clone()]), &PotentialK::constant_one(), &spec).unwrap();
        let deficit = 2.0 * m.bubble_energy() - e.value;
        let eps = interaction(&b1, &b2, &QuadratureSpec::default().with_tol(1e-10, 1e-12)).unwrap();
        assert!(deficit > 0.0);
        assert!((deficit / eps.integral.value - 1.0).abs() < 0.02, "{deficit} vs {}", eps.integral.value);
    }

    #[test]
    fn interaction_symmetric_scaling_and_monotone() {
        let dim = 5;
        let spec = QuadratureSpec::default().with_tol(1e-9, 1e-13);
        let (b1, b2) = (shifted(dim, 0.0, 2.0), shifted(dim, 3.0, 2.0));
        let i12 = interaction(&b1, &b2, &spec).unwrap().integral;
        let i21 = interaction(&b2, &b1, &spec).unwrap().integral;
        assert!((i12.value - i21.value).abs() <= 1e-7 * i12.value);
        // interaction(mu, d) = interaction(1, mu d)
        let unit = interaction(&shifted(dim, 0.0, 1.0), &shifted(dim, 6.0, 1.0), &spec).unwrap().integral;
        assert!((i12.value - unit.value).abs() <= 1e-7 * unit.value);
        let mut last = f64::INFINITY;
        for d in [1.0, 2.0, 4.0] {
            let v = interaction(&b1, &shifted(dim, d, 2.0), &spec).unwrap().integral.value;
            assert!(v < last);
            last = v;
        }
        assert!(matches!(interaction(&b1, &b1, &spec), Err(Error::Degenerate(_))));
    }

    #[test]
    fn interaction_ratio_approaches_one() {
        let dim = 5;
        let spec = QuadratureSpec::default().with_tol(1e-8, 1e-14);
        let r = interaction(&shifted(dim, 0.0, 1.0), &shifted(dim, 50.0, 1.0), &spec).unwrap();
        assert!((r.asymptotic_ratio - 1.0).abs() < 0.02, "{}", r.asymptotic_ratio);
    }
}
