//! Balance between the curvature of `K` and the attraction of the outer
//! polygon, which fixes the rescaled outer scale `mu_bar`.

use crate::bubble::closed_moments;
use crate::error::{Error, Result};
use crate::potential::{PotentialForm, PotentialK};
use crate::special::critical_exponent;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceSolution {
    pub k: usize,
    pub mu_bar: f64,
    pub r_bar: f64,
    /// Scale in original variables, `k mu_bar`.
    pub mu: f64,
    pub r0: f64,
    pub laplacian_k: f64,
    /// `sum_{j >= 2} |x_j - x_1|^{2-N}`.
    pub neighbor_sum: f64,
    /// Closed form with the two nearest neighbors only.
    pub nearest_neighbor_guess: f64,
    /// Relative defect of the balance relation at `mu_bar`.
    pub residual: f64,
    pub iterations: usize,
}

fn neighbor_sum(k: usize, r_bar: f64, dim: usize) -> f64 {
    (1..k).map(|j| (2.0 * r_bar * (j as f64 * PI / k as f64).sin()).powf(2.0 - dim as f64)).sum()
}

/// Relative defect `(lhs - rhs) / lhs` of the truncated balance relation
/// `-(Delta K) M2 / (2* N mu^3 k^2) = (N-2) c_N A_mass S / (2 mu^{N-1})`.
pub fn balance_residual(mu_bar: f64, k: usize, laplacian_k: f64, r_bar: f64, dim: usize) -> Result<f64> {
    let m = closed_moments(dim)?;
    let n = dim as f64;
    let lhs = -laplacian_k * m.m2 / (critical_exponent(dim) * n * mu_bar.powi(3) * (k * k) as f64);
    let rhs = (n - 2.0) * m.c_n * m.a_mass * neighbor_sum(k, r_bar, dim) / (2.0 * mu_bar.powf(n - 1.0));
    Ok((lhs - rhs) / lhs)
}

/// Solves the balance relation at the given `r0` by Newton iteration in
/// `ln mu_bar`, starting from the nearest-neighbor closed form.
pub fn solve_balance_at(k: usize, potential: &PotentialK, r0: f64, tol: f64, dim: usize) -> Result<BalanceSolution> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("balance needs k >= 2, got {k}")));
    }
    if dim < 5 {
        return Err(Error::InvalidConfig(format!("balance needs N >= 5, got {dim}")));
    }
    let lap = potential.laplacian(r0, dim)?;
    if !(lap < 0.0) {
        return Err(Error::NoBalance(lap));
    }
    let m = closed_moments(dim)?;
    let n = dim as f64;
    let r_bar = k as f64 * r0;
    let kk = (k * k) as f64;
    let coef = (n - 2.0) * critical_exponent(dim) * n * m.c_n * m.a_mass * kk / (2.0 * -lap * m.m2);
    let nn_sum = 2.0 * (2.0 * r_bar * (PI / k as f64).sin()).powf(2.0 - n);
    let guess = (coef * nn_sum).powf(1.0 / (n - 4.0));
    let sum = neighbor_sum(k, r_bar, dim);

    // g(s) = ln lhs - ln rhs with s = ln mu_bar; g'(s) = N - 4
    let g = |s: f64| (-lap * m.m2 / (critical_exponent(dim) * n * kk)).ln() - 3.0 * s
        - (((n - 2.0) * m.c_n * m.a_mass * sum / 2.0).ln() - (n - 1.0) * s);
    let mut s = guess.ln();
    let mut iterations = 0;
    loop {
        let step = -g(s) / (n - 4.0);
        s += step;
        iterations += 1;
        if step.abs() < tol || iterations >= 50 {
            break;
        }
    }
    let mu_bar = s.exp();
    let residual = balance_residual(mu_bar, k, lap, r_bar, dim)?;
    if residual.abs() > tol.max(1e-13) {
        return Err(Error::Degenerate(format!("balance residual {residual:e} above tolerance")));
    }
    Ok(BalanceSolution {
        k,
        mu_bar,
        r_bar,
        mu: k as f64 * mu_bar,
        r0,
        laplacian_k: lap,
        neighbor_sum: sum,
        nearest_neighbor_guess: guess,
        residual,
        iterations,
    })
}

/// Balance at the potential's own `r0`: the bump center, or the table node
/// where `K` peaks. `K = 1` has no balance.
pub fn solve_balance(k: usize, potential: &PotentialK, tol: f64, dim: usize) -> Result<BalanceSolution> {
    let r0 = match &potential.form {
        PotentialForm::ConstantOne => return Err(Error::NoBalance(0.0)),
        PotentialForm::QuadraticBump { r0, .. } => *r0,
        PotentialForm::UserTable(t) => {
            let i = (0..t.k.len()).fold(0, |best, i| if t.k[i] > t.k[best] { i } else { best });
            t.r[i]
        }
    };
    solve_balance_at(k, potential, r0, tol, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::loglog_fit;

    #[test]
    fn residual_is_small_and_guess_close() {
        let k = PotentialK::quadratic_bump(1.0, 1.0).unwrap();
        for dim in [5, 6, 7, 8] {
            let s = solve_balance(16, &k, 1e-12, dim).unwrap();
            assert!(s.residual.abs() < 1e-12);
            assert!(s.mu_bar > 0.0);
            assert!((s.mu - 16.0 * s.mu_bar).abs() < 1e-12 * s.mu);
            // the two nearest neighbors dominate the full sum
            assert!(s.nearest_neighbor_guess < s.mu_bar);
            assert!(s.nearest_neighbor_guess > 0.8 * s.mu_bar);
        }
    }

    #[test]
    fn exponent_over_small_k_matches_sum_oracle() {
        // slope of ln (k^2 S_k)^{1/3} over k = 8, 16, 32, summed independently
        const ORACLE: f64 = 0.631952979;
        let k = PotentialK::quadratic_bump(1.0, 1.0).unwrap();
        let ks = [8.0, 16.0, 32.0];
        let mus: Vec<f64> = ks.iter().map(|kk| solve_balance(*kk as usize, &k, 1e-12, 7).unwrap().mu_bar).collect();
        let fit = loglog_fit(&ks, &mus).unwrap();
        assert!((fit.slope - ORACLE).abs() < 1e-8, "{}", fit.slope);
    }

    #[test]
    fn local_exponent_tends_to_two_over_n_minus_four() {
        let k = PotentialK::quadratic_bump(1.0, 1.0).unwrap();
        for dim in [6, 7] {
            let a = solve_balance(256, &k, 1e-12, dim).unwrap().mu_bar;
            let b = solve_balance(512, &k, 1e-12, dim).unwrap().mu_bar;
            let want = 2.0 / (dim as f64 - 4.0);
            assert!(((b / a).log2() - want).abs() < 1e-3 * want);
        }
    }

    #[test]
    fn constant_potential_has_no_balance() {
        assert!(matches!(solve_balance(8, &PotentialK::constant_one(), 1e-12, 7), Err(Error::NoBalance(_))));
    }
}
