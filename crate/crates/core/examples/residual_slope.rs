//! Decay of the ansatz error `l_n` in the double-star norm as lambda sweeps
//! one decade of the inner window (k = n = 8, N = 7).

use multibump::norms::SearchBudget;
use multibump::potential::PotentialK;
use multibump::reduction::{lambda_window, residual_decomposition, residual_sweep, GluedConfig};
use std::time::Instant;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let (k, n) = (8, 8);
    let pot = PotentialK::quadratic_bump(1.0, 1.0)?;
    let (lo, hi) = lambda_window(n, dim, 1.0, 10.0);
    let lambdas: Vec<f64> = (0..6).map(|i| lo * (hi / lo).powf(i as f64 / 5.0)).collect();
    let make = |l: f64| GluedConfig::balanced(k, n, 1.0, l, pot.clone(), dim);

    let cfg = make(lo)?;
    let p = cfg.inner.vertex(0);
    let j = residual_decomposition(&cfg, &p);
    println!("at p_1, lambda = {lo}: J1 = {:.4e}, J2 = {:.4e}, J3 = {:.4e}", j.j1, j.j2, j.j3);

    let clock = Instant::now();
    let sweep = residual_sweep(&make, &lambdas, &SearchBudget::default())?;
    println!("lambda,norm_lower_bound,converged");
    for r in &sweep.rows {
        println!("{},{:e},{}", r.lambda, r.norm_lower_bound, r.converged);
    }
    println!("slope {:.4}, R^2 {:.5} ({:.1?})", sweep.fit.slope, sweep.fit.r_squared, clock.elapsed());
    Ok(())
}
