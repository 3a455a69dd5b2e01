//! The balance relation fixing mu_bar(k), and its growth exponent.

use multibump::energy::solve_balance;
use multibump::potential::PotentialK;
use multibump::regression::loglog_fit;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let pot = PotentialK::quadratic_bump(1.0, 1.0)?;
    let ks = [8usize, 16, 32, 64, 128, 256, 512];
    let mut mb = Vec::new();
    for &k in &ks {
        let s = solve_balance(k, &pot, 1e-12, dim)?;
        println!("k = {k:4}: mu_bar = {:.10}, mu = {:.6}, nearest-neighbor guess {:.10}", s.mu_bar, s.mu, s.nearest_neighbor_guess);
        mb.push(s.mu_bar);
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let fit = loglog_fit(&x[..3], &mb[..3])?;
    println!("exponent over k = 8, 16, 32: {:.6} (limit 2/(N-4) = {:.6})", fit.slope, 2.0 / (dim as f64 - 4.0));
    for w in 0..ks.len() - 1 {
        println!("local exponent {} -> {}: {:.6}", ks[w], ks[w + 1], (mb[w + 1] / mb[w]).log2());
    }
    Ok(())
}
