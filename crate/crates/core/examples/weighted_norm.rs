//! Lower bounds for the star and double-star weighted sup norms.

use multibump::bubble::Bubble;
use multibump::norms::{weighted_sup_norm, SearchBudget, WeightKind, WeightSpec};
use multibump::symmetry::PolygonConfig;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let poly = PolygonConfig::inner(4, 1.0, 30.0, dim);
    let centers: Vec<_> = (0..4).map(|j| poly.vertex(j)).collect();
    let bubbles: Vec<_> = (0..4).map(|j| Bubble::on_polygon(&poly, j)).collect();
    let sum = |y: &[f64]| bubbles.iter().map(|b| b.eval(y)).sum::<f64>();
    let tau = WeightSpec::inner_tau(dim);
    // the sum of bubbles against the star weight with decay N-2
    let star = WeightSpec::new(centers.clone(), 30.0, tau, WeightKind::Star)?.with_decay(dim as f64 - 2.0);
    let est = weighted_sup_norm(&sum, &star, &SearchBudget::default())?;
    println!("||sum U||_* >= {:.6} at {:?} (converged {})", est.lower_bound, est.argmax, est.converged);
    let ds = WeightSpec::new(centers, 30.0, tau, WeightKind::DoubleStar)?;
    let f = |y: &[f64]| sum(y).powf(1.8);
    let est = weighted_sup_norm(&f, &ds, &SearchBudget::default())?;
    println!("||(sum U)^(2*-1)||_** >= {:.6} (converged {})", est.lower_bound, est.converged);
    Ok(())
}
