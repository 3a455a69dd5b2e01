//! Gram matrix of the orthogonality constraints on the inner polygon.

use multibump::potential::PotentialK;
use multibump::quadrature::QuadratureSpec;
use multibump::reduction::{gram_matrix, GluedConfig};
use multibump::symmetry::PolygonConfig;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let spec = QuadratureSpec::default().with_tol(1e-7, 1e-16);
    for (n, lambda) in [(1, 10.0), (2, 10.0), (2, 40.0), (4, 20.0)] {
        let cfg = GluedConfig::new(None, PolygonConfig::inner(n, 1.0, lambda, dim), PotentialK::constant_one())?;
        let g = gram_matrix(&cfg, &spec)?;
        println!(
            "n = {n}, lambda = {lambda}: diag {:?}\n  off-block ratio {:.2e}, in-block ratio {:.2e}, asymmetry {:.2e}, smallest eigenvalue {:.6}",
            (0..2 * n).map(|i| format!("{:.4e}", g.matrix[i][i])).collect::<Vec<_>>(),
            g.off_block_ratio,
            g.in_block_ratio,
            g.asymmetry,
            g.eigenvalues[0]
        );
    }
    Ok(())
}

