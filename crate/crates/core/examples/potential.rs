//! The prescribed curvature K(|y|): the quadratic bump and a tabulated
//! profile with its Laplacian at the peak.

use multibump::potential::{PotentialK, Table};

fn main() -> multibump::Result<()> {
    let dim = 7;
    let bump = PotentialK::quadratic_bump(1.0, 0.5)?;
    for r in [0.8, 1.0, 1.2] {
        println!("bump K({r}) = {:.6}, K' = {:.6}", bump.eval(r), bump.derivative(r));
    }
    println!("bump Delta K at r0 = {:.6}", bump.laplacian(1.0, dim)?);

    let r: Vec<f64> = (0..41).map(|i| 0.5 + 0.025 * i as f64).collect();
    let k: Vec<f64> = r.iter().map(|x| 1.0 - 0.5 * (x - 1.0) * (x - 1.0)).collect();
    let table = PotentialK::table(Table::new(r, k)?);
    println!("table Delta K at r0 = {:.6}", table.laplacian(1.0, dim)?);
    Ok(())
}
