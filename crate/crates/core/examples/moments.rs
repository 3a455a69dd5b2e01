//! Moment table of the standard bubble: Beta closed forms, the 60-digit
//! golden values and an independent radial quadrature.

use multibump::bubble::moments::golden_max_deviation;
use multibump::bubble::{closed_moments, quadrature_moments};
use multibump::quadrature::QuadratureSpec;

fn main() -> multibump::Result<()> {
    let spec = QuadratureSpec::default().with_tol(1e-10, 1e-13);
    for dim in [5, 6, 7] {
        let c = closed_moments(dim)?;
        let (q, _) = quadrature_moments(dim, &spec)?;
        let n = dim as f64;
        println!("N = {dim}: c_N = {:.12}, omega = {:.12}", c.c_n, c.omega);
        println!("  A_mass  closed {:.12e}  quad {:.12e}  (N-2) omega c_N {:.12e}", c.a_mass, q.a_mass, (n - 2.0) * c.omega * c.c_n);
        println!("  B_flux  closed {:.12e}  quad {:.12e}", c.b_flux, q.b_flux);
        println!("  psi0_m2 closed {:.12e}  quad {:.12e}", c.psi0_m2, q.psi0_m2);
        println!("  S/N = {:.12}", c.bubble_energy());
        if let Some((name, d)) = golden_max_deviation(&c) {
            println!("  worst golden deviation: {name} {d:.2e}");
        }
    }
    Ok(())
}
