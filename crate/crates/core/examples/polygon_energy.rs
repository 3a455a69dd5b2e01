//! Energy of a k-gon of bubbles against k single-bubble energies, and the
//! two-bubble deficit against the interaction integral.

use multibump::bubble::{closed_moments, Bubble, Tower};
use multibump::energy::{energy, interaction, solve_balance};
use multibump::potential::PotentialK;
use multibump::quadrature::{QuadratureSpec, Reduction};
use multibump::symmetry::PolygonConfig;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let pot = PotentialK::quadratic_bump(1.0, 1.0)?;
    let s = closed_moments(dim)?.bubble_energy();
    for k in [8, 16] {
        let b = solve_balance(k, &pot, 1e-12, dim)?;
        let poly = PolygonConfig::outer(k, b.r0, b.mu, dim);
        let spec = QuadratureSpec::default().with_tol(1e-7, 1e-8).with_reduction(Reduction::Cylinder3d { plane: (0, 1), fold: k });
        let e = energy(&Tower::from_polygon(&poly)?, &pot, &spec)?;
        println!("k = {k}, mu = {:.4}: I = {:.10}, I / (k S/N) = {:.10}", b.mu, e.value, e.value / (k as f64 * s));
    }

    let dim = 5;
    let b1 = Bubble::new(vec![0.0; dim], 1.0);
    let b2 = Bubble::new(vec![20.0, 0.0, 0.0, 0.0, 0.0], 1.0);
    let one = PotentialK::constant_one();
    let spec = QuadratureSpec::default().with_tol(1e-10, 1e-14).with_reduction(Reduction::Axial2d {
        origin: vec![0.0; dim],
        axis: vec![1.0, 0.0, 0.0, 0.0, 0.0],
        radius: None,
    });
    let pair = energy(&Tower::new(dim, vec![b1.clone(), b2.clone()]), &one, &spec)?;
    let i = interaction(&b1, &b2, &QuadratureSpec::default().with_tol(1e-10, 1e-16))?;
    let s5 = closed_moments(dim)?.bubble_energy();
    println!("2 S/N - I(U1 + U2) = {:.6e}, interaction = {:.6e}", 2.0 * s5 - pair.value, i.integral.value);
    Ok(())
}
