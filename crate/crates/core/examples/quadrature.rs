//! One integral four ways: the mass of a bubble by the radial, axial and
//! cylindrical charts, and a two-bubble overlap by the axial chart.

use multibump::bubble::{closed_moments, Bubble};
use multibump::energy::interaction;
use multibump::quadrature::{integrate_volume, Integrand, Peak, QuadratureSpec, Reduction};
use multibump::special::critical_exponent;

fn main() -> multibump::Result<()> {
    let dim = 5;
    let p = critical_exponent(dim) - 1.0;
    let u = Bubble::new(vec![0.0; dim], 1.0);
    let f = |y: &[f64]| u.eval(y).powf(p);
    let want = closed_moments(dim)?.a_mass;
    let charts = [
        Reduction::Radial1d { center: vec![0.0; dim], radius: None },
        Reduction::Axial2d { origin: vec![0.0; dim], axis: vec![1.0, 0.0, 0.0, 0.0, 0.0], radius: None },
        Reduction::Cylinder3d { plane: (0, 1), fold: 0 },
    ];
    for chart in charts {
        let spec = QuadratureSpec::default().with_tol(1e-8, 1e-10).with_reduction(chart.clone());
        let r = integrate_volume(&Integrand::new(dim, &f, dim as f64 + 2.0).with_peaks(vec![Peak::new(vec![0.0; dim], 1.0)]), &spec, None)?;
        println!("{chart:?}: {:.12} (err {:.1e}, cells {}), closed {:.12}", r.value, r.error_estimate, r.cells_used, want);
    }
    let b1 = Bubble::new(vec![0.0; dim], 5.0);
    let b2 = Bubble::new(vec![10.0, 0.0, 0.0, 0.0, 0.0], 5.0);
    let i = interaction(&b1, &b2, &QuadratureSpec::default().with_tol(1e-8, 1e-14))?;
    println!("interaction at mu d = {}: ratio to asymptotic form {:.6}", i.mu_d, i.asymptotic_ratio);
    Ok(())
}
