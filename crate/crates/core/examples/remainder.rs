//! Growth of the nonlinear remainder R_n(s xi) as s -> 0: exponent 2 where
//! the ansatz dominates the perturbation, 2* - 1 where the perturbation does.

use multibump::bubble::{KernelKind, SmoothField};
use multibump::point::unit;
use multibump::potential::PotentialK;
use multibump::reduction::{remainder_exponent, star_profile, GluedConfig};

fn main() -> multibump::Result<()> {
    let dim = 7;
    let cfg = GluedConfig::balanced(8, 8, 1.0, 32.0, PotentialK::quadratic_bump(1.0, 1.0)?, dim)?;
    let s = [1e-1, 1e-2, 1e-3];
    let xi0 = star_profile(&cfg)?;
    for r in [1.0, 10.0, 100.0, 1000.0] {
        let y: Vec<f64> = unit(dim, 4).iter().map(|v| v * r).collect();
        let p = remainder_exponent(&xi0, &cfg, &y, &s)?;
        println!("star profile at |y| = {r:6}: xi0/B = {:.2e}, exponent {:.5}", p.perturbation_ratio, p.fit.slope);
    }
    let z = cfg.inner_bubbles()[0].kernel_field(KernelKind::Z2)?;
    let y = cfg.inner.vertex(0);
    let p = remainder_exponent(&|y| z.value(y), &cfg, &y, &s)?;
    println!("Z_(1,2) at p_1: exponent {:.5}", p.fit.slope);
    Ok(())
}
