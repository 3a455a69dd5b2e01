//! Fits the reduced-energy constants to true inner-polygon energies at N = 7
//! and compares A with S/N.

use multibump::bubble::closed_moments;
use multibump::energy::{fit_expansion_constants, inner_polygon_energy, FitOptions, Sample};
use multibump::potential::PotentialK;
use std::time::Instant;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let (r0, c0) = (1.0, 1.0);
    let k = PotentialK::quadratic_bump(r0, c0)?;
    let mut samples = Vec::new();
    for n in [8usize, 12, 16] {
        for lf in [0.3, 0.45, 0.7] {
            for dt in [-0.02, 0.0, 0.02] {
                let lambda = lf * (n as f64).powf(5.0 / 3.0);
                let t = r0 + dt;
                let clock = Instant::now();
                let e = inner_polygon_energy(n, t, lambda, dim, &k, 1e-7, 1e-6)?;
                println!("n={n:2} lambda={lambda:8.3} t={t:.2}  I={:.10} +/- {:.1e}  cells={} ({:.2?})", e.value, e.error_estimate, e.cells_used, clock.elapsed());
                samples.push(Sample { t, lambda, n, value: e.value, base: 0.0, error: e.error_estimate });
            }
        }
    }
    let fit = fit_expansion_constants(&samples, r0, dim, &FitOptions { per_n_tilt: true, sigma: 0.1 })?;
    let want = closed_moments(dim)?.bubble_energy();
    println!("{:#?}", fit.constants);
    println!("A / (S/N) = {:.6}, rms residual {:.3e}, tilts {:?}", fit.constants.a / want, fit.rms_residual, fit.tilts);
    Ok(())
}
