//! Stationary point of the reduced energy: closed form against Newton.

use multibump::energy::{critical_lambda, expansion_energy, find_critical_point, ExpansionConstants, Window};

fn main() -> multibump::Result<()> {
    let c = ExpansionConstants { a: 1.0, b1: 2.0, b2: 0.7, b3: 3.0, sigma: 0.1, r0: 1.0, dim: 7 };
    for n in [8, 12, 16, 24] {
        let f = |t: f64, l: f64| expansion_energy(t, l, n, &c, 0.0);
        let w = Window::around(c.r0, 0.1, 0.5, 3.0, n, c.dim);
        let p = find_critical_point(&f, &w, 1e-12)?;
        let want = critical_lambda(&c, n);
        println!(
            "n = {n:2}: t* - r0 = {:+.2e}, lambda* = {:.10} (closed {:.10}), {:?} after {} steps",
            p.t - c.r0,
            p.lambda,
            want,
            p.classification,
            p.iterations
        );
    }
    Ok(())
}
