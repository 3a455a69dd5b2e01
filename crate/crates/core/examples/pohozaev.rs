//! Local Pohozaev identities on an off-center ball: exact kernel pairs
//! balance, while xi = u leaves the defect of its own equation.

use multibump::bubble::{Bubble, KernelKind, SmoothField};
use multibump::pohozaev::{pohozaev_dilation, pohozaev_translation, SymmetryHint};
use multibump::potential::PotentialK;
use multibump::quadrature::{Peak, QuadratureSpec};

fn main() -> multibump::Result<()> {
    let dim = 5;
    let u = Bubble::standard(dim);
    let k = PotentialK::constant_one();
    let center = vec![0.4, 0.0, 0.0, 0.0, 0.0];
    let hint = SymmetryHint::Axial(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    let spec = QuadratureSpec::default().with_tol(1e-10, 1e-13);
    let peaks = vec![Peak::new(vec![0.0; dim], 1.0)];
    let psi0 = u.kernel_field(KernelKind::Psi0)?;
    let psi1 = u.kernel_field(KernelKind::Psi(0))?;
    let fields: [(&str, &dyn SmoothField); 3] = [("U", &u), ("psi0", &psi0), ("psi1", &psi1)];
    for delta in [0.5, 0.8] {
        for (name, xi) in fields {
            let t = pohozaev_translation(&u, xi, &k, &center, delta, 0, &hint, peaks.clone(), &spec)?;
            let d = pohozaev_dilation(&u, xi, &k, &center, delta, &[0.0; 5], &hint, peaks.clone(), &spec)?;
            println!(
                "delta {delta}, xi = {name:4}: translation rel. residual {:.2e}, dilation {:.2e}",
                t.relative_residual, d.relative_residual
            );
        }
    }
    Ok(())
}
