//! The bubble solves -Delta U = U^{2*-1}; its scale and translation
//! derivatives lie in the kernel of the linearized operator.

use multibump::bubble::{nonlinear_power, Bubble, KernelKind, SmoothField, Tower};
use multibump::potential::PotentialK;
use multibump::reduction::apply_lk;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> multibump::Result<()> {
    let dim = 6;
    let u = Bubble::new(vec![0.2, 0.0, -0.1, 0.0, 0.0, 0.3], 1.7);
    let p = nonlinear_power(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let lhs = -u.eval_laplacian(&y);
        let rhs = u.eval(&y).powf(p);
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    println!("max relative defect of -Delta U = U^(2*-1) over 1000 points: {worst:.2e}");

    let tower = Tower::new(dim, vec![u.clone()]);
    let k = PotentialK::constant_one();
    for kind in [KernelKind::Psi0, KernelKind::Psi(0), KernelKind::Psi(1)] {
        let z = u.kernel_field(kind)?;
        let y = [0.5, -0.3, 0.2, 0.1, 0.0, 0.4];
        println!("L psi for {kind:?}: {:.3e} (psi = {:.3e})", apply_lk(&z, &tower, &k, &y), z.value(&y));
    }
    Ok(())
}
