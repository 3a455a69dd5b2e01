//! Kernel coefficients (b0, b1) of fields near a bubble after rescaling.

use multibump::bubble::Bubble;
use multibump::pohozaev::SymmetryHint;
use multibump::quadrature::QuadratureSpec;
use multibump::reduction::kernel_projection;
use multibump::symmetry::PolygonConfig;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let poly = PolygonConfig::inner(4, 1.0, 3.0, dim);
    let b = Bubble::on_polygon(&poly, 1);
    let e = poly.radial_direction(1);
    let spec = QuadratureSpec::default().with_tol(1e-9, 1e-14);

    let c = kernel_projection(&|y| b.d_scale(y), &b, &SymmetryHint::Radial, &spec)?;
    println!("dU/dmu:        b0 = {:.10} (1/mu = {:.10}), b1 = {:.2e}", c.b0, 1.0 / b.scale, c.b1);
    let grad_e = |y: &[f64]| -b.eval_grad(y).iter().zip(&e).map(|(g, v)| g * v).sum::<f64>();
    let c = kernel_projection(&grad_e, &b, &SymmetryHint::Axial(e.clone()), &spec)?;
    println!("radial shift:  b0 = {:.2e}, b1 = {:.10} (-mu = {})", c.b0, c.b1, -b.scale);
    let c = kernel_projection(&|y| b.eval(y), &b, &SymmetryHint::Radial, &spec)?;
    println!("U itself:      b0 = {:.3e}, b1 = {:.2e}, relative residual {:.4}", c.b0, c.b1, c.relative_residual);
    Ok(())
}
