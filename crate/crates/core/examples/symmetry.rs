//! Polygons, the two symmetry classes and group averaging.

use multibump::symmetry::{cell_index, symmetrize, PolygonConfig, SymmetryGroup, SymmetrizedPoints};
use std::sync::Arc;

fn main() -> multibump::Result<()> {
    let dim = 7;
    let outer = PolygonConfig::outer(8, 1.0, 10.0, dim);
    let inner = PolygonConfig::inner(6, 1.0, 20.0, dim);
    println!("outer vertex 1: {:?}", outer.vertex(1));
    println!("inner vertex 1: {:?}", inner.vertex(1));

    let h = SymmetryGroup::h_class(8, dim);
    let x = SymmetryGroup::x_class(8, 6, dim);
    println!("|H| = {}, |X| = {}", h.order(), x.order());

    let f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(|y: &[f64]| y[0] + 2.0 * y[1] * y[1] + y[3]);
    let fs = symmetrize(f, &h);
    let y = [0.3, 0.4, 0.1, -0.2, 0.0, 0.5, 0.0];
    for g in h.elements().iter().take(4) {
        println!("f*(g y) = {:.15}", fs(&h.apply(g, &y)));
    }
    let orbit = SymmetrizedPoints::orbit(&y, &h);
    println!("orbit total weight {}", orbit.total_weight());
    println!("cell of y in the outer polygon: {}", cell_index(&outer, &y));
    Ok(())
}
