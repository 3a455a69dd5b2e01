/// Pairwise (tree) summation. The association order depends only on the
/// length of the slice, so results are reproducible regardless of how the
/// terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
