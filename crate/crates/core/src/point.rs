//! Small dense-vector helpers for points of R^N. Dimensions in this crate are
//! between 5 and 9, so plain `Vec<f64>` / `&[f64]` is used throughout.

pub type Point = Vec<f64>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn unit(dim: usize, axis: usize) -> Point {
    let mut e = vec![0.0; dim];
    e[axis] = 1.0;
    e
}

/// Unit vector orthogonal to `v` (which need not be normalized), chosen
/// deterministically: Gram-Schmidt against the coordinate axis where `v` is
/// smallest.
pub fn orthogonal_unit(v: &[f64]) -> Point {
    let n = norm(v);
    let axis = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut e = unit(v.len(), axis);
    if n > 0.0 {
        let c = v[axis] / (n * n);
        for (ei, vi) in e.iter_mut().zip(v) {
            *ei -= c * vi;
        }
    }
    let m = norm(&e);
    e.iter_mut().for_each(|x| *x /= m);
    e
}

/// Householder reflection that maps `e_1` onto the unit vector `target`.
/// Returns `None` when `target` already equals `e_1`.
pub fn householder_to(target: &[f64]) -> Option<Point> {
    let mut v = target.to_vec();
    v[0] -= 1.0;
    let nv = norm(&v);
    if nv < 1e-14 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(v)
}

/// Applies `I - 2 v v^T` in place.
pub fn reflect(v: &[f64], y: &mut [f64]) {
    let c = 2.0 * dot(v, y);
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= c * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_unit_is_orthonormal() {
        let v = [0.3, -1.0, 2.0, 0.0, 0.5];
        let e = orthogonal_unit(&v);
        assert!(dot(&e, &v).abs() < 1e-14);
        assert!((norm(&e) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn householder_maps_first_axis() {
        let t = [0.0, 0.6, 0.0, 0.8, 0.0];
        let v = householder_to(&t).unwrap();
        let mut e1 = unit(5, 0);
        reflect(&v, &mut e1);
        assert!(dist(&e1, &t) < 1e-14);
    }
}
