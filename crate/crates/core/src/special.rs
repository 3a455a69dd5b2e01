//! Gamma/Beta closed forms in double precision (log-space to keep large
//! dimensions from overflowing).

use statrs::function::gamma::ln_gamma;

/// `ln B(a, b)` for `a, b > 0`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

pub fn beta(a: f64, b: f64) -> f64 {
    ln_beta(a, b).exp()
}

/// Surface area of the unit sphere S^{n-1} in R^n, i.e. `omega_{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    let h = n as f64 / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// Critical Sobolev exponent `2* = 2N/(N-2)`.
#[inline]
pub fn critical_exponent(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

/// Bubble normalisation `c_N = (N(N-2))^{(N-2)/4}`.
pub fn bubble_constant(dim: usize) -> f64 {
    let n = dim as f64;
    ((n - 2.0) / 4.0 * (n * (n - 2.0)).ln()).exp()
}
