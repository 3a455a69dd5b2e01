//! Least-squares slopes for asymptotic exponent fits.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Underdetermined(format!("need at least two paired points, got {} and {}", x.len(), y.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Underdetermined("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Fit of `ln y = c + slope ln x`; all values must be positive.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidConfig("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.7)).collect();
        let f = loglog_fit(&x, &y).unwrap();
        assert!((f.slope + 1.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(linear_fit(&[1.0], &[2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(ys in proptest::collection::vec(-10.0f64..10.0, 3..12)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let f = linear_fit(&xs, &ys).unwrap();
            prop_assert!(f.r_squared >= -1e-12 && f.r_squared <= 1.0 + 1e-12);
        }
    }
}
