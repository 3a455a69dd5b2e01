//! Closed-form moments of the standard bubble.
//!
//! With `I(a, b) = int (1+|y|^2)^{-a} |y|^b dy = (omega_{N-1}/2) B((N+b)/2, a-(N+b)/2)`
//! and `c_N^{4/(N-2)} = N(N-2)`, every moment below is a short combination
//! of `I` values.

use crate::bubble::Bubble;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_volume, Integrand, QuadratureSpec, Reduction};
use crate::precise::{self, Fixed, PiRational};
use crate::special::{bubble_constant, ln_beta, sphere_area};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `I(a, b)` in double precision.
pub fn radial_moment(dim: usize, a: f64, b: f64) -> Result<f64> {
    let n = dim as f64;
    if 2.0 * a - b <= n || n + b <= 0.0 {
        return Err(Error::Divergent { a, b, dim });
    }
    let alpha = (n + b) / 2.0;
    Ok(0.5 * sphere_area(dim) * ln_beta(alpha, a - alpha).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub dim: usize,
    /// `omega_{N-1}`, area of the unit sphere in R^N.
    pub omega: f64,
    pub c_n: f64,
    /// `int U^{2*-1}`
    pub a_mass: f64,
    /// `int U^{2*}`
    pub s_mass: f64,
    /// `int U^{2*} |y|^2`
    pub m2: f64,
    /// `(2*-1) int U^{2*-2} psi_0`
    pub b_flux: f64,
    /// `int U^{2*-1} psi_0 |y|^2`
    pub psi0_m2: f64,
    /// `int U^{2*-1} psi_0`
    pub u_psi0: f64,
    /// `int U^{2*-2} psi_0^2`
    pub psi0_sq: f64,
    /// `int U^{2*-2} psi_1^2`
    pub psi1_sq: f64,
    /// `int |grad U|^2`
    pub grad_sq: f64,
}

impl MomentTable {
    pub fn moment(&self, a: f64, b: f64) -> Result<f64> {
        radial_moment(self.dim, a, b)
    }

    /// Single-bubble energy `(1/2) int |grad U|^2 - (1/2*) int U^{2*} = S/N`.
    pub fn bubble_energy(&self) -> f64 {
        self.s_mass / self.dim as f64
    }

    /// Relative defects of the structural identities, keyed by name.
    pub fn identity_defects(&self) -> BTreeMap<&'static str, f64> {
        let n = self.dim as f64;
        let two_star = 2.0 * n / (n - 2.0);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let mut m = BTreeMap::new();
        m.insert("a_mass", rel(self.a_mass, (n - 2.0) * self.omega * self.c_n));
        m.insert("b_flux", rel(self.b_flux, -(n - 2.0) / 2.0 * self.a_mass));
        m.insert("psi0_m2", rel(self.psi0_m2, -2.0 / two_star * self.m2));
        m.insert("grad_sq", rel(self.grad_sq, self.s_mass));
        m
    }
}

pub fn closed_moments(dim: usize) -> Result<MomentTable> {
    if dim < 5 {
        return Err(Error::InvalidConfig(format!("moment table needs N >= 5, got {dim}")));
    }
    let n = dim as f64;
    let c = bubble_constant(dim);
    let i = |a: f64, b: f64| radial_moment(dim, a, b);
    let nn2 = n * (n - 2.0);
    let half = (n - 2.0) / 2.0;
    let c2 = c * c;
    Ok(MomentTable {
        dim,
        omega: sphere_area(dim),
        c_n: c,
        a_mass: c * nn2 * i((n + 2.0) / 2.0, 0.0)?,
        s_mass: c2 * nn2 * i(n, 0.0)?,
        m2: c2 * nn2 * i(n, 2.0)?,
        b_flux: (n + 2.0) / (n - 2.0) * nn2 * c * half * (i(n / 2.0 + 2.0, 0.0)? - i(n / 2.0 + 2.0, 2.0)?),
        psi0_m2: c2 * nn2 * half * (i(n + 1.0, 2.0)? - i(n + 1.0, 4.0)?),
        u_psi0: c2 * nn2 * half * (i(n + 1.0, 0.0)? - i(n + 1.0, 2.0)?),
        psi0_sq: nn2 * c2 * half * half * (i(n + 2.0, 0.0)? - 2.0 * i(n + 2.0, 2.0)? + i(n + 2.0, 4.0)?),
        psi1_sq: (n - 2.0).powi(3) * c2 * i(n + 2.0, 2.0)?,
        grad_sq: (n - 2.0).powi(2) * c2 * i(n, 2.0)?,
    })
}

/// The table by adaptive radial quadrature of the bubble and its scale
/// kernel, independent of the Beta closed forms. Returns the table and the
/// error estimate of each entry.
pub fn quadrature_moments(dim: usize, spec: &QuadratureSpec) -> Result<(MomentTable, BTreeMap<String, f64>)> {
    if dim < 5 {
        return Err(Error::InvalidConfig(format!("moment table needs N >= 5, got {dim}")));
    }
    let n = dim as f64;
    let u = Bubble::standard(dim);
    let p = n / (n - 2.0) * 2.0 - 1.0;
    let spec = spec.clone().with_reduction(Reduction::Radial1d { center: vec![0.0; dim], radius: None });
    let mut errors = BTreeMap::new();
    let mut run = |name: &str, f: &(dyn Fn(&[f64]) -> f64 + Sync), decay: f64| -> Result<f64> {
        let r = integrate_volume(&Integrand::new(dim, f, decay), &spec, None)?;
        errors.insert(name.to_string(), r.error_estimate);
        Ok(r.value)
    };
    let r2 = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>();
    let a_mass = run("a_mass", &|y| u.eval(y).powf(p), n + 2.0)?;
    let s_mass = run("s_mass", &|y| u.eval(y).powf(p + 1.0), 2.0 * n)?;
    let m2 = run("m2", &|y| u.eval(y).powf(p + 1.0) * r2(y), 2.0 * n - 2.0)?;
    let b_flux = p * run("b_flux", &|y| u.eval(y).powf(p - 1.0) * u.d_scale(y), n + 2.0)?;
    let psi0_m2 = run("psi0_m2", &|y| u.eval(y).powf(p) * u.d_scale(y) * r2(y), 2.0 * n - 2.0)?;
    let u_psi0 = run("u_psi0", &|y| u.eval(y).powf(p) * u.d_scale(y), 2.0 * n)?;
    let psi0_sq = run("psi0_sq", &|y| u.eval(y).powf(p - 1.0) * u.d_scale(y).powi(2), 2.0 * n)?;
    // the spherical mean of (d_1 U)^2 is |grad U|^2 / N
    let grad2 = |y: &[f64]| u.eval_grad(y).iter().map(|v| v * v).sum::<f64>();
    let psi1_sq = run("psi1_sq", &|y| u.eval(y).powf(p - 1.0) * grad2(y) / n, 2.0 * n + 2.0)?;
    let grad_sq = run("grad_sq", &grad2, 2.0 * n - 2.0)?;
    let table = MomentTable {
        dim,
        omega: sphere_area(dim),
        c_n: bubble_constant(dim),
        a_mass,
        s_mass,
        m2,
        b_flux,
        psi0_m2,
        u_psi0,
        psi0_sq,
        psi1_sq,
        grad_sq,
    };
    Ok((table, errors))
}

/// The same table evaluated with [`precise::DIGITS`] digits, formatted with
/// `sig` significant digits. Used to generate and check the golden file.
pub fn precise_moments(dim: usize, sig: usize) -> BTreeMap<String, String> {
    let n = dim as i64;
    let i = |a2: i64, b: i64| precise::radial_moment(dim, a2, b).expect("convergent").to_fixed();
    let c = precise::bubble_constant(dim);
    let c2 = precise::bubble_constant_sq(dim);
    let int = Fixed::from_int;
    let nn2 = int(n * (n - 2));
    let half = Fixed::from_ratio(&(n - 2).into(), &2.into());
    let omega = PiRational::to_fixed(&precise::sphere_area(dim));
    let c2nn2 = &c2 * &nn2;

    let a_mass = &(&c * &nn2) * &i(n + 2, 0);
    let s_mass = &c2nn2 * &i(2 * n, 0);
    let m2 = &c2nn2 * &i(2 * n, 2);
    let ratio = Fixed::from_ratio(&(n + 2).into(), &(n - 2).into());
    let b_flux = &(&(&(&ratio * &nn2) * &c) * &half) * &(&i(n + 4, 0) - &i(n + 4, 2));
    let psi0_m2 = &(&c2nn2 * &half) * &(&i(2 * n + 2, 2) - &i(2 * n + 2, 4));
    let u_psi0 = &(&c2nn2 * &half) * &(&i(2 * n + 2, 0) - &i(2 * n + 2, 2));
    let quad = &(&i(2 * n + 4, 0) - &(&int(2) * &i(2 * n + 4, 2))) + &i(2 * n + 4, 4);
    let psi0_sq = &(&(&c2nn2 * &half) * &half) * &quad;
    let psi1_sq = &(&int((n - 2).pow(3)) * &c2) * &i(2 * n + 4, 2);
    let grad_sq = &(&int((n - 2).pow(2)) * &c2) * &i(2 * n, 2);

    let mut m = BTreeMap::new();
    for (k, v) in [
        ("omega", omega),
        ("c_n", c),
        ("a_mass", a_mass),
        ("s_mass", s_mass),
        ("m2", m2),
        ("b_flux", b_flux),
        ("psi0_m2", psi0_m2),
        ("u_psi0", u_psi0),
        ("psi0_sq", psi0_sq),
        ("psi1_sq", psi1_sq),
        ("grad_sq", grad_sq),
    ] {
        m.insert(k.to_string(), v.to_sci_string(sig));
    }
    m
}

/// Golden moment values for N = 5..9 (32 significant digits).
pub const GOLDEN_JSON: &str = include_str!("../golden/moments.json");

pub fn golden() -> BTreeMap<String, BTreeMap<String, String>> {
    serde_json::from_str(GOLDEN_JSON).expect("embedded golden file parses")
}

/// Largest relative difference between the double-precision table and the
/// golden values for `dim`, or `None` if the dimension is not in the file.
/// Entries whose golden value is exactly zero are measured against `s_mass`.
pub fn golden_max_deviation(table: &MomentTable) -> Option<(String, f64)> {
    let g = golden();
    let entry = g.get(&table.dim.to_string())?;
    let value = serde_json::to_value(table).ok()?;
    let mut worst = (String::new(), 0.0);
    for (k, s) in entry {
        let want: f64 = s.parse().ok()?;
        let got = value.get(k)?.as_f64()?;
        let den = if want == 0.0 { table.s_mass } else { want.abs() };
        let rel = (got - want).abs() / den;
        if rel > worst.1 || worst.0.is_empty() {
            worst = (k.clone(), rel);
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_identity_for_simple_moment() {
        // int (1+|y|^2)^{-5} over R^5 = (omega_4/2) B(5/2, 5/2)
        let v = radial_moment(5, 5.0, 0.0).unwrap();
        let want = 0.5 * (8.0 * PI * PI / 3.0) * (3.0 * PI / 128.0);
        assert!((v - want).abs() < 1e-13 * want);
    }

    #[test]
    fn divergence_detected() {
        assert!(matches!(radial_moment(5, 2.5, 0.0), Err(Error::Divergent { .. })));
        assert!(radial_moment(5, 2.6, 0.0).is_ok());
        assert!(matches!(radial_moment(6, 4.0, 2.0), Err(Error::Divergent { .. })));
    }

    #[test]
    fn identities_hold_to_rounding() {
        for dim in 5..=12 {
            let t = closed_moments(dim).unwrap();
            for (name, d) in t.identity_defects() {
                assert!(d < 1e-12, "N = {dim}, {name}: {d:e}");
            }
        }
    }

    #[test]
    fn quadrature_route_agrees_with_closed_forms() {
        let spec = QuadratureSpec::default().with_tol(1e-10, 1e-13);
        for dim in [5, 6, 7] {
            let c = closed_moments(dim).unwrap();
            let (q, _) = quadrature_moments(dim, &spec).unwrap();
            let pairs = [
                (q.a_mass, c.a_mass),
                (q.s_mass, c.s_mass),
                (q.m2, c.m2),
                (q.b_flux, c.b_flux),
                (q.psi0_m2, c.psi0_m2),
                (q.psi0_sq, c.psi0_sq),
                (q.psi1_sq, c.psi1_sq),
                (q.grad_sq, c.grad_sq),
            ];
            for (a, b) in pairs {
                assert!((a - b).abs() < 1e-8 * b.abs(), "N = {dim}: {a} vs {b}");
            }
            assert!(q.u_psi0.abs() < 1e-9 * c.s_mass);
        }
    }

    #[test]
    fn n5_mass() {
        let t = closed_moments(5).unwrap();
        let want = 3.0 * 8.0 * PI * PI / 3.0 * 15f64.powf(0.75);
        assert!((t.a_mass - want).abs() < 1e-12 * want);
    }

    /// `cargo test --lib regenerate_golden -- --ignored` rewrites the file.
    #[test]
    #[ignore]
    fn regenerate_golden() {
        let all: BTreeMap<String, _> = (5..=9).map(|d| (d.to_string(), precise_moments(d, 32))).collect();
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/src/golden/moments.json");
        std::fs::write(path, serde_json::to_string_pretty(&all).unwrap() + "\n").unwrap();
    }

    #[test]
    fn golden_file_matches_precise_path() {
        let g = golden();
        for dim in 5..=9 {
            let fresh = precise_moments(dim, 32);
            assert_eq!(&fresh, g.get(&dim.to_string()).unwrap(), "N = {dim}");
        }
    }

    #[test]
    fn double_precision_agrees_with_golden() {
        for dim in 5..=9 {
            let (name, rel) = golden_max_deviation(&closed_moments(dim).unwrap()).unwrap();
            assert!(rel < 1e-12, "N = {dim}, {name}: {rel:e}");
        }
    }

    #[test]
    fn precise_identities() {
        // A = (N-2) omega c_N to every printed digit
        for dim in 5..=9 {
            let p = precise_moments(dim, 30);
            let omega = PiRational::to_fixed(&precise::sphere_area(dim));
            let want = &(&Fixed::from_int(dim as i64 - 2) * &omega) * &precise::bubble_constant(dim);
            assert_eq!(p["a_mass"], want.to_sci_string(30));
        }
    }
}
