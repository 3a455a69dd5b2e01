//! Basic rules: 15-point Gauss-Kronrod, the degree 7/5 Genz-Malik embedded
//! pair for boxes, and Gauss-Gegenbauer nodes by Golub-Welsch.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Abscissae of the 15-point rule on `[lo, hi]`, in a fixed order.
pub fn gk15_points(lo: f64, hi: f64) -> [f64; 15] {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut p = [0.0; 15];
    for i in 0..7 {
        p[2 * i] = c - h * XGK[i];
        p[2 * i + 1] = c + h * XGK[i];
    }
    p[14] = c;
    p
}

/// `(kronrod, |kronrod - gauss|)` from values at [`gk15_points`].
pub fn gk15_combine(lo: f64, hi: f64, f: &[f64]) -> (f64, f64) {
    let h = 0.5 * (hi - lo);
    let mut k = WGK[7] * f[14];
    let mut g = WG[3] * f[14];
    for i in 0..7 {
        let pair = f[2 * i] + f[2 * i + 1];
        k += WGK[i] * pair;
        if i % 2 == 1 {
            g += WG[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Genz-Malik rule for boxes in `d >= 2` dimensions.
#[derive(Debug, Clone)]
pub struct GenzMalik {
    pub dim: usize,
    /// Points of the reference cube `[-1, 1]^d`, grouped as documented in
    /// [`GenzMalik::new`].
    pub points: Vec<Vec<f64>>,
    w7: [f64; 5],
    w5: [f64; 4],
}

const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

impl GenzMalik {
    /// Point order: center; `+-L2 e_i` for each `i`; `+-L4 e_i` for each `i`;
    /// `(+-L4, +-L4)` on each pair `i < j`; all `2^d` corners `(+-L5, ...)`.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "Genz-Malik rule needs d >= 2");
        let d = dim as f64;
        let mut points = vec![vec![0.0; dim]];
        for lam in [L2, L4] {
            for i in 0..dim {
                for s in [-1.0, 1.0] {
                    let mut p = vec![0.0; dim];
                    p[i] = s * lam;
                    points.push(p);
                }
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    let mut p = vec![0.0; dim];
                    p[i] = si * L4;
                    p[j] = sj * L4;
                    points.push(p);
                }
            }
        }
        for mask in 0..(1usize << dim) {
            points.push((0..dim).map(|i| if mask >> i & 1 == 1 { L5 } else { -L5 }).collect());
        }
        let w7 = [
            (12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0,
            980.0 / 6561.0,
            (1820.0 - 400.0 * d) / 19683.0,
            200.0 / 19683.0,
            6859.0 / 19683.0 / 2f64.powi(dim as i32),
        ];
        let w5 = [
            (729.0 - 950.0 * d + 50.0 * d * d) / 729.0,
            245.0 / 486.0,
            (265.0 - 100.0 * d) / 1458.0,
            25.0 / 729.0,
        ];
        GenzMalik { dim, points, w7, w5 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// `(value, error, split axis)` on the box with `half` widths, from
    /// values at the mapped reference points.
    pub fn combine(&self, half: &[f64], f: &[f64]) -> (f64, f64, usize) {
        let d = self.dim;
        let f0 = f[0];
        let mut s2 = 0.0;
        let mut s3 = 0.0;
        let mut best_axis = 0;
        let mut best_diff = -1.0;
        for i in 0..d {
            let a = f[1 + 2 * i] + f[2 + 2 * i];
            let b = f[1 + 2 * d + 2 * i] + f[2 + 2 * d + 2 * i];
            s2 += a;
            s3 += b;
            let diff = ((a - 2.0 * f0) - (b - 2.0 * f0) / 7.0).abs();
            // prefer the wider side when the differences are indistinguishable
            let better = diff > best_diff * (1.0 + 1e-10)
                || (diff >= best_diff * (1.0 - 1e-10) && half[i] > half[best_axis]);
            if better {
                best_diff = diff;
                best_axis = i;
            }
        }
        let off = 1 + 4 * d;
        let npairs = 2 * d * (d - 1);
        let s4: f64 = f[off..off + npairs].iter().sum();
        let s5: f64 = f[off + npairs..].iter().sum();
        let vol: f64 = half.iter().map(|h| 2.0 * h).product();
        let r7 = self.w7[0] * f0 + self.w7[1] * s2 + self.w7[2] * s3 + self.w7[3] * s4 + self.w7[4] * s5;
        let r5 = self.w5[0] * f0 + self.w5[1] * s2 + self.w5[2] * s3 + self.w5[3] * s4;
        (vol * r7, vol * (r7 - r5).abs(), best_axis)
    }
}

/// Nodes and weights of the `m`-point Gauss rule for the weight
/// `(1 - x^2)^alpha` on `[-1, 1]`.
pub fn gauss_gegenbauer(m: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1 && alpha > -1.0);
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for n in 1..m {
        let nf = n as f64;
        let b2 = nf * (nf + 2.0 * alpha) / ((2.0 * nf + 2.0 * alpha + 1.0) * (2.0 * nf + 2.0 * alpha - 1.0));
        let b = b2.sqrt();
        jac[(n, n - 1)] = b;
        jac[(n - 1, n)] = b;
    }
    let mu0 = (0.5 * std::f64::consts::PI.ln() + ln_gamma(alpha + 1.0) - ln_gamma(alpha + 1.5)).exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize against rounding in the eigen solver
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}
