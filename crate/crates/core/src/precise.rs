//! Extended-precision evaluation of the closed-form constants.
//!
//! Every Gamma value that appears in the bubble moments has an integer or
//! half-integer argument, so it is an exact rational times a power of
//! `sqrt(pi)`. Those exact values are carried symbolically and only rounded
//! at the end, in fixed-point arithmetic with [`DIGITS`] decimal digits. The
//! only irrational inputs are `pi` (a literal constant) and the fourth roots
//! inside `c_N`, taken with an exact integer root.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Decimal digits carried by [`Fixed`].
pub const DIGITS: u32 = 60;

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803482534211706798";

fn scale() -> BigInt {
    BigInt::from(10u32).pow(DIGITS)
}

/// Fixed-point real number: `raw / 10^DIGITS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn from_int(v: i64) -> Self {
        Fixed(BigInt::from(v) * scale())
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Fixed(round_div(&(num * scale()), den))
    }

    pub fn pi() -> Self {
        let (int, frac) = PI_DIGITS.split_once('.').unwrap();
        let digits = format!("{int}{}", &frac[..DIGITS as usize]);
        Fixed(digits.parse().unwrap())
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.0.is_negative());
        Fixed((&self.0 * scale()).sqrt())
    }

    /// Positive `n`-th root.
    pub fn root(&self, n: u32) -> Self {
        assert!(!self.0.is_negative());
        Fixed((&self.0 * scale().pow(n - 1)).nth_root(n))
    }

    pub fn powi(&self, e: i32) -> Self {
        let mut acc = Fixed::from_int(1);
        for _ in 0..e.unsigned_abs() {
            acc = &acc * self;
        }
        if e < 0 {
            &Fixed::from_int(1) / &acc
        } else {
            acc
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 20 significant digits before the float conversion.
        let digits = self.0.abs().to_string().len() as i64;
        let shift = (digits - 20).max(0) as u32;
        let head = &self.0 / BigInt::from(10u32).pow(shift);
        head.to_f64().unwrap() * 10f64.powi(shift as i32 - DIGITS as i32)
    }

    /// Scientific notation with `sig` significant digits.
    pub fn to_sci_string(&self, sig: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let neg = self.0.sign() == Sign::Minus;
        let s = self.0.abs().to_string();
        let exp = s.len() as i64 - 1 - DIGITS as i64;
        let mut mant: String = s.chars().take(sig).collect();
        while mant.len() < sig {
            mant.push('0');
        }
        format!(
            "{}{}.{}e{}",
            if neg { "-" } else { "" },
            &mant[..1],
            &mant[1..],
            exp
        )
    }
}

fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    if (r * 2i32).abs() >= den.abs() {
        q + 1
    } else {
        q
    }
}

impl<'a> Add for &'a Fixed {
    type Output = Fixed;
    fn add(self, o: &'a Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }
}

impl<'a> Sub for &'a Fixed {
    type Output = Fixed;
    fn sub(self, o: &'a Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }
}

impl<'a> Mul for &'a Fixed {
    type Output = Fixed;
    fn mul(self, o: &'a Fixed) -> Fixed {
        Fixed(round_div(&(&self.0 * &o.0), &scale()))
    }
}

impl<'a> Div for &'a Fixed {
    type Output = Fixed;
    fn div(self, o: &'a Fixed) -> Fixed {
        Fixed(round_div(&(&self.0 * scale()), &o.0))
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

/// Exact value `num/den * sqrt(pi)^pi_half`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiRational {
    pub num: BigInt,
    pub den: BigInt,
    pub pi_half: i32,
}

impl PiRational {
    pub fn rational(num: i64, den: i64) -> Self {
        PiRational {
            num: num.into(),
            den: den.into(),
            pi_half: 0,
        }
        .reduced()
    }

    fn reduced(mut self) -> Self {
        let g = self.num.gcd(&self.den);
        if !g.is_zero() && !g.is_one() {
            self.num /= &g;
            self.den /= &g;
        }
        if self.den.is_negative() {
            self.num = -self.num;
            self.den = -self.den;
        }
        self
    }

    /// `Gamma(half2 / 2)` for a positive integer `half2`.
    pub fn gamma_half(half2: i64) -> Self {
        assert!(half2 >= 1, "gamma argument must be positive");
        if half2 % 2 == 0 {
            PiRational {
                num: factorial(half2 / 2 - 1),
                den: BigInt::one(),
                pi_half: 0,
            }
        } else {
            let n = (half2 - 1) / 2;
            PiRational {
                num: factorial(2 * n),
                den: BigInt::from(4u32).pow(n as u32) * factorial(n),
                pi_half: 1,
            }
            .reduced()
        }
    }

    pub fn to_fixed(&self) -> Fixed {
        let base = Fixed::from_ratio(&self.num, &self.den);
        if self.pi_half == 0 {
            return base;
        }
        let sqrt_pi = Fixed::pi().sqrt();
        &base * &sqrt_pi.powi(self.pi_half)
    }
}

impl<'a> Mul for &'a PiRational {
    type Output = PiRational;
    fn mul(self, o: &'a PiRational) -> PiRational {
        PiRational {
            num: &self.num * &o.num,
            den: &self.den * &o.den,
            pi_half: self.pi_half + o.pi_half,
        }
        .reduced()
    }
}

impl<'a> Div for &'a PiRational {
    type Output = PiRational;
    fn div(self, o: &'a PiRational) -> PiRational {
        PiRational {
            num: &self.num * &o.den,
            den: &self.den * &o.num,
            pi_half: self.pi_half - o.pi_half,
        }
        .reduced()
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `omega_{N-1} = 2 pi^{N/2} / Gamma(N/2)`, exactly.
pub fn sphere_area(dim: usize) -> PiRational {
    let two_pi_pow = PiRational {
        num: 2.into(),
        den: 1.into(),
        pi_half: dim as i32,
    };
    &two_pi_pow / &PiRational::gamma_half(dim as i64)
}

/// Exact radial moment `I(a, b) = int (1+|y|^2)^{-a} |y|^b dy` over R^N, with
/// `a = a2/2`. Returns `None` when the integral diverges.
pub fn radial_moment(dim: usize, a2: i64, b: i64) -> Option<PiRational> {
    let alpha2 = dim as i64 + b;
    let beta2 = a2 - alpha2;
    if beta2 <= 0 || alpha2 <= 0 {
        return None;
    }
    let half = PiRational::rational(1, 2);
    let omega_half = &sphere_area(dim) * &half;
    let g = &(&PiRational::gamma_half(alpha2) * &PiRational::gamma_half(beta2))
        / &PiRational::gamma_half(alpha2 + beta2);
    Some(&omega_half * &g)
}

/// `c_N^2 = (N(N-2))^{(N-2)/2}`.
pub fn bubble_constant_sq(dim: usize) -> Fixed {
    let m = BigInt::from((dim * (dim - 2)) as u64);
    let p = m.pow((dim - 2) as u32);
    Fixed::from_ratio(&p, &BigInt::one()).root(2)
}

/// `c_N = (N(N-2))^{(N-2)/4}`.
pub fn bubble_constant(dim: usize) -> Fixed {
    let m = BigInt::from((dim * (dim - 2)) as u64);
    let p = m.pow((dim - 2) as u32);
    Fixed::from_ratio(&p, &BigInt::one()).root(4)
}
