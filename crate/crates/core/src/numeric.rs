//! Small numerical kernels shared by the integration and norm code:
//! compensated accumulation, a double-double scalar, and the stable
//! `sinc` / `exprel` helpers behind every closed-form segment integral.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Error-free sum of two doubles: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free product via fused multiply-add: `a * b = p + e` exactly.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.s, x);
        self.s = s;
        self.c += e;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.s);
        self.add(other.c);
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Compensated accumulator for complex values (independent Neumaier sums on
/// the real and imaginary parts).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    fn add_assign(&mut self, rhs: Complex64) {
        self.add(rhs);
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving roughly 106
/// bits of significand. Only the operations needed by the windowed
/// least-squares residual are provided.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion for `|x| < 2^106`.
    pub fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        // `hi` rounds to nearest, so the remainder fits comfortably in f64.
        let rem = x - hi as i128;
        let lo = rem as f64;
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Self { hi: s, lo: e }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqr(self) -> Self {
        self * self
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let e = e + t;
        let (s, e) = two_sum(s, e);
        let e = e + f;
        Self::renorm(s, e)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        Self::renorm(p, e)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // Two Newton-style correction steps on the leading quotient.
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * DoubleDouble::new(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * DoubleDouble::new(q2);
        let q3 = r.hi / rhs.hi;
        DoubleDouble::renorm(q1, q2) + DoubleDouble::new(q3)
    }
}

/// `sin(x) / x`, accurate near zero.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    } else {
        x.sin() / x
    }
}

/// `(e^w - 1) / w` for complex `w`, accurate near zero.
pub fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        // Horner on the Taylor series 1 + w/2! + w^2/3! + ...
        let mut acc = Complex64::new(1.0, 0.0);
        for k in (2..=18).rev() {
            acc = Complex64::new(1.0, 0.0) + acc * w / k as f64;
        }
        acc
    } else {
        (w.exp() - 1.0) / w
    }
}

/// `∫_0^len e^{z x} dx`.
#[inline]
pub fn exp_integral(z: Complex64, len: f64) -> Complex64 {
    exprel(z * len) * len
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn double_double_keeps_low_bits() {
        let big = DoubleDouble::new(1e20);
        let one = DoubleDouble::new(1.0);
        let r = (big + one) - big;
        assert_eq!(r.to_f64(), 1.0);
        let x = DoubleDouble::from_i128((1_i128 << 100) + 3);
        let back = x.hi as i128 + x.lo as i128;
        assert_eq!(back, (1_i128 << 100) + 3);
    }

    #[test]
    fn double_double_division() {
        let a = DoubleDouble::new(1.0);
        let b = DoubleDouble::new(3.0);
        let q = a / b;
        let r = q * b - a;
        assert!(r.to_f64().abs() < 1e-30);
    }

    #[test]
    fn exprel_matches_direct_formula_away_from_zero() {
        for &w in &[
            Complex64::new(0.3, -0.2),
            Complex64::new(0.0, 0.49),
            Complex64::new(-0.4, 0.1),
        ] {
            let series = exprel(w);
            let direct = (w.exp() - 1.0) / w;
            assert!((series - direct).norm() < 1e-14);
        }
        assert_eq!(exprel(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sinc_branches_agree() {
        let x: f64 = 0.0099999;
        assert!((sinc(x) - x.sin() / x).abs() < 1e-16);
    }
}
