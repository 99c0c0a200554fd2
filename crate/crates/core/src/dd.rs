//! Double-double arithmetic (about 32 significant digits), enough to sum
//! alternating series whose terms exceed the result by many orders of
//! magnitude, and an independent high-precision Γ for cross-checks.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };
const TWO_PI: DoubleDouble = DoubleDouble { hi: std::f64::consts::TAU, lo: 2.449_293_598_294_706_4e-16 };

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn from_prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        DoubleDouble { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[allow(dead_code)]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }

    /// Multiplication by an exact power of two.
    fn scale(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble { hi: self.hi * f, lo: self.lo * f }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return DoubleDouble::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return DoubleDouble::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).scale(-10);
        // expm1(r) by Taylor series, |r| < 3.4e-4
        let mut term = r;
        let mut s = r;
        for i in 2..=14 {
            term = (term * r) / DoubleDouble::new(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // expm1(2x) = 2 expm1(x) + expm1(x)^2
        for _ in 0..10 {
            s = s.scale(1) + s * s;
        }
        (s + DoubleDouble::ONE).scale(k as i32)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let mut x = DoubleDouble::new(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - DoubleDouble::ONE;
        }
        x
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::new(x)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, b: Self) -> Self {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DoubleDouble { hi: q1, lo: q2 } + DoubleDouble::new(q3)
    }
}

// Stirling series coefficients B_{2k} / (2k (2k-1)) as (numerator, denominator).
const STIRLING: [(f64, f64); 12] = [
    (1.0, 12.0),
    (-1.0, 360.0),
    (1.0, 1260.0),
    (-1.0, 1680.0),
    (1.0, 1188.0),
    (-691.0, 360360.0),
    (1.0, 156.0),
    (-3617.0, 122400.0),
    (43867.0, 244188.0),
    (-174611.0, 125400.0),
    (854513.0, 63756.0),
    (-236364091.0, 454053600.0),
];

const STIRLING_MIN_ARG: f64 = 40.0;

/// ln Γ(x) for x > 0 in double-double precision: Stirling's series at
/// `x + m >= 40` and the recurrence `Γ(x+1) = x Γ(x)` to shift back.
pub fn ln_gamma_dd(x: DoubleDouble) -> DoubleDouble {
    assert!(x.hi > 0.0, "ln_gamma_dd needs a positive argument");
    let mut y = x;
    let mut shift = DoubleDouble::ONE;
    let mut shift_ln = DoubleDouble::ZERO;
    while y.hi < STIRLING_MIN_ARG {
        shift = shift * y;
        if shift.hi > 1e250 {
            shift_ln = shift_ln + shift.ln();
            shift = DoubleDouble::ONE;
        }
        y = y + DoubleDouble::ONE;
    }
    let ln_y = y.ln();
    let half_ln_two_pi = TWO_PI.ln().mul_f64(0.5);
    let mut s = (y - DoubleDouble::new(0.5)) * ln_y - y + half_ln_two_pi;
    let inv_y = DoubleDouble::ONE / y;
    let inv_y2 = inv_y * inv_y;
    let mut pow = inv_y;
    for (num, den) in STIRLING {
        s = s + pow * (DoubleDouble::new(num) / DoubleDouble::new(den));
        pow = pow * inv_y2;
    }
    s - shift.ln() - shift_ln
}

/// Γ(x) in double-double precision, for 0 < x < 171.
pub fn gamma_dd(x: DoubleDouble) -> DoubleDouble {
    ln_gamma_dd(x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DoubleDouble, b: DoubleDouble, tol: f64) -> bool {
        ((a - b).to_f64() / b.to_f64()).abs() <= tol
    }

    #[test]
    fn basic_arithmetic() {
        let third = DoubleDouble::ONE / DoubleDouble::new(3.0);
        let back = third * DoubleDouble::new(3.0);
        assert!((back - DoubleDouble::ONE).to_f64().abs() < 1e-31);
        let x = DoubleDouble::new(1.0) + DoubleDouble::new(1e-20);
        assert_eq!(x.hi, 1.0);
        assert_eq!(x.lo, 1e-20);
    }

    #[test]
    fn exp_and_ln() {
        let e = DoubleDouble::ONE.exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.4456468917292502e-16).abs() < 1e-31);
        for x in [-50.0, -3.3, -1e-5, 0.0, 0.7, 12.0, 300.0] {
            let v = DoubleDouble::new(x);
            let rt = v.exp().ln();
            assert!((rt - v).to_f64().abs() <= 1e-30 * (1.0 + x.abs()), "x = {x}");
        }
        let l2 = DoubleDouble::new(2.0).ln();
        assert!((l2 - LN2).to_f64().abs() < 1e-32);
    }

    #[test]
    fn gamma_integers_and_half() {
        let mut fact = DoubleDouble::ONE;
        for n in 1..30 {
            let g = gamma_dd(DoubleDouble::new(n as f64));
            assert!(close(g, fact, 1e-29), "Γ({n})");
            fact = fact.mul_f64(n as f64);
        }
        // Γ(1/2)^2 = π
        let g = gamma_dd(DoubleDouble::new(0.5));
        let pi = TWO_PI.mul_f64(0.5);
        assert!(close(g * g, pi, 1e-29));
    }
}
