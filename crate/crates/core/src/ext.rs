//! Complex numbers with a wide binary exponent.
//!
//! Escaping orbits of a degree-`λ` map grow like `exp(λ^n)`, which leaves the
//! `f64` range two or three steps after any reasonable escape radius. Keeping
//! a separate `i64` exponent lets orbits run for dozens of further steps with
//! full relative precision, so `λ^{-n} log‖f^n(z)‖` can be read off directly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, NumAssign, One, Zero};

use crate::scalar::{Coeff, Domain};

/// Floating types usable for orbit computations.
pub trait Real: Float + NumAssign + fmt::Debug + Send + Sync + 'static {}

impl<F: Float + NumAssign + fmt::Debug + Send + Sync + 'static> Real for F {}

/// `m · 2^e` with `max(|Re m|, |Im m|)` in `[1/2, 1)`, or exactly zero.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtComplex<F> {
    m: Complex<F>,
    e: i64,
}

/// `x · 2^k` without intermediate overflow for `|k|` up to a few thousand.
fn ldexp<F: Real>(x: F, mut k: i64) -> F {
    let two = F::one() + F::one();
    let mut out = x;
    while k != 0 {
        let step = k.clamp(-500, 500);
        out = out * two.powi(step as i32);
        k -= step;
    }
    out
}

impl<F: Real> ExtComplex<F> {
    pub fn new(z: Complex<F>) -> Self {
        ExtComplex { m: z, e: 0 }.normalized()
    }

    fn normalized(self) -> Self {
        let s = self.m.re.abs().max(self.m.im.abs());
        if s.is_zero() || !s.is_finite() {
            return ExtComplex { m: self.m, e: if s.is_zero() { 0 } else { self.e } };
        }
        let k = s.log2().floor().to_i64().expect("finite") + 1;
        let scale = |x: F| ldexp(x, -k);
        let m = Complex::new(scale(self.m.re), scale(self.m.im));
        // guard against log2 rounding at exact powers of two
        let s2 = m.re.abs().max(m.im.abs());
        let half = F::one() / (F::one() + F::one());
        let (m, k) = if s2 >= F::one() {
            (m * half, k + 1)
        } else if s2 < half {
            (m + m, k - 1)
        } else {
            (m, k)
        };
        ExtComplex { m, e: self.e.saturating_add(k) }
    }

    /// The binary exponent; zero for zero.
    pub fn exponent(&self) -> i64 {
        self.e
    }

    /// `ln |z|`; `-∞` at zero.
    pub fn ln_abs(&self) -> F {
        let ln2 = F::from(std::f64::consts::LN_2).expect("float");
        self.m.norm().ln() + F::from(self.e).expect("float") * ln2
    }

    /// Back to an ordinary complex number (may be infinite or zero).
    pub fn to_complex(&self) -> Complex<F> {
        Complex::new(ldexp(self.m.re, self.e.clamp(-5000, 5000)), ldexp(self.m.im, self.e.clamp(-5000, 5000)))
    }
}

impl<F: Real> fmt::Debug for ExtComplex<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} + {:?}i)·2^{}", self.m.re, self.m.im, self.e)
    }
}

impl<F: Real> From<Complex<F>> for ExtComplex<F> {
    fn from(z: Complex<F>) -> Self {
        ExtComplex::new(z)
    }
}

impl<F: Real> Add for ExtComplex<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.m.is_zero() {
            return rhs;
        }
        if rhs.m.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= rhs.e { (self, rhs) } else { (rhs, self) };
        let gap = big.e - small.e;
        // beyond the mantissa width the smaller term cannot contribute
        if gap > 128 {
            return big;
        }
        let m = big.m + Complex::new(ldexp(small.m.re, -gap), ldexp(small.m.im, -gap));
        ExtComplex { m, e: big.e }.normalized()
    }
}

impl<F: Real> Sub for ExtComplex<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Real> Neg for ExtComplex<F> {
    type Output = Self;

    fn neg(self) -> Self {
        ExtComplex { m: -self.m, e: self.e }
    }
}

impl<F: Real> Mul for ExtComplex<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.m.is_zero() || rhs.m.is_zero() {
            return Self::zero();
        }
        ExtComplex { m: self.m * rhs.m, e: self.e.saturating_add(rhs.e) }.normalized()
    }
}

impl<'a, F: Real> AddAssign<&'a ExtComplex<F>> for ExtComplex<F> {
    fn add_assign(&mut self, rhs: &'a ExtComplex<F>) {
        *self = *self + *rhs;
    }
}

impl<F: Real> Zero for ExtComplex<F> {
    fn zero() -> Self {
        ExtComplex { m: Complex::zero(), e: 0 }
    }

    fn is_zero(&self) -> bool {
        self.m.is_zero()
    }
}

impl<F: Real> One for ExtComplex<F> {
    fn one() -> Self {
        ExtComplex::new(Complex::one())
    }
}

impl<F: Real> Coeff for ExtComplex<F> {
    const DOMAIN: Domain = Domain::Approx;

    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }

    fn from_i64(n: i64) -> Self {
        ExtComplex::new(Complex::new(F::from(n).expect("float"), F::zero()))
    }

    fn is_finite(&self) -> bool {
        self.m.re.is_finite() && self.m.im.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type E = ExtComplex<f64>;

    fn c(re: f64, im: f64) -> E {
        E::new(Complex::new(re, im))
    }

    #[test]
    fn survives_far_beyond_f64_range() {
        let mut z = c(10.0, 0.0);
        for _ in 0..30 {
            z = z * z;
        }
        // ln(10^(2^30))
        let expected = 2f64.powi(30) * 10f64.ln();
        assert!((z.ln_abs() - expected).abs() / expected < 1e-14);
        assert!(z.to_complex().re.is_infinite());
    }

    #[test]
    fn cancellation_and_zero() {
        let a = c(3.0, -1.0);
        assert!((a - a).is_zero());
        assert_eq!((a + E::zero()), a);
        assert_eq!(E::zero().ln_abs(), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn agrees_with_plain_complex(
            a in -1e3f64..1e3, b in -1e3f64..1e3, x in -1e3f64..1e3, y in -1e3f64..1e3,
        ) {
            let (p, q) = (Complex::new(a, b), Complex::new(x, y));
            let sum = (E::new(p) + E::new(q)).to_complex();
            let prod = (E::new(p) * E::new(q)).to_complex();
            prop_assert!((sum - (p + q)).norm() <= 1e-12 * (1.0 + p.norm() + q.norm()));
            prop_assert!((prod - p * q).norm() <= 1e-12 * (1.0 + (p * q).norm()));
        }
    }
}
