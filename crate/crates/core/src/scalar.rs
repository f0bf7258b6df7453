//! Coefficient domains.
//!
//! Polynomials are generic over a [`Coeff`]. Three domains ship with the crate:
//!
//! * [`GaussianRational`]: exact elements of `Q(i)`, arbitrary precision.
//! * `Complex<F>` for any `F: num_traits::Float`: approximate complex numbers.
//! * [`Fp2`]: the finite field `F_{p^2} = F_p[i]` with `p = 2^61 - 1`, used only
//!   as a fast exact shadow of `Q(i)` when probing degrees along random lines.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, NumAssign, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Which coefficient domain a polynomial lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Exact,
    Approx,
    Modular,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Exact => "exact",
            Domain::Approx => "approx",
            Domain::Modular => "modular",
        })
    }
}

/// A commutative ring of polynomial coefficients.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + for<'a> AddAssign<&'a Self>
{
    const DOMAIN: Domain;

    /// Product without consuming the operands.
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }

    fn from_i64(n: i64) -> Self;

    /// Finite check; always true for exact domains.
    fn is_finite(&self) -> bool {
        true
    }
}

/// Coefficient domains where zero tests are decidable.
pub trait ExactCoeff: Coeff + Eq {}

/// Coefficient domains with division.
pub trait FieldCoeff: Coeff + Div<Output = Self> {
    fn inverse(&self) -> Option<Self>;
}

// ---------------------------------------------------------------------------
// Gaussian rationals
// ---------------------------------------------------------------------------

/// An element `re + im·i` of `Q(i)`; both parts are kept in lowest terms by
/// `num-rational`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational(pub Complex<BigRational>);

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational(Complex::new(re, im))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational(Complex::new(re, BigRational::zero()))
    }

    pub fn i() -> Self {
        GaussianRational(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn re(&self) -> &BigRational {
        &self.0.re
    }

    pub fn im(&self) -> &BigRational {
        &self.0.im
    }

    pub fn is_real(&self) -> bool {
        self.0.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational(self.0.conj())
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.0.re * &self.0.re + &self.0.im * &self.0.im
    }

    pub fn to_complex64(&self) -> Complex<f64> {
        Complex::new(ratio_to_f64(&self.0.re), ratio_to_f64(&self.0.im))
    }

    pub fn to_complex<F: Float>(&self) -> Complex<F> {
        let c = self.to_complex64();
        Complex::new(F::from(c.re).unwrap(), F::from(c.im).unwrap())
    }

    /// Exact square root in `Q(i)`, if one exists. The root returned has
    /// nonnegative real part (positive imaginary part when purely imaginary).
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        // (x + iy)^2 = a + ib  =>  x^2 = (a + |z|)/2, y^2 = (|z| - a)/2
        let modulus = rational_sqrt(&self.norm_sqr())?;
        let two = BigRational::from_integer(2.into());
        let x2 = (&modulus + &self.0.re) / &two;
        let y2 = (&modulus - &self.0.re) / &two;
        let x = rational_sqrt(&x2)?;
        let mut y = rational_sqrt(&y2)?;
        if x.is_zero() {
            return Some(GaussianRational::new(x, y));
        }
        // sign of y must match 2xy = b with x > 0
        if self.0.im.is_negative() {
            y = -y;
        }
        Some(GaussianRational::new(x, y))
    }

    /// Reduction into `F_{p^2}`; `None` when a denominator vanishes mod p.
    pub fn to_fp2(&self) -> Option<Fp2> {
        Some(Fp2::new(ratio_mod_p(&self.0.re)?, ratio_mod_p(&self.0.im)?))
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Square root of a nonnegative rational, if rational.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn ratio_mod_p(r: &BigRational) -> Option<u64> {
    let p = BigInt::from(Fp2::P);
    let n = r.numer().mod_floor(&p);
    let d = r.denom().mod_floor(&p);
    let n = n.to_u64().unwrap();
    let d = d.to_u64().unwrap();
    if d == 0 {
        return None;
    }
    Some(fp_mul(n, fp_inv(d)))
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (&self.0.re, &self.0.im);
        match (re.is_zero(), im.is_zero()) {
            (_, true) => write!(f, "{re}"),
            (true, false) => write!(f, "{}i", fmt_imag(im)),
            (false, false) => {
                if im.is_negative() {
                    write!(f, "{re}-{}i", fmt_imag(&-im))
                } else {
                    write!(f, "{re}+{}i", fmt_imag(im))
                }
            }
        }
    }
}

fn fmt_imag(im: &BigRational) -> String {
    if im.is_one() {
        String::new()
    } else if *im == -BigRational::one() {
        "-".to_string()
    } else {
        format!("{im}*")
    }
}

/// Error parsing a scalar literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseScalarError(pub String);

/// Parses a rational literal: `3`, `-7/2`, `0.125`, `1e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let err = || ParseScalarError(s.to_string());
    let s = s.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(n));
    }
    // decimal with optional exponent, parsed exactly
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| err())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

impl FromStr for GaussianRational {
    type Err = ParseScalarError;

    /// Accepts `re`, `re,im`, or `re+imi` style literals (`1/2+3i`, `-i`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some((re, im)) = t.split_once(',') {
            return Ok(GaussianRational::new(parse_rational(re)?, parse_rational(im)?));
        }
        if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not an exponent sign or leading
            let bytes = body.as_bytes();
            let mut split = None;
            for idx in (1..bytes.len()).rev() {
                if (bytes[idx] == b'+' || bytes[idx] == b'-')
                    && !matches!(bytes[idx - 1], b'e' | b'E')
                {
                    split = Some(idx);
                    break;
                }
            }
            let (re_s, im_s) = match split {
                Some(idx) => (&body[..idx], &body[idx..]),
                None => ("0", body),
            };
            let im_s = im_s.strip_suffix('*').unwrap_or(im_s);
            let im = match im_s {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                other => parse_rational(other).map_err(|_| err())?,
            };
            return Ok(GaussianRational::new(parse_rational(re_s)?, im));
        }
        Ok(GaussianRational::real(parse_rational(&t)?))
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        GaussianRational::real(BigRational::from_integer(n.into()))
    }
}

impl From<BigRational> for GaussianRational {
    fn from(r: BigRational) -> Self {
        GaussianRational::real(r)
    }
}

macro_rules! gq_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: Self) -> Self {
                GaussianRational(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a GaussianRational> for &'a GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: &'a GaussianRational) -> GaussianRational {
                GaussianRational(&self.0 $op &rhs.0)
            }
        }
    };
}
gq_binop!(Add, add, +);
gq_binop!(Sub, sub, -);
gq_binop!(Div, div, /);

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &'a GaussianRational) -> GaussianRational {
        self.mul_ref(rhs)
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> Self {
        GaussianRational(-self.0)
    }
}

impl<'a> AddAssign<&'a GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &'a GaussianRational) {
        self.0.re += &rhs.0.re;
        if !rhs.0.im.is_zero() {
            self.0.im += &rhs.0.im;
        }
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        GaussianRational(Complex::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.re.is_zero() && self.0.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        GaussianRational(Complex::one())
    }
}

impl Sum for GaussianRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl Coeff for GaussianRational {
    const DOMAIN: Domain = Domain::Exact;

    fn mul_ref(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0.re, &self.0.im);
        let (c, d) = (&rhs.0.re, &rhs.0.im);
        // real operands dominate in practice
        if b.is_zero() && d.is_zero() {
            return GaussianRational::real(a * c);
        }
        if b.is_zero() {
            return GaussianRational::new(a * c, a * d);
        }
        if d.is_zero() {
            return GaussianRational::new(a * c, b * c);
        }
        GaussianRational::new(a * c - b * d, a * d + b * c)
    }

    fn from_i64(n: i64) -> Self {
        n.into()
    }
}

impl ExactCoeff for GaussianRational {}

impl FieldCoeff for GaussianRational {
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(GaussianRational(self.0.inv()))
        }
    }
}

/// Is `n` a perfect square?
pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.sign() == Sign::Minus {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

// ---------------------------------------------------------------------------
// Approximate complex numbers
// ---------------------------------------------------------------------------

impl<F> Coeff for Complex<F>
where
    F: Float + NumAssign + fmt::Debug + Send + Sync + 'static,
{
    const DOMAIN: Domain = Domain::Approx;

    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(F::from(n).unwrap(), F::zero())
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<F> FieldCoeff for Complex<F>
where
    F: Float + NumAssign + fmt::Debug + Send + Sync + 'static,
{
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }
}

// ---------------------------------------------------------------------------
// F_{p^2}, p = 2^61 - 1
// ---------------------------------------------------------------------------

/// Element `a + b·i` of `F_p[i]` with `p = 2^61 - 1`. Since `p ≡ 3 (mod 4)`,
/// `-1` is a non-residue and this is the field with `p^2` elements.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp2 {
    re: u64,
    im: u64,
}

const P61: u64 = (1u64 << 61) - 1;

#[inline]
fn fp_reduce(x: u128) -> u64 {
    let lo = (x as u64) & P61;
    let hi = (x >> 61) as u64;
    let mut s = lo + (hi & P61) + ((x >> 122) as u64);
    while s >= P61 {
        s -= P61;
    }
    s
}

#[inline]
fn fp_mul(a: u64, b: u64) -> u64 {
    fp_reduce(a as u128 * b as u128)
}

#[inline]
fn fp_add(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn fp_sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P61 - b
    }
}

fn fp_pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = fp_mul(acc, base);
        }
        base = fp_mul(base, base);
        exp >>= 1;
    }
    acc
}

fn fp_inv(a: u64) -> u64 {
    fp_pow(a, P61 - 2)
}

impl Fp2 {
    pub const P: u64 = P61;

    pub fn new(re: u64, im: u64) -> Self {
        Fp2 { re: re % P61, im: im % P61 }
    }

    pub fn re(&self) -> u64 {
        self.re
    }

    pub fn im(&self) -> u64 {
        self.im
    }
}

impl fmt::Debug for Fp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{}i mod p)", self.re, self.im)
    }
}

impl Add for Fp2 {
    type Output = Fp2;
    #[inline]
    fn add(self, rhs: Fp2) -> Fp2 {
        Fp2 { re: fp_add(self.re, rhs.re), im: fp_add(self.im, rhs.im) }
    }
}

impl Sub for Fp2 {
    type Output = Fp2;
    #[inline]
    fn sub(self, rhs: Fp2) -> Fp2 {
        Fp2 { re: fp_sub(self.re, rhs.re), im: fp_sub(self.im, rhs.im) }
    }
}

impl Mul for Fp2 {
    type Output = Fp2;
    #[inline]
    fn mul(self, rhs: Fp2) -> Fp2 {
        let ac = self.re as u128 * rhs.re as u128;
        let bd = self.im as u128 * rhs.im as u128;
        let ad = self.re as u128 * rhs.im as u128;
        let bc = self.im as u128 * rhs.re as u128;
        Fp2 { re: fp_sub(fp_reduce(ac), fp_reduce(bd)), im: fp_reduce(ad + bc) }
    }
}

impl Neg for Fp2 {
    type Output = Fp2;
    fn neg(self) -> Fp2 {
        Fp2 { re: fp_sub(0, self.re), im: fp_sub(0, self.im) }
    }
}

impl Div for Fp2 {
    type Output = Fp2;
    fn div(self, rhs: Fp2) -> Fp2 {
        self * rhs.inverse().expect("division by zero in F_p^2")
    }
}

impl<'a> AddAssign<&'a Fp2> for Fp2 {
    #[inline]
    fn add_assign(&mut self, rhs: &'a Fp2) {
        *self = *self + *rhs;
    }
}

impl Zero for Fp2 {
    fn zero() -> Self {
        Fp2 { re: 0, im: 0 }
    }
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
}

impl One for Fp2 {
    fn one() -> Self {
        Fp2 { re: 1, im: 0 }
    }
}

impl Coeff for Fp2 {
    const DOMAIN: Domain = Domain::Modular;

    fn mul_ref(&self, rhs: &Self) -> Self {
        *self * *rhs
    }

    fn from_i64(n: i64) -> Self {
        let r = n.rem_euclid(P61 as i64) as u64;
        Fp2 { re: r, im: 0 }
    }
}

impl ExactCoeff for Fp2 {}

impl FieldCoeff for Fp2 {
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // (a + bi)^{-1} = (a - bi) / (a^2 + b^2)
        let norm = fp_add(fp_mul(self.re, self.re), fp_mul(self.im, self.im));
        let inv = fp_inv(norm);
        Some(Fp2 { re: fp_mul(self.re, inv), im: fp_mul(fp_sub(0, self.im), inv) })
    }
}

/// Absolute value of a rational as `f64`, convenience for reports.
pub fn abs_f64(r: &BigRational) -> f64 {
    ratio_to_f64(&r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gq(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_literals() {
        assert_eq!(gq("3"), GaussianRational::from(3));
        assert_eq!(gq("-7/14"), GaussianRational::from_ratio(-1, 2));
        assert_eq!(gq("0.125"), GaussianRational::from_ratio(1, 8));
        assert_eq!(gq("1e-3"), GaussianRational::from_ratio(1, 1000));
        assert_eq!(gq("i"), GaussianRational::i());
        assert_eq!(gq("-i"), -GaussianRational::i());
        assert_eq!(gq("1/2+3i"), gq("1/2,3"));
        assert_eq!(gq("2-1/3i"), gq("2,-1/3"));
        assert!("1/0".parse::<GaussianRational>().is_err());
        assert!("abc".parse::<GaussianRational>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "5", "-1/2", "i", "-i", "1/2+3i", "2-1/3i", "4/5*i"] {
            let v = gq(s);
            let printed = v.to_string();
            assert_eq!(gq(&printed.replace('*', "")), v, "{s} -> {printed}");
        }
    }

    #[test]
    fn lowest_terms_positive_denominator() {
        let v = GaussianRational::from_ratio(6, -4);
        assert_eq!(v.re().numer(), &BigInt::from(-3));
        assert_eq!(v.re().denom(), &BigInt::from(2));
    }

    #[test]
    fn gaussian_square_roots() {
        let two_i = gq("0,2");
        let r = two_i.sqrt().unwrap();
        assert_eq!(&r * &r, two_i);
        assert_eq!(gq("9/4").sqrt(), Some(gq("3/2")));
        assert_eq!(gq("-4").sqrt(), Some(gq("0,2")));
        assert_eq!(gq("2").sqrt(), None);
        let z = gq("3/5+7/2i");
        assert_eq!((&z * &z).sqrt().map(|r| &r * &r), Some(&z * &z));
    }

    #[test]
    fn fp2_field_ops() {
        let a = Fp2::new(123456789, 987654321);
        let b = Fp2::new(P61 - 5, 42);
        assert_eq!((a * b) / b, a);
        assert_eq!(a * a.inverse().unwrap(), Fp2::one());
        assert_eq!(a - a, Fp2::zero());
        // i^2 = -1
        let i = Fp2::new(0, 1);
        assert_eq!(i * i, -Fp2::one());
    }

    #[test]
    fn reduction_is_a_homomorphism() {
        let x = gq("3/7-2/5i");
        let y = gq("-11/13+1i");
        let (fx, fy) = (x.to_fp2().unwrap(), y.to_fp2().unwrap());
        assert_eq!((&x * &y).to_fp2().unwrap(), fx * fy);
        assert_eq!((&x + &y).to_fp2().unwrap(), fx + fy);
        assert_eq!((&x / &y).to_fp2().unwrap(), fx / fy);
    }
}
