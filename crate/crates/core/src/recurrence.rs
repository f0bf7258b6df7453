//! Dynamical degree estimates from finite degree sequences.
//!
//! The primary route detects a linear recurrence with integer coefficients
//! (Berlekamp–Massey over `Q`) and returns the dominant root of its
//! characteristic polynomial, exactly whenever it is an integer or a quadratic
//! surd. When no recurrence is certified by the available terms, the root test
//! `d_N^{1/N}` is reported together with the previous estimate as a band.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::scalar::rational_sqrt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecurrenceError {
    #[error("at least {needed} terms are required, got {found}")]
    TooFewTerms { needed: usize, found: usize },
}

pub const MIN_TERMS: usize = 4;

/// An exact real number `a + b·√d` with rational `a, b` and squarefree `d > 1`
/// (or `b = 0`, `d = 1` for rationals).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

impl QuadSurd {
    pub fn rational(a: BigRational) -> Self {
        QuadSurd { a, b: BigRational::zero(), d: BigInt::one() }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `a + b·√d` for `d ≥ 0`, normalized so that `d` is squarefree.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        if b.is_zero() || d.is_zero() {
            return Self::rational(a);
        }
        let (square, free) = split_square(&d);
        let b = b * BigRational::from_integer(square);
        if free.is_one() {
            return Self::rational(a + b);
        }
        QuadSurd { a, b, d: free }
    }

    /// `(p + √disc) / 2`, the larger root of `x^2 - p x - q` when `disc = p^2 + 4q ≥ 0`.
    fn half_root(p: &BigInt, disc: &BigInt) -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        Self::new(BigRational::from_integer(p.clone()) * &half, half, disc.clone())
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_coefficient(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    pub fn mul(&self, other: &QuadSurd) -> Option<QuadSurd> {
        if self.is_rational() {
            return Some(Self::new(&self.a * &other.a, &self.a * &other.b, other.d.clone()));
        }
        if other.is_rational() {
            return Some(Self::new(&self.a * &other.a, &self.b * &other.a, self.d.clone()));
        }
        if self.d != other.d {
            return None;
        }
        let d = BigRational::from_integer(self.d.clone());
        Some(Self::new(
            &self.a * &other.a + &self.b * &other.b * d,
            &self.a * &other.b + &self.b * &other.a,
            self.d.clone(),
        ))
    }

    pub fn square(&self) -> QuadSurd {
        self.mul(self).expect("same radicand")
    }
}

/// Writes `d = s^2 · f` with `f` squarefree (trial division; `d` here is a
/// small discriminant).
fn split_square(d: &BigInt) -> (BigInt, BigInt) {
    let mut free = d.clone();
    let mut square = BigInt::one();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(2_000_000u64);
    while &p * &p <= free && p < limit {
        let pp = &p * &p;
        while (&free % &pp).is_zero() {
            free /= &pp;
            square *= &p;
        }
        p += 1;
    }
    (square, free)
}

impl fmt::Display for QuadSurd {
    /// Renders as `(p+q√d)/r` with integers, e.g. `(1+√5)/2` or `√2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        let den = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&den / self.a.denom());
        let q = self.b.numer() * (&den / self.b.denom());
        let surd = if q.is_one() {
            format!("√{}", self.d)
        } else if q == -BigInt::one() {
            format!("-√{}", self.d)
        } else {
            format!("{q}√{}", self.d)
        };
        let body = if p.is_zero() {
            surd
        } else if surd.starts_with('-') {
            format!("{p}{surd}")
        } else {
            format!("{p}+{surd}")
        };
        if den.is_one() {
            if p.is_zero() {
                write!(f, "{body}")
            } else {
                write!(f, "({body})")
            }
        } else {
            write!(f, "({body})/{den}")
        }
    }
}

impl fmt::Debug for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (~{})", self.to_f64())
    }
}

impl Serialize for QuadSurd {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            exact: String,
            approx: f64,
        }
        Repr { exact: self.to_string(), approx: self.to_f64() }.serialize(s)
    }
}

/// An estimate of a dynamical degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DegreeValue {
    Exact(QuadSurd),
    Float(f64),
}

impl DegreeValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DegreeValue::Exact(q) => q.to_f64(),
            DegreeValue::Float(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&QuadSurd> {
        match self {
            DegreeValue::Exact(q) => Some(q),
            DegreeValue::Float(_) => None,
        }
    }
}

impl fmt::Display for DegreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeValue::Exact(q) => write!(f, "{q}"),
            DegreeValue::Float(v) => write!(f, "{v:.6}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EstimateMethod {
    /// `d_n = Σ_j coeffs[j-1] · d_{n-j}` holds on every available term.
    Recurrence { coeffs: Vec<i64> },
    /// `d_N^{1/N}` with the previous root-test value as the other band end.
    RootTest { band: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicalDegreeEstimate {
    pub value: DegreeValue,
    #[serde(flatten)]
    pub method: EstimateMethod,
}

impl DynamicalDegreeEstimate {
    pub fn recurrence(&self) -> Option<&[i64]> {
        match &self.method {
            EstimateMethod::Recurrence { coeffs } => Some(coeffs),
            EstimateMethod::RootTest { .. } => None,
        }
    }
}

/// Minimal linear recurrence of `seq` over `Q`, as `(L, r)` with
/// `s_n = Σ_{j=1}^{L} r_j s_{n-j}` for all `n ≥ L`.
pub fn berlekamp_massey(seq: &[BigRational]) -> (usize, Vec<BigRational>) {
    let mut c = vec![BigRational::one()];
    let mut b = vec![BigRational::one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last = BigRational::one();
    for i in 0..seq.len() {
        let mut disc = seq[i].clone();
        for j in 1..=l.min(c.len() - 1) {
            disc += &c[j] * &seq[i - j];
        }
        if disc.is_zero() {
            m += 1;
            continue;
        }
        let factor = &disc / &last;
        let prev = c.clone();
        if c.len() < b.len() + m {
            c.resize(b.len() + m, BigRational::zero());
        }
        for (j, bj) in b.iter().enumerate() {
            c[j + m] -= &factor * bj;
        }
        if 2 * l <= i {
            l = i + 1 - l;
            b = prev;
            last = disc;
            m = 1;
        } else {
            m += 1;
        }
    }
    c.resize(l + 1, BigRational::zero());
    let r = c[1..].iter().map(|x| -x.clone()).collect();
    (l, r)
}

/// Estimates `lim d_n^{1/n}` from `d_1, ..., d_N`.
pub fn dynamical_degree_estimate(seq: &[u64]) -> Result<DynamicalDegreeEstimate, RecurrenceError> {
    if seq.len() < MIN_TERMS {
        return Err(RecurrenceError::TooFewTerms { needed: MIN_TERMS, found: seq.len() });
    }
    if let Some(est) = recurrence_estimate(seq) {
        return Ok(est);
    }
    Ok(root_test(seq))
}

fn recurrence_estimate(seq: &[u64]) -> Option<DynamicalDegreeEstimate> {
    let as_q: Vec<BigRational> =
        seq.iter().map(|&d| BigRational::from_integer(BigInt::from(d))).collect();
    let (l, r) = berlekamp_massey(&as_q);
    // two terms beyond the 2L that determine the recurrence must confirm it
    if l == 0 || seq.len() < 2 * l + 2 {
        return None;
    }
    let (pl, pr) = berlekamp_massey(&as_q[..seq.len() - 2]);
    if pl != l || pr != r {
        return None;
    }
    let coeffs: Option<Vec<i64>> =
        r.iter().map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None }).collect();
    let coeffs = coeffs?;
    let value = dominant_root(&coeffs);
    Some(DynamicalDegreeEstimate { value, method: EstimateMethod::Recurrence { coeffs } })
}

fn root_test(seq: &[u64]) -> DynamicalDegreeEstimate {
    let n = seq.len();
    let last = (seq[n - 1] as f64).powf(1.0 / n as f64);
    let prev = (seq[n - 2] as f64).powf(1.0 / (n - 1) as f64);
    DynamicalDegreeEstimate {
        value: DegreeValue::Float(last),
        method: EstimateMethod::RootTest { band: (prev.min(last), prev.max(last)) },
    }
}

/// Spectral radius of `x^L - r_1 x^{L-1} - ... - r_L`.
fn dominant_root(r: &[i64]) -> DegreeValue {
    // characteristic polynomial, highest degree first
    let mut poly: Vec<BigInt> = std::iter::once(BigInt::one())
        .chain(r.iter().map(|&c| -BigInt::from(c)))
        .collect();
    while poly.len() > 1 && poly.last().unwrap().is_zero() {
        poly.pop();
    }
    let mut candidates: Vec<QuadSurd> = Vec::new();
    // peel integer roots (monic integer polynomial: rational roots are integers)
    loop {
        if poly.len() <= 3 {
            break;
        }
        let c0 = poly.last().unwrap().clone();
        let root = divisors(&c0).into_iter().find(|x| eval_int(&poly, x).is_zero());
        match root {
            Some(x) => {
                poly = synthetic_division(&poly, &x);
                candidates.push(QuadSurd::rational(BigRational::from_integer(x.abs())));
            }
            None => break,
        }
    }
    match poly.len() {
        1 => {}
        2 => candidates.push(QuadSurd::rational(BigRational::from_integer(-poly[1].clone()))),
        3 => {
            // x^2 + b x + c  ->  p = -b, q = -c
            let p = -poly[1].clone();
            let q = -poly[2].clone();
            let disc = &p * &p + BigInt::from(4) * &q;
            if disc.is_negative() {
                // complex pair: modulus √c
                let c = BigRational::from_integer(poly[2].clone());
                candidates.push(match rational_sqrt(&c) {
                    Some(s) => QuadSurd::rational(s),
                    None => QuadSurd::new(BigRational::zero(), BigRational::one(), poly[2].clone()),
                });
            } else {
                let plus = QuadSurd::half_root(&p, &disc);
                let minus = QuadSurd::new(
                    BigRational::new(p.clone(), BigInt::from(2)),
                    BigRational::new(-BigInt::one(), BigInt::from(2)),
                    disc,
                );
                let minus_abs = if minus.to_f64() < 0.0 {
                    QuadSurd::new(-minus.a.clone(), -minus.b.clone(), minus.d.clone())
                } else {
                    minus
                };
                candidates.push(plus);
                candidates.push(minus_abs);
            }
        }
        _ => {
            let numeric = max_modulus_root(&poly);
            let best = candidates.iter().map(QuadSurd::to_f64).fold(numeric, f64::max);
            return DegreeValue::Float(best);
        }
    }
    candidates
        .into_iter()
        .max_by(|a, b| a.to_f64().partial_cmp(&b.to_f64()).unwrap_or(Ordering::Equal))
        .map(DegreeValue::Exact)
        .unwrap_or(DegreeValue::Exact(QuadSurd::integer(0)))
}

fn eval_int(poly: &[BigInt], x: &BigInt) -> BigInt {
    poly.iter().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn synthetic_division(poly: &[BigInt], root: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(poly.len() - 1);
    let mut acc = BigInt::zero();
    for c in &poly[..poly.len() - 1] {
        acc = acc * root + c;
        out.push(acc.clone());
    }
    out
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        out.push(BigInt::zero());
        return out;
    }
    let Some(small) = n.to_u64() else { return out };
    let mut d = 1u64;
    while d * d <= small && d < 1_000_000 {
        if small % d == 0 {
            for v in [d, small / d] {
                out.push(BigInt::from(v));
                out.push(-BigInt::from(v));
            }
        }
        d += 1;
    }
    // prefer large positive roots first
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Durand–Kerner iteration for all roots; returns the largest modulus.
fn max_modulus_root(poly: &[BigInt]) -> f64 {
    let coeffs: Vec<f64> = poly.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..500 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 {
            break;
        }
    }
    roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> QuadSurd {
        let half = BigRational::new(1.into(), 2.into());
        QuadSurd::new(half.clone(), half, 5.into())
    }

    #[test]
    fn fibonacci_degrees() {
        let est = dynamical_degree_estimate(&[2, 3, 5, 8, 13, 21]).unwrap();
        assert_eq!(est.recurrence(), Some(&[1, 1][..]));
        assert_eq!(est.value, DegreeValue::Exact(golden()));
        assert_eq!(golden().to_string(), "(1+√5)/2");
    }

    #[test]
    fn geometric_degrees() {
        let est = dynamical_degree_estimate(&[2, 4, 8, 16]).unwrap();
        assert_eq!(est.recurrence(), Some(&[2][..]));
        assert_eq!(est.value, DegreeValue::Exact(QuadSurd::integer(2)));
    }

    #[test]
    fn bounded_degrees() {
        let est = dynamical_degree_estimate(&[1, 1, 1, 1]).unwrap();
        assert_eq!(est.value, DegreeValue::Exact(QuadSurd::integer(1)));
    }

    #[test]
    fn linear_growth_has_unit_root() {
        let est = dynamical_degree_estimate(&[2, 3, 4, 5, 6, 7]).unwrap();
        assert_eq!(est.recurrence(), Some(&[2, -1][..]));
        assert_eq!(est.value, DegreeValue::Exact(QuadSurd::integer(1)));
    }

    #[test]
    fn alternating_doubling_gives_sqrt2() {
        let est = dynamical_degree_estimate(&[2, 2, 4, 4, 8, 8]).unwrap();
        assert_eq!(est.recurrence(), Some(&[0, 2][..]));
        let sqrt2 = QuadSurd::new(BigRational::zero(), BigRational::one(), 2.into());
        assert_eq!(est.value, DegreeValue::Exact(sqrt2.clone()));
        assert_eq!(sqrt2.square(), QuadSurd::integer(2));
        assert_eq!(sqrt2.to_string(), "√2");
    }

    #[test]
    fn too_few_terms() {
        assert_eq!(
            dynamical_degree_estimate(&[2, 4, 8]),
            Err(RecurrenceError::TooFewTerms { needed: 4, found: 3 })
        );
    }

    #[test]
    fn unconfirmed_recurrence_falls_back() {
        // 2,3,5,8,13 then a break: no order-2 law survives the last terms
        let est = dynamical_degree_estimate(&[2, 3, 5, 8, 13, 22]).unwrap();
        match est.method {
            EstimateMethod::RootTest { band } => {
                assert!(band.0 <= band.1);
                assert!((est.value.to_f64() - 22f64.powf(1.0 / 6.0)).abs() < 1e-12);
            }
            other => panic!("expected root test, got {other:?}"),
        }
    }

    #[test]
    fn transient_prefix_is_absorbed() {
        // 3,9,27,... with a leading 2
        let est = dynamical_degree_estimate(&[2, 3, 9, 27, 81, 243]).unwrap();
        assert_eq!(est.value, DegreeValue::Exact(QuadSurd::integer(3)));
    }

    #[test]
    fn cubic_characteristic_polynomial() {
        // tribonacci: dominant root is irrational of degree 3
        let est = dynamical_degree_estimate(&[1, 1, 2, 4, 7, 13, 24, 44]).unwrap();
        assert_eq!(est.recurrence(), Some(&[1, 1, 1][..]));
        match est.value {
            DegreeValue::Float(v) => assert!((v - 1.839286755214161).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn surd_normalization() {
        let s = QuadSurd::new(BigRational::zero(), BigRational::one(), 8.into());
        assert_eq!(s.radicand(), &BigInt::from(2));
        assert_eq!(s.surd_coefficient(), &BigRational::from_integer(2.into()));
        let r = QuadSurd::new(BigRational::one(), BigRational::one(), 9.into());
        assert_eq!(r, QuadSurd::integer(4));
    }
}
