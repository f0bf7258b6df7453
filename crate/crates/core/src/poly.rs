//! Sparse multivariate polynomials over a generic coefficient domain.
//!
//! Terms are stored as a vector sorted ascending in graded-lexicographic
//! order, so structural equality is polynomial equality. Zero coefficients are
//! never stored.

use std::cmp::Ordering;
use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::scalar::{Coeff, ExactCoeff, FieldCoeff};

/// Default ceiling on the number of terms any single polynomial may hold.
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("coefficient domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: String, found: String },
    #[error("term count exceeded the ceiling of {limit}")]
    TermOverflow { limit: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("target degree {target} is below the total degree {degree}")]
    TargetDegreeTooLow { target: u32, degree: u32 },
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("expected {expected} substitutions, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("polynomial is not homogeneous of degree {0}")]
    NotHomogeneous(u32),
    #[error("exponent vector has length {found}, expected {expected}")]
    ExponentArity { expected: usize, found: usize },
}

/// Total degree with a distinguished value for the zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    /// The finite degree; panics on the zero polynomial's sentinel.
    pub fn unwrap(self) -> u32 {
        self.finite().expect("degree of the zero polynomial")
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Exponent vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn new(exps: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    fn with_exp(&self, i: usize, e: u32) -> Monomial {
        let mut m = self.clone();
        m.0[i] = e;
        m
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then exponent of `x_0`,
    /// then `x_1`, and so on.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly<C> {
    nvars: usize,
    terms: Vec<(Monomial, C)>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, Monomial::one(nvars), c)
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        Self::monomial(nvars, Monomial::var(nvars, i), C::one())
    }

    pub fn monomial(nvars: usize, m: Monomial, c: C) -> Self {
        assert_eq!(m.0.len(), nvars);
        if c.is_zero() {
            Self::zero(nvars)
        } else {
            MultiPoly { nvars, terms: vec![(m, c)] }
        }
    }

    /// Builds a polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut acc: FxHashMap<Monomial, C> = FxHashMap::default();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(PolyError::ExponentArity { expected: nvars, found: e.len() });
            }
            if !c.is_finite() {
                return Err(PolyError::NonFinite);
            }
            *acc.entry(Monomial::new(&e)).or_insert_with(C::zero) += &c;
        }
        Ok(Self::from_map(nvars, acc))
    }

    fn from_map(nvars: usize, map: FxHashMap<Monomial, C>) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        MultiPoly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + ExactSizeIterator {
        self.terms.iter().map(|(m, c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.degree() == 0)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms.last().map_or(Degree::NegInfinity, |(m, _)| Degree::Finite(m.degree()))
    }

    /// Lowest total degree among the terms.
    pub fn min_degree(&self) -> Degree {
        self.terms.first().map_or(Degree::NegInfinity, |(m, _)| Degree::Finite(m.degree()))
    }

    /// Largest term in graded-lex order.
    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.last().map(|(m, c)| (m, c))
    }

    /// Coefficient of the monomial with exponents `exps` (zero if absent).
    pub fn coeff(&self, exps: &[u32]) -> C {
        let key = Monomial::new(exps);
        match self.terms.binary_search_by(|(m, _)| m.cmp(&key)) {
            Ok(idx) => self.terms[idx].1.clone(),
            Err(_) => C::zero(),
        }
    }

    /// Highest power of `x_var` occurring, `None` for the zero polynomial.
    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.0[var]).max()
    }

    /// True when only variables in `allowed` occur.
    pub fn uses_only(&self, allowed: &[usize]) -> bool {
        self.terms.iter().all(|(m, _)| {
            m.0.iter().enumerate().all(|(i, &e)| e == 0 || allowed.contains(&i))
        })
    }

    /// Sum of the terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == d).cloned().collect(),
        }
    }

    /// True when all terms share the same total degree (zero counts).
    pub fn is_homogeneous(&self) -> bool {
        self.min_degree() == self.total_degree()
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarCountMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let c = if negate_other { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other {
                        a[i].1.clone() - b[j].1.clone()
                    } else {
                        let mut s = a[i].1.clone();
                        s += &b[j].1;
                        s
                    };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        MultiPoly { nvars: self.nvars, terms: out }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        Ok(self.merge(other, true))
    }

    /// Product, failing when the result would exceed `max_terms` terms.
    pub fn mul_bounded(&self, other: &Self, max_terms: usize) -> Result<Self, PolyError> {
        self.check_vars(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        if small.terms.len() == 1 {
            let (m, c) = &small.terms[0];
            let terms = large
                .terms
                .iter()
                .map(|(m2, c2)| (m.mul(m2), c.mul_ref(c2)))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            // multiplying by a monomial preserves the order
            return Ok(MultiPoly { nvars: self.nvars, terms });
        }
        let mut acc: FxHashMap<Monomial, C> = FxHashMap::default();
        acc.reserve(small.terms.len().saturating_mul(large.terms.len()).min(max_terms));
        for (m1, c1) in &small.terms {
            for (m2, c2) in &large.terms {
                let prod = c1.mul_ref(c2);
                *acc.entry(m1.mul(m2)).or_insert_with(C::zero) += &prod;
            }
            if acc.len() > max_terms {
                return Err(PolyError::TermOverflow { limit: max_terms });
            }
        }
        let out = Self::from_map(self.nvars, acc);
        if out.terms.len() > max_terms {
            return Err(PolyError::TermOverflow { limit: max_terms });
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_bounded(other, DEFAULT_MAX_TERMS)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), a.mul_ref(c)))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        MultiPoly { nvars: self.nvars, terms }
    }

    pub fn pow_bounded(&self, n: u32, max_terms: usize) -> Result<Self, PolyError> {
        let mut result = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_bounded(&base, max_terms)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_bounded(&base, max_terms)?;
            }
        }
        Ok(result)
    }

    /// Substitutes `maps[i]` for `x_i`.
    pub fn compose(&self, maps: &[MultiPoly<C>]) -> Result<MultiPoly<C>, PolyError> {
        self.compose_bounded(maps, DEFAULT_MAX_TERMS)
    }

    pub fn compose_bounded(
        &self,
        maps: &[MultiPoly<C>],
        max_terms: usize,
    ) -> Result<MultiPoly<C>, PolyError> {
        if maps.len() != self.nvars {
            return Err(PolyError::ArityMismatch { expected: self.nvars, found: maps.len() });
        }
        let target = match maps.first() {
            Some(m) => m.nvars,
            None => {
                // polynomial in zero variables: a constant
                return Ok(self.clone());
            }
        };
        for m in maps {
            if m.nvars != target {
                return Err(PolyError::VarCountMismatch { left: target, right: m.nvars });
            }
        }
        // powers[i][e] = maps[i]^e, built on demand
        let mut powers: Vec<Vec<MultiPoly<C>>> =
            maps.iter().map(|m| vec![MultiPoly::one(target), m.clone()]).collect();
        for (i, p) in powers.iter_mut().enumerate() {
            let need = self.degree_in(i).unwrap_or(0) as usize;
            while p.len() <= need {
                let next = p.last().unwrap().mul_bounded(&maps[i], max_terms)?;
                p.push(next);
            }
        }
        let mut acc = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul_bounded(&powers[i][e as usize], max_terms)?;
                }
            }
            acc = acc.merge(&term, false);
            if acc.terms.len() > max_terms {
                return Err(PolyError::TermOverflow { limit: max_terms });
            }
        }
        Ok(acc)
    }

    pub fn evaluate(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars, "evaluation point has wrong arity");
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.0.iter()) {
                for _ in 0..e {
                    t = t.mul_ref(x);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Coefficient-wise conversion into another domain.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        MultiPoly { nvars: self.nvars, terms }
    }

    /// Fallible coefficient-wise conversion.
    pub fn try_map_coeffs<D: Coeff, E>(
        &self,
        f: impl Fn(&C) -> Result<D, E>,
    ) -> Result<MultiPoly<D>, E> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let d = f(c)?;
            if !d.is_zero() {
                terms.push((m.clone(), d));
            }
        }
        Ok(MultiPoly { nvars: self.nvars, terms })
    }

    /// Embeds into a ring with `nvars + extra` variables (new ones last).
    pub fn extend_vars(&self, extra: usize) -> Self {
        let nvars = self.nvars + extra;
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.extend(std::iter::repeat(0).take(extra));
                (Monomial(e), c.clone())
            })
            .collect();
        // appending zero exponents keeps graded-lex order
        MultiPoly { nvars, terms }
    }

    /// Multiplies every term by `t^(d - deg term)`, `t` a new last variable.
    pub fn homogenize(&self, target_degree: u32) -> Result<HomogPoly<C>, PolyError> {
        let deg = self.total_degree().finite().ok_or(PolyError::ZeroPolynomial)?;
        if target_degree < deg {
            return Err(PolyError::TargetDegreeTooLow { target: target_degree, degree: deg });
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = m.0.to_vec();
            e.push(target_degree - m.degree());
            (e, c.clone())
        });
        let poly = MultiPoly::from_terms(self.nvars + 1, terms)?;
        Ok(HomogPoly { poly, degree: target_degree })
    }

    /// Drops variable `var` by setting it to 1.
    pub fn set_var_one(&self, var: usize) -> Self {
        let terms = self.terms.iter().map(|(m, c)| {
            let e: Vec<u32> =
                m.0.iter().enumerate().filter(|(i, _)| *i != var).map(|(_, &e)| e).collect();
            (e, c.clone())
        });
        MultiPoly::from_terms(self.nvars - 1, terms).expect("arity is consistent")
    }

    /// Permutes variables: variable `i` becomes variable `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.nvars);
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0; self.nvars];
            for (i, &x) in m.0.iter().enumerate() {
                e[perm[i]] = x;
            }
            (e, c.clone())
        });
        MultiPoly::from_terms(self.nvars, terms).expect("arity is consistent")
    }
}

impl<C: FieldCoeff> MultiPoly<C> {
    /// `p(x + a)`: moves `point` to the origin.
    pub fn translate(&self, point: &[C]) -> Result<Self, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch { expected: self.nvars, found: point.len() });
        }
        let shifted: Vec<_> = point
            .iter()
            .enumerate()
            .map(|(i, a)| {
                MultiPoly::var(self.nvars, i)
                    .merge(&MultiPoly::constant(self.nvars, a.clone()), false)
            })
            .collect();
        self.compose(&shifted)
    }

    /// Divides through by the leading coefficient (no-op on zero).
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            Some((_, c)) => {
                let inv = c.inverse().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }
}

impl<C: FieldCoeff + ExactCoeff> MultiPoly<C> {
    /// Order of vanishing at `point`: the least total degree of a nonzero
    /// term after moving `point` to the origin.
    pub fn vanishing_order(&self, point: &[C]) -> Result<u32, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let moved = self.translate(point)?;
        Ok(moved.min_degree().unwrap())
    }
}

impl<C: Coeff> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let names = var_names(self.nvars);
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c:?})")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", names[i])?,
                    _ => write!(f, "*{}^{}", names[i], e)?,
                }
            }
        }
        Ok(())
    }
}

fn var_names(n: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["x", "y", "z", "w"];
    if n <= 4 {
        SHORT[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (0..n).map(|i| format!("x{i}")).collect()
    }
}

macro_rules! poly_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a, C: Coeff> std::ops::$tr<&'a MultiPoly<C>> for &'a MultiPoly<C> {
            type Output = MultiPoly<C>;
            /// Panics on a variable-count mismatch; use the `checked_*` form
            /// for fallible arithmetic.
            fn $m(self, rhs: &'a MultiPoly<C>) -> MultiPoly<C> {
                self.$checked(rhs).expect(concat!("MultiPoly ", stringify!($m)))
            }
        }
        impl<C: Coeff> std::ops::$tr for MultiPoly<C> {
            type Output = MultiPoly<C>;
            fn $m(self, rhs: MultiPoly<C>) -> MultiPoly<C> {
                (&self).$m(&rhs)
            }
        }
    };
}
poly_op!(Add, add, checked_add);
poly_op!(Sub, sub, checked_sub);
poly_op!(Mul, mul, checked_mul);

impl<C: Coeff> std::ops::Neg for MultiPoly<C> {
    type Output = MultiPoly<C>;
    fn neg(self) -> MultiPoly<C> {
        let terms = self.terms.into_iter().map(|(m, c)| (m, -c)).collect();
        MultiPoly { nvars: self.nvars, terms }
    }
}

/// A homogeneous polynomial in `n + 1` variables, the last one being the
/// hyperplane coordinate `t`.
#[derive(Clone, PartialEq, Eq)]
pub struct HomogPoly<C> {
    poly: MultiPoly<C>,
    degree: u32,
}

impl<C: Coeff> HomogPoly<C> {
    pub fn new(poly: MultiPoly<C>, degree: u32) -> Result<Self, PolyError> {
        if poly.terms.iter().any(|(m, _)| m.degree() != degree) {
            return Err(PolyError::NotHomogeneous(degree));
        }
        Ok(HomogPoly { poly, degree })
    }

    /// Wraps a nonzero homogeneous polynomial, reading off its degree.
    pub fn from_poly(poly: MultiPoly<C>) -> Result<Self, PolyError> {
        let d = poly.total_degree().finite().ok_or(PolyError::ZeroPolynomial)?;
        Self::new(poly, d)
    }

    pub fn poly(&self) -> &MultiPoly<C> {
        &self.poly
    }

    pub fn into_poly(self) -> MultiPoly<C> {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Index of `t`.
    pub fn t_index(&self) -> usize {
        self.poly.nvars - 1
    }

    /// Sets `t = 1`.
    pub fn dehomogenize(&self) -> MultiPoly<C> {
        self.poly.set_var_one(self.t_index())
    }

    /// Divides by `t^m`; the caller guarantees divisibility.
    pub fn divide_t_power(&self, m: u32) -> Self {
        let t = self.t_index();
        let terms = self
            .poly
            .terms
            .iter()
            .map(|(mono, c)| {
                assert!(mono.0[t] >= m, "t^{m} does not divide the polynomial");
                (mono.with_exp(t, mono.0[t] - m), c.clone())
            })
            .collect();
        HomogPoly { poly: MultiPoly { nvars: self.poly.nvars, terms }, degree: self.degree - m }
    }

    /// Substitutes a tuple of homogeneous polynomials of equal degree `e`;
    /// the result is homogeneous of degree `degree · e`.
    pub fn compose_homog(
        &self,
        maps: &[HomogPoly<C>],
        max_terms: usize,
    ) -> Result<HomogPoly<C>, PolyError> {
        let polys: Vec<_> = maps.iter().map(|m| m.poly.clone()).collect();
        let e = maps.first().map_or(0, |m| m.degree);
        let out = self.poly.compose_bounded(&polys, max_terms)?;
        let degree = self.degree * e;
        if out.is_zero() {
            return Ok(HomogPoly { poly: out, degree });
        }
        HomogPoly::new(out, degree)
    }
}

impl<C: ExactCoeff> HomogPoly<C> {
    /// Largest `m` with `t^m` dividing the polynomial.
    pub fn t_adic_valuation(&self) -> Result<u32, PolyError> {
        let t = self.t_index();
        self.poly.terms.iter().map(|(m, _)| m.0[t]).min().ok_or(PolyError::ZeroPolynomial)
    }

    /// Splits off the full power of `t`: returns `(m, h / t^m)`.
    pub fn split_t_power(&self) -> Result<(u32, HomogPoly<C>), PolyError> {
        let m = self.t_adic_valuation()?;
        Ok((m, self.divide_t_power(m)))
    }
}

impl<C: Coeff> fmt::Debug for HomogPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogPoly[deg {}]({:?})", self.degree, self.poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational as Q;

    type P = MultiPoly<Q>;

    fn q(n: i64) -> Q {
        Q::from(n)
    }

    fn poly(nvars: usize, terms: &[(&[u32], i64)]) -> P {
        P::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), q(*c)))).unwrap()
    }

    fn x() -> P {
        P::var(2, 0)
    }
    fn y() -> P {
        P::var(2, 1)
    }

    #[test]
    fn difference_of_squares() {
        let prod = &(&x() + &y()) * &(&x() - &y());
        assert_eq!(prod, poly(2, &[(&[2, 0], 1), (&[0, 2], -1)]));
    }

    #[test]
    fn zero_absorbs() {
        assert!((&x() * &P::zero(2)).is_zero());
        assert_eq!(P::zero(2).total_degree(), Degree::NegInfinity);
        assert!(Degree::NegInfinity < Degree::Finite(0));
    }

    #[test]
    fn merge_cancels_terms() {
        // (x^2 - xz + c + y) + xz with c = 5, three variables
        let c = 5;
        let a = poly(3, &[(&[2, 0, 0], 1), (&[1, 0, 1], -1), (&[0, 0, 0], c), (&[0, 1, 0], 1)]);
        let b = poly(3, &[(&[1, 0, 1], 1)]);
        // oracle: plain dictionary arithmetic on exponent tuples
        let mut dict = std::collections::BTreeMap::new();
        for (e, v) in [([2, 0, 0], 1), ([1, 0, 1], -1), ([0, 0, 0], c), ([0, 1, 0], 1), ([1, 0, 1], 1)] {
            *dict.entry(e).or_insert(0i64) += v;
        }
        dict.retain(|_, v| *v != 0);
        let expected = P::from_terms(3, dict.into_iter().map(|(e, v)| (e.to_vec(), q(v)))).unwrap();
        assert_eq!(&a + &b, expected);
        assert_eq!((&a + &b).num_terms(), 3);
    }

    #[test]
    fn mismatch_errors() {
        let a = P::var(2, 0);
        let b = P::var(3, 0);
        assert_eq!(a.checked_add(&b), Err(PolyError::VarCountMismatch { left: 2, right: 3 }));
        assert!(a.checked_mul(&b).is_err());
        assert!(matches!(a.compose(&[a.clone()]), Err(PolyError::ArityMismatch { .. })));
    }

    #[test]
    fn compose_examples() {
        let maps = [y(), &(&y() * &y()) + &x()];
        assert_eq!(x().compose(&maps).unwrap(), y());
        assert_eq!(y().compose(&maps).unwrap(), maps[1]);
        let p = maps[1].clone();
        // (y^2 + x)^2 + y expanded by hand: y^4 + 2 x y^2 + x^2 + y
        let expected = poly(2, &[(&[0, 4], 1), (&[1, 2], 2), (&[2, 0], 1), (&[0, 1], 1)]);
        assert_eq!(p.compose(&maps).unwrap(), expected);
    }

    #[test]
    fn homogenize_examples() {
        let h = (&(&y() * &y()) + &x()).homogenize(2).unwrap();
        assert_eq!(h.poly(), &poly(3, &[(&[0, 2, 0], 1), (&[1, 0, 1], 1)]));
        assert_eq!(x().homogenize(1).unwrap().poly(), &poly(3, &[(&[1, 0, 0], 1)]));
        assert_eq!(x().homogenize(2).unwrap().poly(), &poly(3, &[(&[1, 0, 1], 1)]));
        assert_eq!(
            (&x() * &x()).homogenize(1),
            Err(PolyError::TargetDegreeTooLow { target: 1, degree: 2 })
        );
        assert_eq!(P::zero(2).homogenize(3), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn t_adic_examples() {
        let yt = HomogPoly::new(poly(3, &[(&[0, 1, 1], 1)]), 2).unwrap();
        assert_eq!(yt.t_adic_valuation(), Ok(1));
        let h = HomogPoly::new(poly(3, &[(&[0, 2, 0], 1), (&[1, 0, 1], 1)]), 2).unwrap();
        assert_eq!(h.t_adic_valuation(), Ok(0));
        let t2 = HomogPoly::new(poly(3, &[(&[0, 0, 2], 1)]), 2).unwrap();
        assert_eq!(t2.t_adic_valuation(), Ok(2));
        let (m, rest) = t2.split_t_power().unwrap();
        assert_eq!((m, rest.degree()), (2, 0));
        let zero = HomogPoly::new(P::zero(3), 2).unwrap();
        assert_eq!(zero.t_adic_valuation(), Err(PolyError::ZeroPolynomial));
        assert!(HomogPoly::new(poly(3, &[(&[0, 2, 0], 1), (&[1, 0, 0], 1)]), 2).is_err());
    }

    #[test]
    fn vanishing_order_examples() {
        let origin = [q(0), q(0)];
        assert_eq!(x().vanishing_order(&origin), Ok(1));
        let cusp = poly(2, &[(&[0, 2], 1), (&[3, 0], -1)]);
        assert_eq!(cusp.vanishing_order(&origin), Ok(2));
        let shifted = poly(2, &[(&[1, 0], 1), (&[0, 0], -1)]);
        assert_eq!(shifted.vanishing_order(&origin), Ok(0));
        assert_eq!(shifted.vanishing_order(&[q(1), q(7)]), Ok(1));
        assert_eq!(P::zero(2).vanishing_order(&origin), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn term_ceiling_is_enforced() {
        let s = &(&x() + &y()) + &P::one(2);
        assert!(matches!(s.pow_bounded(20, 50), Err(PolyError::TermOverflow { limit: 50 })));
        assert!(s.pow_bounded(3, 50).is_ok());
    }

    #[test]
    fn approx_rejects_non_finite() {
        use num_complex::Complex64;
        let bad = MultiPoly::<Complex64>::from_terms(1, [(vec![1], Complex64::new(f64::NAN, 0.0))]);
        assert_eq!(bad, Err(PolyError::NonFinite));
    }

    #[test]
    fn canonical_order_is_graded_lex() {
        let p = poly(2, &[(&[0, 3], 1), (&[2, 0], 1), (&[1, 1], 1), (&[0, 0], 1)]);
        let order: Vec<Vec<u32>> = p.terms().map(|(m, _)| m.exps().to_vec()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![1, 1], vec![2, 0], vec![0, 3]]);
    }
}
