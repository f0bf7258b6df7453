//! Siu decomposition of pulled-back divisors against the hyperplane at
//! infinity.
//!
//! For a divisor `S = Z(h)` of degree `d` and an algebraically stable `f` of
//! degree `λ`, the pullback `λ^{-n} (f^n)^* S` splits as
//! `c_n [t = 0] + (1 − c_n) S_n` with `c_n = m_n / (d λ^n)`, where `m_n` is the
//! power of `t` dividing `h ∘ lift(f^n)`. The sequence is built one pullback
//! at a time from the previous residual.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::automorphism::{AutomorphismError, Direction, InfinityImage, PolyAutomorphism, ProjectivePoint};
use crate::poly::{HomogPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::{ExactHomog, ExactPoly};

/// Seed for the generic probe point used to locate `X^+`.
pub const PROBE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PullbackError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Automorphism(#[from] AutomorphismError),
    #[error("divisor polynomial has {found} variables, expected {expected}")]
    VarCount { expected: usize, found: usize },
    #[error("the map is not algebraically stable: deg f^{n} falls short of λ^{n} by {dropped}")]
    StabilityViolation { n: u32, dropped: u64 },
    #[error("term ceiling {limit} exceeded after {} completed steps", completed.len())]
    Overflow { completed: Vec<SiuDecomposition>, limit: usize },
    #[error("point {0} is at infinity; a finite point is required")]
    PointAtInfinity(ProjectivePoint),
    #[error("the image of the hyperplane at infinity is not a point")]
    NoInfinityPoint,
    #[error("multiplicity overflow")]
    MultiplicityOverflow,
    #[error("a constant polynomial defines no divisor")]
    EmptyDivisor,
}

/// An effective divisor `Z(h)` of `P^k`, `h` homogeneous in `z_1..z_k, t`.
#[derive(Clone, PartialEq, Eq)]
pub struct Divisor {
    h: ExactHomog,
}

impl Divisor {
    /// `h` must be nonzero and homogeneous of degree `degree ≥ 1`; it is
    /// rescaled so that its graded-lex leading coefficient is 1.
    pub fn new(h: ExactPoly, degree: u32) -> Result<Self, PullbackError> {
        if h.is_zero() {
            return Err(PolyError::ZeroPolynomial.into());
        }
        if degree == 0 {
            return Err(PullbackError::EmptyDivisor);
        }
        let h = HomogPoly::new(h.monic(), degree)?;
        Ok(Divisor { h })
    }

    /// Reads the degree off a nonzero homogeneous `h`.
    pub fn from_homog(h: ExactPoly) -> Result<Self, PullbackError> {
        let d = h.total_degree().finite().ok_or(PolyError::ZeroPolynomial)?;
        Self::new(h, d)
    }

    /// Closure in `P^k` of the affine hypersurface `Z(p)`.
    pub fn from_affine(p: &ExactPoly) -> Result<Self, PullbackError> {
        let d = p.total_degree().finite().ok_or(PolyError::ZeroPolynomial)?;
        Self::new(p.homogenize(d)?.into_poly(), d)
    }

    /// The hyperplane at infinity `[t = 0]` of `P^k`.
    pub fn hyperplane_at_infinity(k: usize) -> Self {
        Self::new(ExactPoly::var(k + 1, k), 1).expect("t is homogeneous")
    }

    pub fn homog(&self) -> &ExactHomog {
        &self.h
    }

    pub fn degree(&self) -> u32 {
        self.h.degree()
    }

    /// Number of affine coordinates `k`.
    pub fn dim(&self) -> usize {
        self.h.poly().nvars() - 1
    }
}

impl fmt::Debug for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z({:?})", self.h.poly())
    }
}

/// One step of the decomposition `λ^{-n}(f^n)^*S = c_n [t=0] + (1 − c_n) S_n`.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct SiuDecomposition {
    pub n: u32,
    /// Multiplicity of `[t = 0]` in `(f^n)^* S`.
    pub m: u64,
    #[serde(skip)]
    pub residual: ExactHomog,
    #[serde(serialize_with = "ser_ratio")]
    pub c: BigRational,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::io::rational_string(r))
}

impl SiuDecomposition {
    pub fn residual_degree(&self) -> u32 {
        self.residual.degree()
    }
}

impl fmt::Debug for SiuDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} m={} c={} deg S_n={}", self.n, self.m, self.c, self.residual_degree())
    }
}

/// `c_0, c_1, ..., c_N` for one divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiuSequence {
    /// `n = 0`: the `t`-content of `h` itself.
    pub initial: SiuDecomposition,
    /// `n = 1..=N`.
    pub steps: Vec<SiuDecomposition>,
}

impl SiuSequence {
    /// `c_1, ..., c_N`.
    pub fn coefficients(&self) -> Vec<BigRational> {
        self.steps.iter().map(|s| s.c.clone()).collect()
    }

    /// `c_n` for `0 ≤ n ≤ N`.
    pub fn c(&self, n: u32) -> Option<&BigRational> {
        if n == 0 {
            Some(&self.initial.c)
        } else {
            self.steps.get(n as usize - 1).map(|s| &s.c)
        }
    }

    pub fn last(&self) -> &SiuDecomposition {
        self.steps.last().unwrap_or(&self.initial)
    }

    pub fn is_monotone_in_unit_interval(&self) -> bool {
        let all: Vec<&BigRational> = std::iter::once(&self.initial.c).chain(self.steps.iter().map(|s| &s.c)).collect();
        all.iter().all(|c| !c.is_negative() && **c <= BigRational::one())
            && all.windows(2).all(|w| w[0] <= w[1])
    }
}

fn ratio(m: u64, total: u64) -> BigRational {
    BigRational::new(BigInt::from(m), BigInt::from(total))
}

fn check_dims(f: &PolyAutomorphism, s: &Divisor) -> Result<(), PullbackError> {
    if s.dim() != f.dim() {
        return Err(PullbackError::VarCount { expected: f.dim() + 1, found: s.dim() + 1 });
    }
    Ok(())
}

/// Evidence that `f` is algebraically stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stability {
    /// `X^+` is a point outside `I^+`, so stability holds for all `n`.
    WeaklyRegular(ProjectivePoint),
    /// `δ₁(f^n) = λ^n` was checked symbolically for `n ≤ horizon`.
    Horizon(u32),
}

/// Decides stability from weak regularity, or else checks degrees up to
/// `horizon`.
pub fn stability(f: &PolyAutomorphism, horizon: u32) -> Result<Stability, PullbackError> {
    if let Some(x) = weakly_regular_point(f)? {
        return Ok(Stability::WeaklyRegular(x));
    }
    let lambda = u64::from(f.first_degree());
    let degrees = f.degree_sequence(horizon.max(1), Direction::Forward)?;
    for (i, &d) in degrees.degrees.iter().enumerate() {
        let full = lambda.saturating_pow(i as u32 + 1);
        if d < full {
            return Err(PullbackError::StabilityViolation { n: i as u32 + 1, dropped: full - d });
        }
    }
    Ok(Stability::Horizon(horizon.max(1)))
}

/// `X^+` when `f` is weakly regular (`X^+` a point not in `I^+`).
pub fn weakly_regular_point(f: &PolyAutomorphism) -> Result<Option<ProjectivePoint>, PullbackError> {
    if f.first_degree() < 2 {
        return Ok(None);
    }
    match f.infinity_image(PROBE_SEED)? {
        InfinityImage::Point { point, .. } if !f.indeterminacy_membership(&point)? => Ok(Some(point)),
        _ => Ok(None),
    }
}

fn lift(f: &PolyAutomorphism) -> Result<Vec<ExactHomog>, PullbackError> {
    Ok(f.reduced_lift(1)?.components)
}

/// `h ∘ lift(f)`, homogeneous of degree `d·λ`.
pub fn pullback_divisor(f: &PolyAutomorphism, s: &Divisor) -> Result<ExactHomog, PullbackError> {
    check_dims(f, s)?;
    stability(f, 1)?;
    Ok(s.h.compose_homog(&lift(f)?, f.max_terms())?)
}

/// `c_0..c_N` by iterated pullback of residuals.
pub fn siu_sequence(f: &PolyAutomorphism, s: &Divisor, n_max: u32) -> Result<SiuSequence, PullbackError> {
    check_dims(f, s)?;
    stability(f, n_max)?;
    let lifted = lift(f)?;
    let lambda = u64::from(f.first_degree());
    let d = u64::from(s.degree());
    let (m0, r0) = s.h.split_t_power()?;
    let initial = SiuDecomposition { n: 0, m: u64::from(m0), residual: r0, c: ratio(u64::from(m0), d) };
    let mut steps: Vec<SiuDecomposition> = Vec::with_capacity(n_max as usize);
    let mut total = d;
    for n in 1..=n_max {
        let prev = steps.last().unwrap_or(&initial);
        let pulled = match prev.residual.compose_homog(&lifted, f.max_terms()) {
            Ok(p) => p,
            Err(PolyError::TermOverflow { limit }) => {
                return Err(PullbackError::Overflow { completed: steps, limit })
            }
            Err(e) => return Err(e.into()),
        };
        let (v, residual) = pulled.split_t_power()?;
        let m = lambda
            .checked_mul(prev.m)
            .and_then(|x| x.checked_add(u64::from(v)))
            .ok_or(PullbackError::MultiplicityOverflow)?;
        total = total.checked_mul(lambda).ok_or(PullbackError::MultiplicityOverflow)?;
        steps.push(SiuDecomposition { n, m, residual, c: ratio(m, total) });
    }
    Ok(SiuSequence { initial, steps })
}

/// `m_n` computed directly: `h` composed with the degree-`λ^n` lift of the
/// symbolic iterate `f^n`.
pub fn siu_direct(f: &PolyAutomorphism, s: &Divisor, n: u32) -> Result<SiuDecomposition, PullbackError> {
    check_dims(f, s)?;
    let k = f.dim();
    let full = f.first_degree().checked_pow(n).ok_or(PullbackError::MultiplicityOverflow)?;
    let iterate = f.iterate(n, Direction::Forward)?;
    let mut comps: Vec<ExactHomog> = Vec::with_capacity(k + 1);
    for p in iterate.iter() {
        comps.push(if p.is_zero() {
            HomogPoly::new(ExactPoly::zero(k + 1), full)?
        } else {
            p.homogenize(full)?
        });
    }
    let mut t_exps = vec![0u32; k + 1];
    t_exps[k] = full;
    comps.push(HomogPoly::new(
        ExactPoly::monomial(k + 1, crate::poly::Monomial::new(&t_exps), GaussianRational::one()),
        full,
    )?);
    let pulled = s.h.compose_homog(&comps, f.max_terms())?;
    let (m, residual) = pulled.split_t_power()?;
    let total = u64::from(s.degree()) * u64::from(full);
    Ok(SiuDecomposition { n, m: u64::from(m), residual, c: ratio(u64::from(m), total) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CValue {
    Exact {
        #[serde(serialize_with = "ser_ratio")]
        value: BigRational,
    },
    Interval {
        #[serde(serialize_with = "ser_ratio")]
        lo: BigRational,
        #[serde(serialize_with = "ser_ratio")]
        hi: BigRational,
    },
}

impl CValue {
    /// A lower bound for `c_S`.
    pub fn lower(&self) -> &BigRational {
        match self {
            CValue::Exact { value } => value,
            CValue::Interval { lo, .. } => lo,
        }
    }
}

/// The limit `c_S` of the Siu coefficients at a finite horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CLimit {
    pub value: CValue,
    /// `c_n` is constant over the trailing half-window (or certified).
    pub stabilized: bool,
    /// The last residual does not vanish at `X^+` of a weakly regular map,
    /// which freezes `c_n` for every later `n`.
    pub certified: bool,
}

/// `c_S` from `c_1..c_N`.
pub fn c_limit(f: &PolyAutomorphism, s: &Divisor, n_max: u32) -> Result<CLimit, PullbackError> {
    let seq = siu_sequence(f, s, n_max)?;
    Ok(c_limit_from(f, &seq)?)
}

/// As [`c_limit`], reusing an already computed sequence.
pub fn c_limit_from(f: &PolyAutomorphism, seq: &SiuSequence) -> Result<CLimit, PullbackError> {
    let last = seq.last();
    let certified = match weakly_regular_point(f)? {
        Some(x) => !last.residual.poly().evaluate(x.coords()).is_zero(),
        None => false,
    };
    let cs = seq.coefficients();
    let window = cs.len().div_ceil(2).max(1);
    let tail = &cs[cs.len().saturating_sub(window)..];
    let constant = !tail.is_empty() && tail.iter().all(|c| *c == tail[0]);
    let value = if constant || certified {
        CValue::Exact { value: last.c.clone() }
    } else {
        // monotone and bounded by the total mass 1
        CValue::Interval { lo: last.c.clone(), hi: BigRational::one() }
    };
    Ok(CLimit { value, stabilized: constant || certified, certified })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LelongRow {
    pub point: Vec<String>,
    pub image: Vec<String>,
    /// Vanishing order of the residual `S_n` at `z`.
    pub residual_order: u32,
    /// Vanishing order of `h` at `f^n(z)`.
    pub image_order: u32,
    pub orders_agree: bool,
    /// `ord_z(S_n) ≤ max multiplicity of S` (the normalized Lelong bound).
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LelongReport {
    pub n: u32,
    pub rows: Vec<LelongRow>,
}

impl LelongReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.orders_agree && r.bound_holds)
    }
}

/// Compares Lelong numbers of `S_n` at `z` and of `S` at `f^n(z)`.
///
/// The multiplicity of a degree-`d` divisor at any point is at most `d`,
/// which is the bound used for the normalized inequality.
pub fn lelong_bound_check(
    f: &PolyAutomorphism,
    s: &Divisor,
    n: u32,
    points: &[ProjectivePoint],
) -> Result<LelongReport, PullbackError> {
    let seq = siu_sequence(f, s, n)?;
    let residual = seq.last().residual.dehomogenize();
    let h = s.h.dehomogenize();
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        if p.is_at_infinity() {
            return Err(PullbackError::PointAtInfinity(p.clone()));
        }
        let z = p.head().to_vec();
        let mut image = z.clone();
        for _ in 0..n {
            image = f.apply(&image, Direction::Forward);
        }
        let residual_order = residual.vanishing_order(&z)?;
        let image_order = h.vanishing_order(&image)?;
        rows.push(LelongRow {
            point: z.iter().map(ToString::to_string).collect(),
            image: image.iter().map(ToString::to_string).collect(),
            residual_order,
            image_order,
            orders_agree: residual_order == image_order,
            bound_holds: residual_order <= s.degree(),
        });
    }
    Ok(LelongReport { n, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformationReport {
    /// `(c_n(f^*S), c_{n+1}(S))` for `n = 0..=N`.
    #[serde(serialize_with = "ser_pairs")]
    pub pairs: Vec<(BigRational, BigRational)>,
    pub holds: bool,
}

fn ser_pairs<S: serde::Serializer>(p: &[(BigRational, BigRational)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.len()))?;
    for (a, b) in p {
        seq.serialize_element(&(crate::io::rational_string(a), crate::io::rational_string(b)))?;
    }
    seq.end()
}

/// Checks `c_n(f^*S) = c_{n+1}(S)` for `n ≤ N`.
pub fn transformation_rule_check(
    f: &PolyAutomorphism,
    s: &Divisor,
    n_max: u32,
) -> Result<TransformationReport, PullbackError> {
    let pulled = Divisor::new(pullback_divisor(f, s)?.into_poly(), s.degree() * f.first_degree())?;
    let lhs = siu_sequence(f, &pulled, n_max)?;
    let rhs = siu_sequence(f, s, n_max + 1)?;
    let pairs: Vec<_> = (0..=n_max)
        .map(|n| (lhs.c(n).unwrap().clone(), rhs.c(n + 1).unwrap().clone()))
        .collect();
    let holds = pairs.iter().all(|(a, b)| a == b);
    Ok(TransformationReport { pairs, holds })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PositivityReport {
    pub x_plus: ProjectivePoint,
    pub mult_at_x_plus: u32,
    pub c_limit: CLimit,
    /// `c_S > 0` is decided when the lower bound is positive or the limit is
    /// exact.
    pub decided: bool,
    pub c_positive: bool,
    pub consistent: bool,
}

/// Compares `c_S > 0` with `ν(S, X^+) > 0`.
pub fn positivity_criterion_check(
    f: &PolyAutomorphism,
    s: &Divisor,
    n_max: u32,
) -> Result<PositivityReport, PullbackError> {
    check_dims(f, s)?;
    let x_plus = f.infinity_image(PROBE_SEED)?.point().cloned().ok_or(PullbackError::NoInfinityPoint)?;
    let j = x_plus.leading_index();
    // affine chart {z_j = 1}; remaining coordinates keep their order, t last
    let chart = s.h.poly().set_var_one(j);
    let local: Vec<GaussianRational> =
        x_plus.coords().iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| c.clone()).collect();
    let mult = chart.vanishing_order(&local)?;
    let limit = c_limit(f, s, n_max)?;
    let lower_positive = !limit.value.lower().is_zero();
    let decided = lower_positive || matches!(limit.value, CValue::Exact { .. });
    let consistent = decided && (lower_positive == (mult > 0));
    Ok(PositivityReport {
        x_plus,
        mult_at_x_plus: mult,
        c_limit: limit,
        decided,
        c_positive: lower_positive,
        consistent,
    })
}
