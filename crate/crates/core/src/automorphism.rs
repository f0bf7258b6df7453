//! Polynomial automorphisms of `C^k` with a verified polynomial inverse.
//!
//! Besides iteration (memoized per direction), this module computes degree
//! sequences, reduced lifts to projective space, the image `X^+` of the
//! hyperplane at infinity and membership in the indeterminacy locus `I^+`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::poly::{HomogPoly, MultiPoly, PolyError, DEFAULT_MAX_TERMS};
use crate::recurrence::{
    dynamical_degree_estimate, DegreeValue, DynamicalDegreeEstimate, EstimateMethod,
    RecurrenceError,
};
use crate::scalar::{Coeff, FieldCoeff, Fp2, GaussianRational};
use crate::{ExactHomog, ExactPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn index(self) -> usize {
        match self {
            Direction::Forward => 0,
            Direction::Inverse => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Inverse => "inverse",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Direction::Forward),
            "inverse" => Ok(Direction::Inverse),
            other => Err(format!("unknown direction '{other}' (expected forward|inverse)")),
        }
    }
}

/// Which composition failed to reduce to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionOrder {
    /// `inverse ∘ forward`
    InverseAfterForward,
    /// `forward ∘ inverse`
    ForwardAfterInverse,
}

impl fmt::Display for CompositionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompositionOrder::InverseAfterForward => "inverse∘forward",
            CompositionOrder::ForwardAfterInverse => "forward∘inverse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AutomorphismError {
    #[error("expected {expected} components in {k} variables, got {found}")]
    Arity { k: usize, expected: usize, found: usize },
    #[error("component {component} of {order} is not the identity")]
    InverseMismatch { component: usize, order: CompositionOrder },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("term ceiling {limit} exceeded after {} completed iterates", completed.len())]
    IterateOverflow { completed: Vec<u64>, limit: usize },
    #[error("first algebraic degree {lambda} is below 2")]
    DegreeTooLow { lambda: u32 },
    #[error("point {0} is not on the hyperplane at infinity")]
    NotAtInfinity(ProjectivePoint),
    #[error("point {0} is at infinity")]
    AtInfinity(ProjectivePoint),
    #[error("all top-degree parts vanish identically")]
    DegenerateTopParts,
    #[error("no generic point found off the special locus")]
    NoGenericPoint,
    #[error("a coefficient denominator vanishes modulo the probe prime")]
    ModularReduction,
    #[error("unsupported dimension {k}: {what}")]
    Unsupported { k: usize, what: &'static str },
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error("all homogeneous coordinates are zero")]
    ZeroPoint,
}

/// A point of `P^k` with exact coordinates `[z_1 : ... : z_k : t]`, scaled so
/// its first nonzero coordinate is 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ProjectivePoint(Vec<GaussianRational>);

impl ProjectivePoint {
    pub fn new(coords: Vec<GaussianRational>) -> Result<Self, AutomorphismError> {
        let lead = coords.iter().find(|c| !c.is_zero()).ok_or(AutomorphismError::ZeroPoint)?;
        let inv = lead.inverse().expect("nonzero");
        Ok(ProjectivePoint(coords.iter().map(|c| c.mul_ref(&inv)).collect()))
    }

    /// `[z : 1]` for a finite point `z`.
    pub fn finite(z: &[GaussianRational]) -> Self {
        let mut c = z.to_vec();
        c.push(GaussianRational::one());
        Self::new(c).expect("t = 1")
    }

    /// `[v : 0]` for a direction `v ≠ 0`.
    pub fn at_infinity(v: &[GaussianRational]) -> Result<Self, AutomorphismError> {
        let mut c = v.to_vec();
        c.push(GaussianRational::zero());
        Self::new(c)
    }

    pub fn coords(&self) -> &[GaussianRational] {
        &self.0
    }

    /// Number of affine coordinates `k`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_at_infinity(&self) -> bool {
        self.0.last().is_some_and(|t| t.is_zero())
    }

    /// The affine coordinates `z_1..z_k` (the direction when at infinity).
    pub fn head(&self) -> &[GaussianRational] {
        &self.0[..self.dim()]
    }

    /// Index of the first nonzero coordinate (which equals 1).
    pub fn leading_index(&self) -> usize {
        self.0.iter().position(|c| !c.is_zero()).expect("nonzero point")
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for ProjectivePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `δ₁(f^n)` for `n = 1..=N` in one direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeSequence {
    pub direction: Direction,
    /// `degrees[n - 1] = δ₁(f^n)`.
    pub degrees: Vec<u64>,
}

impl DegreeSequence {
    /// `δ₁(f^n)`, with `δ₁(f^0) = 1`.
    pub fn get(&self, n: usize) -> Option<u64> {
        if n == 0 {
            Some(1)
        } else {
            self.degrees.get(n - 1).copied()
        }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Checks `δ₁(f^{n+m}) ≤ δ₁(f^n)·δ₁(f^m)` over all computed pairs.
    pub fn is_submultiplicative(&self) -> bool {
        let n = self.len();
        (1..=n).all(|i| {
            (1..=n - i).all(|j| {
                let lhs = self.get(i + j).unwrap();
                lhs <= self.get(i).unwrap().saturating_mul(self.get(j).unwrap())
            })
        })
    }

    pub fn estimate(&self) -> Result<DynamicalDegreeEstimate, RecurrenceError> {
        dynamical_degree_estimate(&self.degrees)
    }
}

/// How iterate degrees are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMethod {
    /// Expand `f^n` symbolically.
    Symbolic,
    /// Restrict `f^n` to two seeded random lines over `F_{p^2}` and take the
    /// larger univariate degree. Never exceeds the true degree and equals it
    /// unless the random data hits a proper algebraic subset.
    GenericLine { seed: u64 },
}

/// The homogeneous lift of `f^n` with common powers of `t` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLift {
    /// `k + 1` homogeneous polynomials of equal degree, the last being `t^d`.
    pub components: Vec<ExactHomog>,
    /// `d = δ₁(f^n)`.
    pub degree: u32,
    /// `λ^n − δ₁(f^n)`: the power of `t` that cancels from `n` composed lifts of `f`.
    pub dropped: u64,
}

/// Result of probing the image of the hyperplane at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum InfinityImage {
    Point {
        point: ProjectivePoint,
        /// `φ` with `F_j^{(λ)} = c_j·φ`; `I^+` is `{t = 0, φ = 0}`.
        factor: ExactPoly,
        note: Option<String>,
    },
    NonConstant,
}

impl InfinityImage {
    pub fn point(&self) -> Option<&ProjectivePoint> {
        match self {
            InfinityImage::Point { point, .. } => Some(point),
            InfinityImage::NonConstant => None,
        }
    }
}

type IterateCache = RwLock<BTreeMap<u32, Arc<Vec<ExactPoly>>>>;

/// A polynomial automorphism `f` of `C^k` together with `f^{-1}`.
pub struct PolyAutomorphism {
    k: usize,
    forward: Vec<ExactPoly>,
    inverse: Vec<ExactPoly>,
    lambda: u32,
    max_terms: usize,
    cache: [IterateCache; 2],
}

impl Clone for PolyAutomorphism {
    fn clone(&self) -> Self {
        let copy = |c: &IterateCache| RwLock::new(c.read().expect("cache lock").clone());
        PolyAutomorphism {
            k: self.k,
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
            lambda: self.lambda,
            max_terms: self.max_terms,
            cache: [copy(&self.cache[0]), copy(&self.cache[1])],
        }
    }
}

impl PartialEq for PolyAutomorphism {
    fn eq(&self, other: &Self) -> bool {
        self.forward == other.forward && self.inverse == other.inverse
    }
}

impl fmt::Debug for PolyAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolyAutomorphism")
            .field("forward", &self.forward)
            .field("inverse", &self.inverse)
            .finish()
    }
}

/// `outer ∘ inner`, componentwise.
pub fn compose_maps(
    outer: &[ExactPoly],
    inner: &[ExactPoly],
    max_terms: usize,
) -> Result<Vec<ExactPoly>, PolyError> {
    outer.iter().map(|p| p.compose_bounded(inner, max_terms)).collect()
}

pub fn identity_map(k: usize) -> Vec<ExactPoly> {
    (0..k).map(|i| ExactPoly::var(k, i)).collect()
}

fn max_degree(map: &[ExactPoly]) -> u32 {
    map.iter().filter_map(|p| p.total_degree().finite()).max().unwrap_or(0)
}

impl PolyAutomorphism {
    /// Builds `f` from its components and those of `f^{-1}`, checking both
    /// `f^{-1} ∘ f = id` and `f ∘ f^{-1} = id` symbolically.
    pub fn new(forward: Vec<ExactPoly>, inverse: Vec<ExactPoly>) -> Result<Self, AutomorphismError> {
        let f = Self::new_unchecked(forward, inverse)?;
        let id = identity_map(f.k);
        let checks = [
            (&f.inverse, &f.forward, CompositionOrder::InverseAfterForward),
            (&f.forward, &f.inverse, CompositionOrder::ForwardAfterInverse),
        ];
        for (outer, inner, order) in checks {
            for (i, p) in outer.iter().enumerate() {
                if p.compose_bounded(inner, f.max_terms)? != id[i] {
                    return Err(AutomorphismError::InverseMismatch { component: i, order });
                }
            }
        }
        Ok(f)
    }

    /// Skips the inverse check; arities are still validated. For callers
    /// that obtained the pair by composing verified automorphisms.
    pub fn new_unchecked(
        forward: Vec<ExactPoly>,
        inverse: Vec<ExactPoly>,
    ) -> Result<Self, AutomorphismError> {
        let k = forward.len();
        if inverse.len() != k {
            return Err(AutomorphismError::Arity { k, expected: k, found: inverse.len() });
        }
        for p in forward.iter().chain(&inverse) {
            if p.nvars() != k {
                return Err(AutomorphismError::Arity { k, expected: k, found: p.nvars() });
            }
        }
        let lambda = max_degree(&forward);
        Ok(PolyAutomorphism {
            k,
            forward,
            inverse,
            lambda,
            max_terms: DEFAULT_MAX_TERMS,
            cache: Default::default(),
        })
    }

    pub fn identity(k: usize) -> Self {
        Self::new_unchecked(identity_map(k), identity_map(k)).expect("consistent arity")
    }

    /// Overrides the term ceiling used for iterates.
    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self.cache = Default::default();
        self
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn forward(&self) -> &[ExactPoly] {
        &self.forward
    }

    pub fn inverse(&self) -> &[ExactPoly] {
        &self.inverse
    }

    pub fn components(&self, direction: Direction) -> &[ExactPoly] {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    /// First algebraic degree `λ = max deg P_j`.
    pub fn first_degree(&self) -> u32 {
        self.lambda
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `f^{-1}` as an automorphism.
    pub fn inverted(&self) -> PolyAutomorphism {
        Self::new_unchecked(self.inverse.clone(), self.forward.clone())
            .expect("consistent arity")
            .with_max_terms(self.max_terms)
    }

    /// `f ∘ f`.
    pub fn square(&self) -> Result<PolyAutomorphism, AutomorphismError> {
        let fwd = compose_maps(&self.forward, &self.forward, self.max_terms)?;
        let inv = compose_maps(&self.inverse, &self.inverse, self.max_terms)?;
        Ok(Self::new_unchecked(fwd, inv)?.with_max_terms(self.max_terms))
    }

    /// `F ∘ self ∘ F^{-1}`, re-verified.
    pub fn conjugate_by(&self, change: &PolyAutomorphism) -> Result<PolyAutomorphism, AutomorphismError> {
        let m = self.max_terms;
        let fwd = compose_maps(&change.forward, &compose_maps(&self.forward, &change.inverse, m)?, m)?;
        let inv = compose_maps(&change.forward, &compose_maps(&self.inverse, &change.inverse, m)?, m)?;
        Self::new(fwd, inv)
    }

    /// `g ∘ self` for another automorphism `g` of the same space.
    pub fn then(&self, g: &PolyAutomorphism) -> Result<PolyAutomorphism, AutomorphismError> {
        let m = self.max_terms;
        let fwd = compose_maps(&g.forward, &self.forward, m)?;
        let inv = compose_maps(&self.inverse, &g.inverse, m)?;
        Self::new(fwd, inv)
    }

    /// Evaluates `f` (or `f^{-1}`) at an exact point.
    pub fn apply(&self, z: &[GaussianRational], direction: Direction) -> Vec<GaussianRational> {
        self.components(direction).iter().map(|p| p.evaluate(z)).collect()
    }

    /// Components of `f^n` (or `f^{-n}`), memoized.
    pub fn iterate(&self, n: u32, direction: Direction) -> Result<Arc<Vec<ExactPoly>>, AutomorphismError> {
        if n == 0 {
            return Ok(Arc::new(identity_map(self.k)));
        }
        let cache = &self.cache[direction.index()];
        let (mut m, mut current) = {
            let guard = cache.read().expect("cache lock");
            if let Some(hit) = guard.get(&n) {
                return Ok(Arc::clone(hit));
            }
            match guard.range(..n).next_back() {
                Some((&m, v)) => (m, Arc::clone(v)),
                None => (1, Arc::new(self.components(direction).to_vec())),
            }
        };
        let base = self.components(direction);
        loop {
            current = self.store(direction, m, current);
            if m == n {
                return Ok(current);
            }
            // f^{m+1} = f ∘ f^m keeps the outer polynomial small
            current = Arc::new(compose_maps(base, &current, self.max_terms)?);
            m += 1;
        }
    }

    fn store(&self, direction: Direction, n: u32, value: Arc<Vec<ExactPoly>>) -> Arc<Vec<ExactPoly>> {
        let mut guard = self.cache[direction.index()].write().expect("cache lock");
        Arc::clone(guard.entry(n).or_insert(value))
    }

    /// Homogeneous lift of `f^n`: each component homogenized to
    /// `d = δ₁(f^n)`, followed by `t^d`.
    pub fn reduced_lift(&self, n: u32) -> Result<ReducedLift, AutomorphismError> {
        let iterate = self.iterate(n, Direction::Forward)?;
        let degree = max_degree(&iterate);
        let k = self.k;
        let mut components = Vec::with_capacity(k + 1);
        for p in iterate.iter() {
            components.push(if p.is_zero() {
                HomogPoly::new(MultiPoly::zero(k + 1), degree)?
            } else {
                p.homogenize(degree)?
            });
        }
        let mut t_exps = vec![0u32; k + 1];
        t_exps[k] = degree;
        components.push(HomogPoly::new(
            MultiPoly::monomial(k + 1, crate::poly::Monomial::new(&t_exps), GaussianRational::one()),
            degree,
        )?);
        let full = u64::from(self.lambda).saturating_pow(n);
        Ok(ReducedLift { components, degree, dropped: full - u64::from(degree) })
    }

    /// `δ₁(f^{±n})` for `n = 1..=n_max`.
    pub fn degree_sequence(
        &self,
        n_max: u32,
        direction: Direction,
    ) -> Result<DegreeSequence, AutomorphismError> {
        self.degree_sequence_with(n_max, direction, DegreeMethod::Symbolic)
    }

    pub fn degree_sequence_with(
        &self,
        n_max: u32,
        direction: Direction,
        method: DegreeMethod,
    ) -> Result<DegreeSequence, AutomorphismError> {
        let degrees = match method {
            DegreeMethod::Symbolic => {
                let mut degrees = Vec::with_capacity(n_max as usize);
                for n in 1..=n_max {
                    match self.iterate(n, direction) {
                        Ok(it) => degrees.push(u64::from(max_degree(&it))),
                        Err(AutomorphismError::Poly(PolyError::TermOverflow { limit })) => {
                            return Err(AutomorphismError::IterateOverflow { completed: degrees, limit })
                        }
                        Err(e) => return Err(e),
                    }
                }
                degrees
            }
            DegreeMethod::GenericLine { seed } => {
                let first = self.line_degrees(n_max, direction, seed)?;
                let second = self.line_degrees(n_max, direction, seed ^ 0x9e37_79b9_7f4a_7c15)?;
                first.into_iter().zip(second).map(|(a, b)| a.max(b)).collect()
            }
        };
        Ok(DegreeSequence { direction, degrees })
    }

    fn line_degrees(&self, n_max: u32, direction: Direction, seed: u64) -> Result<Vec<u64>, AutomorphismError> {
        let map: Vec<MultiPoly<Fp2>> = self
            .components(direction)
            .iter()
            .map(|p| p.try_map_coeffs(|c| c.to_fp2().ok_or(AutomorphismError::ModularReduction)))
            .collect::<Result<_, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || Fp2::new(rng.gen_range(0..Fp2::P), rng.gen_range(0..Fp2::P));
        let mut line: Vec<UPoly> = (0..self.k).map(|_| UPoly::new(vec![draw(), draw()])).collect();
        let mut degrees = Vec::with_capacity(n_max as usize);
        for _ in 0..n_max {
            line = map.iter().map(|p| UPoly::substitute(p, &line)).collect();
            degrees.push(line.iter().filter_map(UPoly::degree).max().unwrap_or(0) as u64);
        }
        Ok(degrees)
    }

    fn top_parts(&self, direction: Direction) -> Vec<ExactPoly> {
        let map = self.components(direction);
        let lambda = max_degree(map);
        map.iter().map(|p| p.homogeneous_part(lambda)).collect()
    }

    /// The image of `{t = 0} \ I^+` under `f`, when it is a single point.
    ///
    /// A seeded random point proposes the candidate; the minor identities
    /// `c_j F_i^{(λ)} − c_i F_j^{(λ)} ≡ 0` decide.
    pub fn infinity_image(&self, seed: u64) -> Result<InfinityImage, AutomorphismError> {
        if self.lambda < 2 {
            return Err(AutomorphismError::DegreeTooLow { lambda: self.lambda });
        }
        let top = self.top_parts(Direction::Forward);
        if top.iter().all(MultiPoly::is_zero) {
            return Err(AutomorphismError::DegenerateTopParts);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let candidate = self.probe_top(&top, &mut rng)?;
        let c = candidate.head();
        for i in 0..self.k {
            for j in i + 1..self.k {
                let minor = &top[i].scale(&c[j]) - &top[j].scale(&c[i]);
                if !minor.is_zero() {
                    return Ok(InfinityImage::NonConstant);
                }
            }
        }
        let second = self.probe_top(&top, &mut rng)?;
        assert_eq!(candidate, second, "constant image must not depend on the probe point");
        let factor = top[candidate.leading_index()].clone();
        let note = monomial_content(&factor).map(|content| {
            format!(
                "top-degree parts share the monomial factor {:?}; \
                 X+ is the image of the hyperplane off its zero set",
                ExactPoly::monomial(factor.nvars(), content, GaussianRational::one())
            )
        });
        Ok(InfinityImage::Point { point: candidate, factor, note })
    }

    fn probe_top(&self, top: &[ExactPoly], rng: &mut ChaCha8Rng) -> Result<ProjectivePoint, AutomorphismError> {
        for _ in 0..64 {
            let z: Vec<GaussianRational> = (0..self.k)
                .map(|_| {
                    let num: i64 = rng.gen_range(1..=97) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    GaussianRational::from_ratio(num, rng.gen_range(1..=31))
                })
                .collect();
            let mut values: Vec<GaussianRational> = top.iter().map(|p| p.evaluate(&z)).collect();
            if values.iter().all(|v| v.is_zero()) {
                continue;
            }
            values.push(GaussianRational::zero());
            return ProjectivePoint::new(values);
        }
        Err(AutomorphismError::NoGenericPoint)
    }

    /// Is `p` (on the hyperplane at infinity) in `I^+`?
    pub fn indeterminacy_membership(&self, p: &ProjectivePoint) -> Result<bool, AutomorphismError> {
        if !p.is_at_infinity() {
            return Err(AutomorphismError::NotAtInfinity(p.clone()));
        }
        if p.dim() != self.k {
            return Err(AutomorphismError::Arity { k: self.k, expected: self.k + 1, found: p.dim() + 1 });
        }
        Ok(self.top_parts(Direction::Forward).iter().all(|q| q.evaluate(p.head()).is_zero()))
    }

    /// `λ₂(f)`: equal to `λ₁(f^{-1})` on `C^3` and to 1 on `C^2`.
    pub fn second_dynamical_degree(&self, n_max: u32) -> Result<DynamicalDegreeEstimate, AutomorphismError> {
        match self.k {
            2 => Ok(DynamicalDegreeEstimate {
                value: DegreeValue::Exact(crate::recurrence::QuadSurd::integer(1)),
                method: EstimateMethod::Recurrence { coeffs: vec![1] },
            }),
            3 => Ok(self.degree_sequence(n_max, Direction::Inverse)?.estimate()?),
            k => Err(AutomorphismError::Unsupported { k, what: "second dynamical degree" }),
        }
    }
}

/// The largest monomial dividing `p`, if it is not constant.
fn monomial_content(p: &ExactPoly) -> Option<crate::poly::Monomial> {
    let n = p.nvars();
    let mut exps: Option<Vec<u32>> = None;
    for (m, _) in p.terms() {
        exps = Some(match exps {
            None => m.exps().to_vec(),
            Some(e) => e.iter().zip(m.exps()).map(|(a, b)| *a.min(b)).collect(),
        });
    }
    let exps = exps.unwrap_or_else(|| vec![0; n]);
    if exps.iter().all(|&e| e == 0) {
        None
    } else {
        Some(crate::poly::Monomial::new(&exps))
    }
}

/// Dense univariate polynomial over `F_{p^2}`, coefficients low to high,
/// no trailing zeros.
#[derive(Clone, Debug)]
struct UPoly(Vec<Fp2>);

impl UPoly {
    fn new(mut c: Vec<Fp2>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    fn one() -> Self {
        UPoly(vec![Fp2::one()])
    }

    fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn mul(&self, other: &UPoly) -> UPoly {
        if self.0.is_empty() || other.0.is_empty() {
            return UPoly(Vec::new());
        }
        let mut out = vec![Fp2::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        UPoly::new(out)
    }

    fn add_scaled(&mut self, other: &UPoly, c: Fp2) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), Fp2::zero());
        }
        for (s, o) in self.0.iter_mut().zip(&other.0) {
            *s = *s + c * *o;
        }
    }

    /// `p(line_1(s), ..., line_k(s))`.
    fn substitute(p: &MultiPoly<Fp2>, line: &[UPoly]) -> UPoly {
        let powers: Vec<Vec<UPoly>> = line
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let need = p.degree_in(i).unwrap_or(0) as usize;
                let mut pw = vec![UPoly::one()];
                for _ in 0..need {
                    let next = pw.last().unwrap().mul(l);
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut acc = UPoly(Vec::new());
        for (m, c) in p.terms() {
            let mut term = UPoly::one();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[i][e as usize]);
                }
            }
            acc.add_scaled(&term, *c);
        }
        UPoly::new(acc.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    const XY: [&str; 2] = ["x", "y"];
    const XYZ: [&str; 3] = ["x", "y", "z"];

    fn henon() -> PolyAutomorphism {
        PolyAutomorphism::new(
            parse_map(&["y", "y^2 + x"], &XY).unwrap(),
            parse_map(&["y - x^2", "x"], &XY).unwrap(),
        )
        .unwrap()
    }

    fn class4(a: &str, b: &str, c: &str, cp: &str) -> PolyAutomorphism {
        let fwd = [
            format!("x^2 - x*z + ({c}) + y"),
            format!("({a})*z"),
            format!("({b})*x + ({cp})"),
        ];
        let u = format!("((z - ({cp}))/({b}))");
        let inv = [u.clone(), format!("x - {u}^2 + {u}*y/({a}) - ({c})"), format!("y/({a})")];
        let fwd: Vec<&str> = fwd.iter().map(String::as_str).collect();
        let inv: Vec<&str> = inv.iter().map(String::as_str).collect();
        PolyAutomorphism::new(parse_map(&fwd, &XYZ).unwrap(), parse_map(&inv, &XYZ).unwrap())
            .unwrap()
    }

    fn point(coords: &[i64]) -> ProjectivePoint {
        ProjectivePoint::new(coords.iter().map(|&c| GaussianRational::from(c)).collect()).unwrap()
    }

    #[test]
    fn henon_is_valid_with_degree_two() {
        assert_eq!(henon().first_degree(), 2);
        let id = PolyAutomorphism::new(identity_map(3), identity_map(3)).unwrap();
        assert_eq!(id.first_degree(), 1);
    }

    #[test]
    fn corrupted_inverse_is_rejected() {
        let err = PolyAutomorphism::new(
            parse_map(&["y", "y^2 + x"], &XY).unwrap(),
            parse_map(&["y - x^2", "y"], &XY).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, AutomorphismError::InverseMismatch { component: 1, .. }));
    }

    #[test]
    fn henon_reduced_lift() {
        let lift = henon().reduced_lift(1).unwrap();
        let xyt = ["x", "y", "t"];
        let expected = parse_map(&["y*t", "y^2 + x*t", "t^2"], &xyt).unwrap();
        let got: Vec<ExactPoly> = lift.components.iter().map(|h| h.poly().clone()).collect();
        assert_eq!(got, expected);
        assert_eq!((lift.degree, lift.dropped), (2, 0));
    }

    #[test]
    fn identity_lift() {
        let lift = PolyAutomorphism::identity(3).reduced_lift(4).unwrap();
        assert_eq!(lift.degree, 1);
        assert_eq!(lift.dropped, 0);
        assert_eq!(lift.components[3].poly(), &ExactPoly::var(4, 3));
    }

    /// Composes `n` lifts of `f` and strips the common power of `t`: the
    /// cancelled power must equal `dropped` and the remaining degree `δ₁`.
    fn composed_lift_oracle(f: &PolyAutomorphism, n: u32) -> (u32, u32) {
        let one = f.reduced_lift(1).unwrap().components;
        let mut acc = one.clone();
        for _ in 1..n {
            acc = one.iter().map(|c| c.compose_homog(&acc, DEFAULT_MAX_TERMS).unwrap()).collect();
        }
        let common = acc
            .iter()
            .filter(|h| !h.is_zero())
            .map(|h| h.t_adic_valuation().unwrap())
            .min()
            .unwrap();
        (acc[0].degree() - common, common)
    }

    #[test]
    fn dropped_matches_composed_lifts() {
        let g = class4("2", "1/2", "1", "3");
        let ginv = g.inverted();
        for n in 1..=4 {
            for f in [&g, &ginv] {
                let lift = f.reduced_lift(n).unwrap();
                let (deg, common) = composed_lift_oracle(f, n);
                assert_eq!((lift.degree, lift.dropped), (deg, u64::from(common)), "n = {n}");
            }
        }
        assert_eq!(g.reduced_lift(3).unwrap().degree, 8);
        assert_eq!(g.reduced_lift(3).unwrap().dropped, 0);
    }

    #[test]
    fn degree_sequences() {
        let g = class4("2", "1/2", "1", "3");
        let inv = g.degree_sequence(6, Direction::Inverse).unwrap();
        assert_eq!(inv.degrees, vec![2, 3, 5, 8, 13, 21]);
        assert!(inv.is_submultiplicative());
        let h = henon().degree_sequence(5, Direction::Forward).unwrap();
        assert_eq!(h.degrees, vec![2, 4, 8, 16, 32]);
        let id = PolyAutomorphism::identity(2).degree_sequence(5, Direction::Forward).unwrap();
        assert_eq!(id.degrees, vec![1; 5]);
    }

    #[test]
    fn generic_line_agrees_with_symbolic() {
        let g = class4("2", "1/2", "1", "3");
        for dir in [Direction::Forward, Direction::Inverse] {
            let sym = g.degree_sequence(5, dir).unwrap();
            let line = g.degree_sequence_with(5, dir, DegreeMethod::GenericLine { seed: 5 }).unwrap();
            assert_eq!(sym, line);
        }
    }

    #[test]
    fn overflow_reports_completed_prefix() {
        let h = henon().with_max_terms(40);
        match h.degree_sequence(12, Direction::Forward) {
            Err(AutomorphismError::IterateOverflow { completed, limit: 40 }) => {
                assert!(!completed.is_empty());
                assert_eq!(completed, (1..=completed.len()).map(|n| 1u64 << n).collect::<Vec<_>>());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iterate_cache_is_shared_and_consistent() {
        let g = class4("2", "1/2", "1", "3");
        let direct = g.iterate(4, Direction::Inverse).unwrap();
        let fresh = class4("2", "1/2", "1", "3");
        let built: Vec<_> = (1..=4).map(|n| fresh.iterate(n, Direction::Inverse).unwrap()).collect();
        assert_eq!(*direct, *built[3]);
        let again = g.iterate(4, Direction::Inverse).unwrap();
        assert!(Arc::ptr_eq(&direct, &again));
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| assert_eq!(*g.iterate(5, Direction::Inverse).unwrap(), *g.iterate(5, Direction::Inverse).unwrap()));
            }
        });
    }

    #[test]
    fn infinity_images() {
        let h = henon().infinity_image(1).unwrap();
        assert_eq!(h.point(), Some(&point(&[0, 1, 0])));
        let g = class4("2", "1/2", "1", "3").infinity_image(1).unwrap();
        assert_eq!(g.point(), Some(&point(&[1, 0, 0, 0])));
        if let InfinityImage::Point { note, .. } = g {
            assert!(note.is_some());
        }
    }

    #[test]
    fn non_constant_image_is_detected() {
        // top parts (y^2, z^2, 0) are not proportional
        let f = PolyAutomorphism::new(
            parse_map(&["x + y^2", "y + z^2", "z"], &XYZ).unwrap(),
            parse_map(&["x - (y - z^2)^2", "y - z^2", "z"], &XYZ).unwrap(),
        )
        .unwrap();
        assert_eq!(f.infinity_image(3).unwrap(), InfinityImage::NonConstant);
    }

    #[test]
    fn indeterminacy() {
        let h = henon();
        assert!(h.indeterminacy_membership(&point(&[1, 0, 0])).unwrap());
        assert!(!h.indeterminacy_membership(&point(&[0, 1, 0])).unwrap());
        assert!(h.indeterminacy_membership(&point(&[0, 1, 1])).is_err());
        let g = class4("2", "1/2", "1", "3");
        assert!(g.indeterminacy_membership(&point(&[0, 1, 0, 0])).unwrap());
        assert!(g.indeterminacy_membership(&point(&[1, 0, 1, 0])).unwrap());
        assert!(!g.indeterminacy_membership(&point(&[1, 0, 0, 0])).unwrap());
    }

    #[test]
    fn second_degree() {
        let g = class4("2", "1/2", "1", "3");
        let est = g.second_dynamical_degree(6).unwrap();
        assert_eq!(est.value.to_string(), "(1+√5)/2");
        assert_eq!(henon().second_dynamical_degree(4).unwrap().value.to_f64(), 1.0);
        let k4 = PolyAutomorphism::identity(4);
        assert!(matches!(k4.second_dynamical_degree(4), Err(AutomorphismError::Unsupported { k: 4, .. })));
    }
}
