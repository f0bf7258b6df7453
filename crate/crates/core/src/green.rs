//! Escape-rate Green function `G⁺(z) = lim λ^{-n} log⁺‖f^n(z)‖` and the
//! orbit experiments built on it.
//!
//! Orbits are computed in [`ExtComplex`] so they can be followed well past the
//! escape radius; the estimate at the last step and its Cauchy increment are
//! reported together.

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::automorphism::{Direction, PolyAutomorphism};
use crate::ext::{ExtComplex, Real};
use crate::poly::MultiPoly;
use crate::pullback::Divisor;

type Ext<F> = ExtComplex<F>;

/// Largest binary exponent an orbit may reach before a further step could
/// leave the `i64` exponent range or the precision of `ln`.
const EXPONENT_LIMIT: i64 = 1 << 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GreenError {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("escape rates need degree at least 2, got {lambda}")]
    DegreeTooLow { lambda: u32 },
    #[error("point has {got} coordinates, map acts on C^{k}")]
    Arity { got: usize, k: usize },
    #[error("divisor lives in P^{divisor} but the map acts on C^{map}")]
    DivisorDimension { divisor: usize, map: usize },
}

/// A polynomial automorphism with coefficients rounded into `F`.
#[derive(Clone, Debug)]
pub struct FloatMap<F: Real> {
    forward: Vec<MultiPoly<Ext<F>>>,
    inverse: Vec<MultiPoly<Ext<F>>>,
    lambda: u32,
}

impl<F: Real> FloatMap<F> {
    pub fn new(f: &PolyAutomorphism) -> Result<Self, GreenError> {
        let lambda = f.first_degree();
        if lambda < 2 {
            return Err(GreenError::DegreeTooLow { lambda });
        }
        let round = |ps: &[crate::ExactPoly]| -> Vec<MultiPoly<Ext<F>>> {
            ps.iter().map(|p| p.map_coeffs(|c| Ext::new(c.to_complex::<F>()))).collect()
        };
        Ok(FloatMap { forward: round(f.forward()), inverse: round(f.inverse()), lambda })
    }

    pub fn dim(&self) -> usize {
        self.forward.len()
    }

    /// `λ = deg f`, the base of the escape rate.
    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    fn step(&self, z: &[Ext<F>], direction: Direction) -> Vec<Ext<F>> {
        let map = match direction {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        map.iter().map(|p| p.evaluate(z)).collect()
    }

    /// `f(z)` in ordinary floating point (possibly infinite).
    pub fn apply(&self, z: &[Complex<F>]) -> Vec<Complex<F>> {
        let w: Vec<Ext<F>> = z.iter().map(|&c| Ext::new(c)).collect();
        self.step(&w, Direction::Forward).iter().map(Ext::to_complex).collect()
    }
}

/// `ln` of the sup norm.
fn ln_norm<F: Real>(z: &[Ext<F>]) -> F {
    z.iter().map(Ext::ln_abs).fold(F::neg_infinity(), F::max)
}

fn max_exponent<F: Real>(z: &[Ext<F>]) -> i64 {
    z.iter().map(|c| c.exponent().abs()).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenParams<F> {
    pub escape_radius: F,
    pub max_iter: u32,
    /// Further steps taken after escape to refine the estimate.
    pub refine_steps: u32,
}

impl<F: Real> Default for GreenParams<F> {
    fn default() -> Self {
        GreenParams { escape_radius: F::from(1e8).expect("float"), max_iter: 200, refine_steps: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "F: Serialize")]
pub struct GreenEvaluation<F> {
    #[serde(serialize_with = "ser_point")]
    pub point: Vec<Complex<F>>,
    /// `G⁺(z)`; zero when the orbit did not escape within the budget.
    pub g: F,
    /// `n*`, the step the estimate was read at.
    pub iterations: u32,
    /// `|G_{n*} − G_{n*−1}|`.
    pub cauchy_increment: F,
    pub escaped: bool,
    /// `G_n` for `n` from the escape step to `n*`.
    #[serde(skip)]
    pub trail: Vec<F>,
}

fn ser_point<F: Serialize, S: Serializer>(p: &[Complex<F>], s: S) -> Result<S::Ok, S::Error> {
    let flat: Vec<[&F; 2]> = p.iter().map(|c| [&c.re, &c.im]).collect();
    flat.serialize(s)
}

fn check_point<F: Real>(f: &FloatMap<F>, z: &[Complex<F>]) -> Result<Vec<Ext<F>>, GreenError> {
    if z.len() != f.dim() {
        return Err(GreenError::Arity { got: z.len(), k: f.dim() });
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(GreenError::NonFinite { what: "point" });
    }
    Ok(z.iter().map(|&c| Ext::new(c)).collect())
}

/// Estimates `G⁺(z)`.
pub fn green_plus<F: Real>(
    f: &FloatMap<F>,
    z: &[Complex<F>],
    params: &GreenParams<F>,
) -> Result<GreenEvaluation<F>, GreenError> {
    let mut w = check_point(f, z)?;
    let log_r = params.escape_radius.ln();
    let lambda = F::from(f.lambda).expect("float");
    let mut n = 0u32;
    while ln_norm(&w) <= log_r {
        if n == params.max_iter {
            return Ok(GreenEvaluation {
                point: z.to_vec(),
                g: F::zero(),
                iterations: n,
                cauchy_increment: F::zero(),
                escaped: false,
                trail: Vec::new(),
            });
        }
        w = f.step(&w, Direction::Forward);
        n += 1;
    }
    let rate = |w: &[Ext<F>], n: u32| ln_norm(w) / lambda.powi(n as i32);
    let mut trail = vec![rate(&w, n)];
    for _ in 0..params.refine_steps {
        if max_exponent(&w).saturating_mul(i64::from(f.lambda)) > EXPONENT_LIMIT {
            break;
        }
        w = f.step(&w, Direction::Forward);
        n += 1;
        let g = rate(&w, n);
        if !g.is_finite() {
            return Err(GreenError::NonFinite { what: "escape rate" });
        }
        let done = (g - *trail.last().expect("nonempty")).abs() <= F::epsilon() * g.abs();
        trail.push(g);
        if done && trail.len() > 2 {
            break;
        }
    }
    let g = *trail.last().expect("nonempty");
    let cauchy_increment = if trail.len() > 1 { (g - trail[trail.len() - 2]).abs() } else { F::zero() };
    Ok(GreenEvaluation { point: z.to_vec(), g, iterations: n, cauchy_increment, escaped: true, trail })
}

/// `|G⁺(f(z)) − λ·G⁺(z)|`.
pub fn green_functional_residual<F: Real>(
    f: &FloatMap<F>,
    z: &[Complex<F>],
    params: &GreenParams<F>,
) -> Result<F, GreenError> {
    let here = green_plus(f, z, params)?;
    let image = f.apply(z);
    let there = green_plus(f, &image, params)?;
    Ok((there.g - F::from(f.lambda).expect("float") * here.g).abs())
}

/// Tri-state boundedness verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    /// The orbit left the escape radius after `after` steps.
    Escapes { after: u32 },
    Unknown,
}

impl Boundedness {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Boundedness::Bounded => Some(true),
            Boundedness::Escapes { .. } => Some(false),
            Boundedness::Unknown => None,
        }
    }
}

impl Serialize for Boundedness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_bool() {
            Some(b) => s.serialize_bool(b),
            None => s.serialize_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "F: Serialize")]
pub struct OrbitVerdict<F> {
    #[serde(serialize_with = "ser_point")]
    pub point: Vec<Complex<F>>,
    pub forward_bounded: Boundedness,
    pub backward_bounded: Boundedness,
    pub budget: u32,
}

/// Follows one orbit for `budget` steps. Without escape the orbit counts as
/// bounded only if its norm set no new record in the second half of the
/// budget; a late record leaves the question open.
fn boundedness<F: Real>(f: &FloatMap<F>, z: &[Ext<F>], direction: Direction, budget: u32, log_r: F) -> Boundedness {
    let mut w = z.to_vec();
    let mut record = ln_norm(&w);
    let mut record_at = 0u32;
    let slack = F::from(1e-9).expect("float");
    for n in 1..=budget {
        w = f.step(&w, direction);
        let size = ln_norm(&w);
        if size > log_r || size.is_nan() {
            return Boundedness::Escapes { after: n };
        }
        if size > record + slack {
            record = size;
            record_at = n;
        }
    }
    if 2 * record_at > budget {
        Boundedness::Unknown
    } else {
        Boundedness::Bounded
    }
}

/// Forward and backward verdicts for every point under a shared budget.
pub fn orbit_verdicts<F: Real>(
    f: &FloatMap<F>,
    points: &[Vec<Complex<F>>],
    budget: u32,
    escape_radius: F,
) -> Result<Vec<OrbitVerdict<F>>, GreenError> {
    let log_r = escape_radius.ln();
    points
        .par_iter()
        .map(|p| {
            let w = check_point(f, p)?;
            Ok(OrbitVerdict {
                point: p.clone(),
                forward_bounded: boundedness(f, &w, Direction::Forward, budget, log_r),
                backward_bounded: boundedness(f, &w, Direction::Inverse, budget, log_r),
                budget,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    /// The orbit did not escape, so `G⁺` is not resolved there.
    NotEscaping,
    /// `h_S(f^n(z), 1) = 0` exactly.
    HitsDivisor { n: u32 },
    /// The orbit outgrew the exponent range before `n_max`.
    ExponentRange { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow<F> {
    pub point: usize,
    pub n: u32,
    /// `w̃_n(z) = λ^{-n} log|h_S(f^n(z), 1)|`.
    pub w: F,
    /// `deg S · (1 − c_S) · G⁺(z)`.
    pub target: F,
    pub deviation: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable<F> {
    pub c_s: F,
    pub degree: u32,
    pub green: Vec<GreenEvaluation<F>>,
    pub rows: Vec<ConvergenceRow<F>>,
    pub excluded: Vec<(usize, Exclusion)>,
}

impl<F: Real> ConvergenceTable<F> {
    /// Deviations at step `n`, one per retained point.
    pub fn deviations_at(&self, n: u32) -> Vec<F> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.deviation).collect()
    }
}

/// Compares `λ^{-n} log|h_S(f^n(z), 1)|` with `deg S · (1 − c_S)·G⁺(z)`
/// on every grid point for `n = 1..=n_max`.
///
/// For a divisor of degree one the target is `(1 − c_S)·G⁺`; the factor
/// `deg S` accounts for `c_S` being normalized by the total degree.
pub fn potential_convergence_experiment<F: Real>(
    f: &FloatMap<F>,
    s: &Divisor,
    c_s: &BigRational,
    grid: &[Vec<Complex<F>>],
    n_max: u32,
    params: &GreenParams<F>,
) -> Result<ConvergenceTable<F>, GreenError> {
    if s.dim() != f.dim() {
        return Err(GreenError::DivisorDimension { divisor: s.dim(), map: f.dim() });
    }
    let c = F::from(c_s.to_f64().unwrap_or(f64::NAN)).expect("float");
    if !c.is_finite() {
        return Err(GreenError::NonFinite { what: "c_S" });
    }
    let h: MultiPoly<Ext<F>> = s.homog().dehomogenize().map_coeffs(|q| Ext::new(q.to_complex::<F>()));
    let lambda = F::from(f.lambda).expect("float");
    let degree = s.degree();
    let scale = F::from(degree).expect("float") * (F::one() - c);

    type PointResult<F> = (GreenEvaluation<F>, Vec<ConvergenceRow<F>>, Option<Exclusion>);
    let per_point: Vec<PointResult<F>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let green = green_plus(f, z, params)?;
            if !green.escaped {
                return Ok((green, Vec::new(), Some(Exclusion::NotEscaping)));
            }
            let target = scale * green.g;
            let mut w = check_point(f, z)?;
            let mut rows = Vec::with_capacity(n_max as usize);
            for n in 1..=n_max {
                if max_exponent(&w).saturating_mul(i64::from(f.lambda)) > EXPONENT_LIMIT {
                    return Ok((green, rows, Some(Exclusion::ExponentRange { n })));
                }
                w = f.step(&w, Direction::Forward);
                let v = h.evaluate(&w);
                if v.is_zero() {
                    return Ok((green, rows, Some(Exclusion::HitsDivisor { n })));
                }
                let wn = v.ln_abs() / lambda.powi(n as i32);
                rows.push(ConvergenceRow { point: i, n, w: wn, target, deviation: (wn - target).abs() });
            }
            Ok((green, rows, None))
        })
        .collect::<Result<_, GreenError>>()?;

    let mut table = ConvergenceTable { c_s: c, degree, green: Vec::new(), rows: Vec::new(), excluded: Vec::new() };
    for (i, (green, rows, excl)) in per_point.into_iter().enumerate() {
        table.green.push(green);
        match excl {
            Some(e) => table.excluded.push((i, e)),
            None => table.rows.extend(rows),
        }
    }
    Ok(table)
}

/// The largest value left after dropping the largest `fraction` of them.
pub fn trimmed_max<F: Real>(values: &[F], fraction: f64) -> Option<F> {
    let mut v: Vec<F> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Greater));
    let drop = (v.len() as f64 * fraction).floor() as usize;
    v.truncate(v.len().saturating_sub(drop));
    v.last().copied()
}

#[cfg(test)]
mod tests;
