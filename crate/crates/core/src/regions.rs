//! Escape regions for the class-4 map `g = (x² − xz + c + y, az, bx + c')`.
//!
//! With `α = |b|/(4|a|)` and `R > 1`:
//!
//! ```text
//! V_R = { max{2α|y|, |z|} > max{2R, R^{1/3}|x|} }
//! W_R = { max{α|y|, |x|}  > max{R,  R^{1/3}|x − z|} }
//! ```
//!
//! For `|b| < 1` and `R` large, `g⁻¹(V_R) ⊂ V_{2R} ∪ W_{2R}` and
//! `g⁻¹(W_R) ⊂ V_{2R} ∪ W_{(1+ε)R}` whenever `|b| < (1 − 2ε)/(1 + ε)`, which
//! makes `I⁺` attracting for `g⁻¹`. This module samples both inclusions.

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::AutomorphismError;
use crate::classify::Class4Form;
use crate::ext::Real;
use crate::poly::MultiPoly;
use crate::scalar::GaussianRational;
use crate::ExactPoly;

/// Violating points kept verbatim in a report; further ones are only counted.
pub const MAX_RECORDED: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("|b| = {abs_b} is not below 1; the inclusions need |b| < 1")]
    PreconditionFailed { abs_b: f64 },
    #[error("R must exceed 1, got {r}")]
    RadiusTooSmall { r: f64 },
    #[error("epsilon {eps} violates 0 < eps < {eps_max}")]
    BadEpsilon { eps: f64, eps_max: f64 },
    #[error(transparent)]
    Automorphism(#[from] AutomorphismError),
}

/// Coefficients of `g` with the exact inverse and the margin `ε`.
#[derive(Debug, Clone)]
pub struct RegionParams<F: Real> {
    form: Class4Form,
    a: Complex<F>,
    b: Complex<F>,
    inverse: Vec<MultiPoly<Complex<F>>>,
    c_second: GaussianRational,
    eps: Option<F>,
}

impl<F: Real> RegionParams<F> {
    /// `eps = None` picks `0.9·ε_max` when `|b| < 1`.
    pub fn new(form: &Class4Form, eps: Option<F>) -> Result<Self, RegionError> {
        let g = form.build()?;
        let inverse = g.inverse().iter().map(|p| p.map_coeffs(|c| c.to_complex::<F>())).collect();
        // g⁻¹ = (z/b + c'', ...): read c'' off the symbolic inverse
        let c_second = g.inverse()[0].coeff(&[0, 0, 0]);
        let mut p = RegionParams {
            form: form.clone(),
            a: form.a.to_complex(),
            b: form.b.to_complex(),
            inverse,
            c_second,
            eps: None,
        };
        let eps_max = p.eps_max();
        p.eps = match (eps, eps_max) {
            (Some(e), Some(m)) if e > F::zero() && e < m => Some(e),
            (Some(e), m) => {
                return Err(RegionError::BadEpsilon {
                    eps: e.to_f64().unwrap_or(f64::NAN),
                    eps_max: m.and_then(|m| m.to_f64()).unwrap_or(0.0),
                })
            }
            (None, Some(m)) => Some(m * F::from(0.9).expect("float")),
            (None, None) => None,
        };
        Ok(p)
    }

    pub fn form(&self) -> &Class4Form {
        &self.form
    }

    /// `α = |b|/(4|a|)`.
    pub fn alpha(&self) -> F {
        self.b.norm() / (F::from(4).expect("float") * self.a.norm())
    }

    /// `(1 − |b|)/(2 + |b|)`, the `ε` at which `|b| = (1 − 2ε)/(1 + ε)`.
    pub fn eps_max(&self) -> Option<F> {
        let b = self.b.norm();
        (b < F::one()).then(|| (F::one() - b) / (F::from(2).expect("float") + b))
    }

    pub fn eps(&self) -> Option<F> {
        self.eps
    }

    /// The constant `c''` of `g⁻¹`.
    pub fn c_second(&self) -> &GaussianRational {
        &self.c_second
    }

    pub fn g_inverse(&self, p: &[Complex<F>; 3]) -> [Complex<F>; 3] {
        let v: Vec<Complex<F>> = self.inverse.iter().map(|q| q.evaluate(p)).collect();
        [v[0], v[1], v[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub in_v: bool,
    pub in_w: bool,
}

/// `p ∈ V_R`.
pub fn in_v<F: Real>(p: &[Complex<F>; 3], alpha: F, r: F) -> bool {
    let two = F::from(2).expect("float");
    let cube = r.cbrt();
    let lhs = (two * alpha * p[1].norm()).max(p[2].norm());
    lhs > (two * r).max(cube * p[0].norm())
}

/// `p ∈ W_R`.
pub fn in_w<F: Real>(p: &[Complex<F>; 3], alpha: F, r: F) -> bool {
    let cube = r.cbrt();
    let lhs = (alpha * p[1].norm()).max(p[0].norm());
    lhs > r.max(cube * (p[0] - p[2]).norm())
}

pub fn region_membership<F: Real>(p: &[Complex<F>; 3], params: &RegionParams<F>, r: F) -> Membership {
    let alpha = params.alpha();
    Membership { in_v: in_v(p, alpha, r), in_w: in_w(p, alpha, r) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    /// `g⁻¹(V_R) ⊂ V_{2R} ∪ W_{2R}`.
    FromV,
    /// `g⁻¹(W_R) ⊂ V_{2R} ∪ W_{(1+ε)R}`.
    FromW,
}

/// Which right-hand sides to test against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transcription {
    /// The inclusions as stated.
    Faithful,
    /// `2R` replaced by `factor·R` on the right; a sensitivity control.
    ///
    /// Taking `z` huge in `V_R` gives `|x₁| = |z|/|b|`, so for `|b| = 1/2`
    /// the usual `factor = 4` is exactly tight and finds nothing. Any
    /// `factor > 2/|b|` is a genuine corruption.
    Widened { factor: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation<F> {
    pub inclusion: Inclusion,
    pub sample: u64,
    pub point: [[F; 2]; 3],
    pub image: [[F; 2]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "F: Serialize")]
pub struct InclusionReport<F> {
    pub r: F,
    pub eps: F,
    pub alpha: F,
    pub samples_per_inclusion: u64,
    pub seed: u64,
    pub transcription: Transcription,
    pub checked: u64,
    pub violation_count: u64,
    /// At most [`MAX_RECORDED`] violations, in sample order.
    pub violations: Vec<Violation<F>>,
}

fn flat<F: Real>(p: &[Complex<F>; 3]) -> [[F; 2]; 3] {
    [[p[0].re, p[0].im], [p[1].re, p[1].im], [p[2].re, p[2].im]]
}

fn polar<F: Real>(radius: F, rng: &mut impl Rng) -> Complex<F> {
    let theta = F::from(rng.gen::<f64>() * std::f64::consts::TAU).expect("float");
    Complex::from_polar(radius, theta)
}

/// A fraction in `[0, 1)`: just below 1 for boundary draws, otherwise
/// uniform or log-uniform down to `1e-12` with equal odds. The log-uniform
/// half reaches coordinates that are tiny next to the dominating one.
fn fraction<F: Real>(rng: &mut impl Rng, boundary: bool) -> F {
    let u: f64 = rng.gen();
    let v = if boundary {
        1.0 - 1e-3 * u
    } else if rng.gen_bool(0.5) {
        u
    } else {
        (u * 12.0 * std::f64::consts::LN_10).exp() * 1e-12
    };
    F::from(v).expect("float")
}

/// One point of `V_R` (or `W_R`). The dominating term is chosen uniformly;
/// its size is log-uniform in `[bound, 10³·bound]`; the other coordinates
/// fill the slack, pushed against the constraint in 20% of draws.
fn sample_point<F: Real>(inclusion: Inclusion, alpha: F, r: F, rng: &mut impl Rng) -> [Complex<F>; 3] {
    let boundary = rng.gen_bool(0.2);
    let one = F::one();
    let two = one + one;
    let bound = match inclusion {
        Inclusion::FromV => two * r,
        Inclusion::FromW => r,
    };
    let log_span = F::from(1e3f64.ln()).expect("float");
    let u = F::from(rng.gen::<f64>()).expect("float");
    let t = if boundary { u * F::from(1e-3).expect("float") } else { u };
    let m = bound * (t * log_span).exp() * (one + F::epsilon() * F::from(16).expect("float"));
    let slack = m / r.cbrt();
    let via_y = rng.gen_bool(0.5);
    match inclusion {
        Inclusion::FromV => {
            // max{2α|y|, |z|} = m and R^{1/3}|x| < m
            let x = polar(slack * fraction(rng, boundary), rng);
            let other = m * fraction(rng, boundary);
            let (y, z) = if via_y {
                (polar(m / (two * alpha), rng), polar(other, rng))
            } else {
                (polar(other / (two * alpha), rng), polar(m, rng))
            };
            [x, y, z]
        }
        Inclusion::FromW => {
            // max{α|y|, |x|} = m and R^{1/3}|x − z| < m
            let other = m * fraction(rng, boundary);
            let (x, y) = if via_y {
                (polar(other, rng), polar(m / alpha, rng))
            } else {
                (polar(m, rng), polar(other / alpha, rng))
            };
            let d = polar(slack * fraction(rng, boundary), rng);
            [x, y, x - d]
        }
    }
}

fn in_domain<F: Real>(inclusion: Inclusion, p: &[Complex<F>; 3], alpha: F, r: F) -> bool {
    match inclusion {
        Inclusion::FromV => in_v(p, alpha, r),
        Inclusion::FromW => in_w(p, alpha, r),
    }
}

fn in_target<F: Real>(inclusion: Inclusion, q: &[Complex<F>; 3], alpha: F, r: F, eps: F, t: Transcription) -> bool {
    let k = F::from(match t {
        Transcription::Faithful => 2,
        Transcription::Widened { factor } => factor,
    })
    .expect("float");
    match inclusion {
        Inclusion::FromV => in_v(q, alpha, k * r) || in_w(q, alpha, k * r),
        Inclusion::FromW => in_v(q, alpha, k * r) || in_w(q, alpha, (F::one() + eps) * r),
    }
}

/// Per-sample generator: stream `2i + inclusion` of the seeded ChaCha8.
fn sample_rng(seed: u64, inclusion: Inclusion, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * i + u64::from(inclusion == Inclusion::FromW));
    rng
}

/// Samples `samples` points of `V_R` and of `W_R` and checks both inclusions.
pub fn verify_inclusions<F: Real>(
    params: &RegionParams<F>,
    r: F,
    samples: u64,
    seed: u64,
    transcription: Transcription,
) -> Result<InclusionReport<F>, RegionError> {
    let eps = params.eps.ok_or_else(|| RegionError::PreconditionFailed {
        abs_b: params.b.norm().to_f64().unwrap_or(f64::NAN),
    })?;
    if r <= F::one() {
        return Err(RegionError::RadiusTooSmall { r: r.to_f64().unwrap_or(f64::NAN) });
    }
    let alpha = params.alpha();
    let mut found: Vec<Violation<F>> = [Inclusion::FromV, Inclusion::FromW]
        .into_par_iter()
        .flat_map(|inclusion| {
            (0..samples).into_par_iter().filter_map(move |i| {
                let mut rng = sample_rng(seed, inclusion, i);
                let mut p = sample_point(inclusion, alpha, r, &mut rng);
                while !in_domain(inclusion, &p, alpha, r) {
                    p = sample_point(inclusion, alpha, r, &mut rng);
                }
                let q = params.g_inverse(&p);
                (!in_target(inclusion, &q, alpha, r, eps, transcription)).then(|| Violation {
                    inclusion,
                    sample: i,
                    point: flat(&p),
                    image: flat(&q),
                })
            })
        })
        .collect();
    let violation_count = found.len() as u64;
    found.truncate(MAX_RECORDED);
    Ok(InclusionReport {
        r,
        eps,
        alpha,
        samples_per_inclusion: samples,
        seed,
        transcription,
        checked: 2 * samples,
        violation_count,
        violations: found,
    })
}

/// Violation counts for decreasing `R`; descriptive, locates where the
/// "R sufficiently large" hypothesis starts to matter.
pub fn threshold_sweep<F: Real>(
    params: &RegionParams<F>,
    radii: &[F],
    samples: u64,
    seed: u64,
) -> Result<Vec<(F, u64)>, RegionError> {
    radii
        .iter()
        .map(|&r| Ok((r, verify_inclusions(params, r, samples, seed, Transcription::Faithful)?.violation_count)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantLine {
    /// `c = c' = 0` and `a = b²`.
    pub applicable: bool,
    /// `g(ζ, bζ, ζ) = (bζ, b²ζ, bζ)` as polynomials in `ζ`.
    pub verified: bool,
    /// `|b| ≥ 1`: the line `τ` then witnesses that `I⁺` is not attracting
    /// for `g⁻¹`, since `g⁻¹(τ(ζ)) = τ(ζ/b)` does not grow.
    pub witnesses_non_attracting: bool,
}

/// Checks the `g`-invariant line `τ(ζ) = (ζ, bζ, ζ)`.
pub fn invariant_line_check(form: &Class4Form) -> Result<InvariantLine, RegionError> {
    let b = &form.b;
    let applicable = form.c.is_zero() && form.c_prime.is_zero() && form.a == b * b;
    if !applicable {
        return Ok(InvariantLine { applicable, verified: false, witnesses_non_attracting: false });
    }
    let g = form.build()?;
    let zeta = ExactPoly::var(1, 0);
    let tau = |s: &GaussianRational| vec![zeta.scale(&GaussianRational::one()), zeta.scale(s), zeta.clone()];
    let image: Vec<ExactPoly> = g.forward().iter().map(|p| p.compose(&tau(b))).collect::<Result<_, _>>().map_err(AutomorphismError::from)?;
    let b_zeta = zeta.scale(b);
    let expected = vec![b_zeta.clone(), b_zeta.scale(b), b_zeta];
    let witnesses_non_attracting = b.norm_sqr() >= BigRational::one();
    Ok(InvariantLine { applicable, verified: image == expected, witnesses_non_attracting })
}

#[cfg(test)]
mod tests;
