//! Symbolic and numerical tools for polynomial automorphisms of `C^k`.

pub mod automorphism;
pub mod classify;
pub mod expr;
pub mod ext;
pub mod green;
pub mod io;
pub mod poly;
pub mod pullback;
pub mod recurrence;
pub mod regions;
pub mod scalar;

pub use num_complex::Complex64;
pub use poly::{Degree, HomogPoly, Monomial, MultiPoly, PolyError};
pub use scalar::{Coeff, Domain, ExactCoeff, FieldCoeff, Fp2, GaussianRational};

/// Exact sparse polynomial over `Q(i)`.
pub type ExactPoly = MultiPoly<GaussianRational>;
/// Floating-point sparse polynomial over `C`.
pub type ApproxPoly = MultiPoly<Complex64>;
/// Exact homogeneous polynomial (last variable is `t`).
pub type ExactHomog = HomogPoly<GaussianRational>;
