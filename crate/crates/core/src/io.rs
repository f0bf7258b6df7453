//! JSON wire formats.
//!
//! A polynomial is encoded as
//! `{"vars": k, "domain": "exact"|"approx", "terms": [{"e": [...], "re": .., "im": ..}]}`
//! where exact parts are `[num, den]` pairs (integers, or decimal strings when
//! they do not fit in 64 bits) and approximate parts are plain floats.

use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::automorphism::{AutomorphismError, PolyAutomorphism};
use crate::poly::{MultiPoly, PolyError};
use crate::pullback::{Divisor, PullbackError};
use crate::scalar::{Coeff, Domain, GaussianRational};
use crate::ExactPoly;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("coefficient domain mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: Domain, found: Domain },
    #[error("declared {declared} variables but a term has {found} exponents")]
    VarCount { declared: usize, found: usize },
    #[error("bad coefficient: {0}")]
    BadCoefficient(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Automorphism(#[from] AutomorphismError),
    #[error(transparent)]
    Divisor(#[from] PullbackError),
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
}

/// An integer literal that may exceed 64 bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntLit {
    Small(i64),
    Big(String),
}

impl IntLit {
    fn from_bigint(n: &BigInt) -> Self {
        match n.to_i64() {
            Some(v) => IntLit::Small(v),
            None => IntLit::Big(n.to_string()),
        }
    }

    fn to_bigint(&self) -> Result<BigInt, IoError> {
        match self {
            IntLit::Small(v) => Ok(BigInt::from(*v)),
            IntLit::Big(s) => s.parse().map_err(|_| IoError::BadCoefficient(s.clone())),
        }
    }
}

/// One real or imaginary part of a coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffPart {
    Ratio([IntLit; 2]),
    Float(f64),
}

impl Default for CoeffPart {
    fn default() -> Self {
        CoeffPart::Ratio([IntLit::Small(0), IntLit::Small(1)])
    }
}

impl CoeffPart {
    fn from_ratio(r: &BigRational) -> Self {
        CoeffPart::Ratio([IntLit::from_bigint(r.numer()), IntLit::from_bigint(r.denom())])
    }

    fn to_ratio(&self) -> Result<BigRational, IoError> {
        match self {
            CoeffPart::Ratio([n, d]) => {
                let d = d.to_bigint()?;
                if d.is_zero() {
                    return Err(IoError::BadCoefficient("zero denominator".into()));
                }
                Ok(BigRational::new(n.to_bigint()?, d))
            }
            CoeffPart::Float(v) => Err(IoError::BadCoefficient(format!(
                "float {v} in an exact polynomial; use a [num, den] pair"
            ))),
        }
    }

    fn to_f64(&self) -> Result<f64, IoError> {
        match self {
            CoeffPart::Float(v) => Ok(*v),
            CoeffPart::Ratio(_) => Err(IoError::BadCoefficient(
                "[num, den] pair in an approximate polynomial".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub e: Vec<u32>,
    pub re: CoeffPart,
    #[serde(default)]
    pub im: CoeffPart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: usize,
    pub domain: Domain,
    pub terms: Vec<TermJson>,
}

/// Coefficient domains with a JSON encoding.
pub trait JsonCoeff: Coeff {
    fn to_parts(&self) -> (CoeffPart, CoeffPart);
    fn from_parts(re: &CoeffPart, im: &CoeffPart) -> Result<Self, IoError>;
}

impl JsonCoeff for GaussianRational {
    fn to_parts(&self) -> (CoeffPart, CoeffPart) {
        (CoeffPart::from_ratio(self.re()), CoeffPart::from_ratio(self.im()))
    }

    fn from_parts(re: &CoeffPart, im: &CoeffPart) -> Result<Self, IoError> {
        let im = match im {
            // a bare 0 for the imaginary part is tolerated
            CoeffPart::Float(v) if *v == 0.0 => BigRational::zero(),
            other => other.to_ratio()?,
        };
        Ok(GaussianRational::new(re.to_ratio()?, im))
    }
}

impl JsonCoeff for Complex64 {
    fn to_parts(&self) -> (CoeffPart, CoeffPart) {
        (CoeffPart::Float(self.re), CoeffPart::Float(self.im))
    }

    fn from_parts(re: &CoeffPart, im: &CoeffPart) -> Result<Self, IoError> {
        let im = match im {
            CoeffPart::Ratio([IntLit::Small(0), _]) => 0.0,
            other => other.to_f64()?,
        };
        Ok(Complex64::new(re.to_f64()?, im))
    }
}

impl PolyJson {
    pub fn encode<C: JsonCoeff>(p: &MultiPoly<C>) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let (re, im) = c.to_parts();
                TermJson { e: m.exps().to_vec(), re, im }
            })
            .collect();
        PolyJson { vars: p.nvars(), domain: C::DOMAIN, terms }
    }

    pub fn decode<C: JsonCoeff>(&self) -> Result<MultiPoly<C>, IoError> {
        if self.domain != C::DOMAIN {
            return Err(IoError::DomainMismatch { expected: C::DOMAIN, found: self.domain });
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.e.len() != self.vars {
                return Err(IoError::VarCount { declared: self.vars, found: t.e.len() });
            }
            terms.push((t.e.clone(), C::from_parts(&t.re, &t.im)?));
        }
        Ok(MultiPoly::from_terms(self.vars, terms)?)
    }
}

/// `num/den` with positive denominator, also for integers (`2/1`).
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn poly_to_json<C: JsonCoeff>(p: &MultiPoly<C>) -> String {
    serde_json::to_string(&PolyJson::encode(p)).expect("polynomial JSON is serializable")
}

pub fn poly_from_json<C: JsonCoeff>(s: &str) -> Result<MultiPoly<C>, IoError> {
    let j: PolyJson = serde_json::from_str(s)?;
    j.decode()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismJson {
    pub k: usize,
    pub forward: Vec<PolyJson>,
    pub inverse: Vec<PolyJson>,
    /// Free-form provenance note for bundled fixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AutomorphismJson {
    pub fn encode(f: &PolyAutomorphism) -> Self {
        AutomorphismJson {
            k: f.dim(),
            forward: f.forward().iter().map(PolyJson::encode).collect(),
            inverse: f.inverse().iter().map(PolyJson::encode).collect(),
            note: None,
        }
    }

    pub fn decode(&self) -> Result<PolyAutomorphism, IoError> {
        for part in [&self.forward, &self.inverse] {
            if part.len() != self.k {
                return Err(IoError::Arity { expected: self.k, found: part.len() });
            }
        }
        let fwd: Vec<ExactPoly> =
            self.forward.iter().map(|p| p.decode()).collect::<Result<_, _>>()?;
        let inv: Vec<ExactPoly> =
            self.inverse.iter().map(|p| p.decode()).collect::<Result<_, _>>()?;
        Ok(PolyAutomorphism::new(fwd, inv)?)
    }
}

pub fn automorphism_from_json(s: &str) -> Result<PolyAutomorphism, IoError> {
    let j: AutomorphismJson = serde_json::from_str(s)?;
    j.decode()
}

pub fn automorphism_to_json(f: &PolyAutomorphism) -> String {
    serde_json::to_string_pretty(&AutomorphismJson::encode(f)).expect("serializable")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorJson {
    pub h: PolyJson,
    pub degree: u32,
}

impl DivisorJson {
    pub fn encode(d: &Divisor) -> Self {
        DivisorJson { h: PolyJson::encode(d.homog().poly()), degree: d.degree() }
    }

    pub fn decode(&self) -> Result<Divisor, IoError> {
        let h: ExactPoly = self.h.decode()?;
        Ok(Divisor::new(h, self.degree)?)
    }
}

pub fn divisor_from_json(s: &str) -> Result<Divisor, IoError> {
    let j: DivisorJson = serde_json::from_str(s)?;
    j.decode()
}

pub fn divisor_to_json(d: &Divisor) -> String {
    serde_json::to_string_pretty(&DivisorJson::encode(d)).expect("serializable")
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn load_automorphism(path: &Path) -> Result<PolyAutomorphism, IoError> {
    automorphism_from_json(&read_to_string(path)?)
}

pub fn load_divisor(path: &Path) -> Result<Divisor, IoError> {
    divisor_from_json(&read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ApproxPoly;
    use proptest::prelude::*;

    #[test]
    fn decodes_documented_shape() {
        let s = r#"{"vars": 2, "domain": "exact",
                    "terms": [{"e": [0, 2], "re": [1, 1], "im": [0, 1]},
                              {"e": [1, 0], "re": [-3, 6], "im": [1, 2]}]}"#;
        let p: ExactPoly = poly_from_json(s).unwrap();
        assert_eq!(p.coeff(&[1, 0]), "-1/2+1/2i".parse().unwrap());
        assert_eq!(p.coeff(&[0, 2]), GaussianRational::from(1));
    }

    #[test]
    fn big_integers_survive() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let p = ExactPoly::constant(1, GaussianRational::real(BigRational::from_integer(big)));
        let back: ExactPoly = poly_from_json(&poly_to_json(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let s = r#"{"vars": 1, "domain": "approx", "terms": [{"e": [1], "re": 0.5, "im": 0.0}]}"#;
        let err = poly_from_json::<GaussianRational>(s).unwrap_err();
        assert!(matches!(
            err,
            IoError::DomainMismatch { expected: Domain::Exact, found: Domain::Approx }
        ));
        let p: ApproxPoly = poly_from_json(s).unwrap();
        assert_eq!(p.coeff(&[1]), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = poly_from_json::<GaussianRational>("{\"vars\": 1,\n \"domain\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn rejects_bad_arity_and_zero_denominator() {
        let s = r#"{"vars": 2, "domain": "exact", "terms": [{"e": [1], "re": [1, 1]}]}"#;
        assert!(matches!(poly_from_json::<GaussianRational>(s), Err(IoError::VarCount { .. })));
        let s = r#"{"vars": 1, "domain": "exact", "terms": [{"e": [1], "re": [1, 0]}]}"#;
        assert!(matches!(poly_from_json::<GaussianRational>(s), Err(IoError::BadCoefficient(_))));
    }

    fn arb_poly() -> impl Strategy<Value = ExactPoly> {
        prop::collection::vec(
            (prop::collection::vec(0u32..4, 3), -50i64..50, 1i64..20, -5i64..5),
            0..8,
        )
        .prop_map(|terms| {
            ExactPoly::from_terms(
                3,
                terms.into_iter().map(|(e, n, d, im)| {
                    let c = GaussianRational::new(
                        BigRational::new(n.into(), d.into()),
                        BigRational::from_integer(im.into()),
                    );
                    (e, c)
                }),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn exact_json_round_trip(p in arb_poly()) {
            let back: ExactPoly = poly_from_json(&poly_to_json(&p)).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
