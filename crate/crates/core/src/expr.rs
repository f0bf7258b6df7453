//! A small infix reader for exact polynomials, e.g. `x^2 - x*z + 1/2*y + 3i`.
//!
//! Grammar: sums and differences of products; factors are numbers (integers,
//! decimals, `p/q` written as a quotient of numbers), the imaginary unit `i`,
//! variable names, parenthesized expressions, and `^` with a nonnegative
//! integer exponent. Division is only allowed by a nonzero constant.

use crate::poly::MultiPoly;
use crate::scalar::{parse_rational, FieldCoeff, GaussianRational};
use crate::ExactPoly;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parses `src` as a polynomial in the variables `vars` (in order).
pub fn parse_poly(src: &str, vars: &[&str]) -> Result<ExactPoly, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, vars };
    let out = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses a tuple of component expressions.
pub fn parse_map(components: &[&str], vars: &[&str]) -> Result<Vec<ExactPoly>, ParseError> {
    components.iter().map(|c| parse_poly(c, vars)).collect()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn nvars(&self) -> usize {
        self.vars.len()
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<ExactPoly, ParseError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.product()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.product()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<ExactPoly, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.power()?;
                    if !d.is_constant() || d.is_zero() {
                        return Err(ParseError { pos: at, msg: "division by a non-constant".into() });
                    }
                    let inv = d.coeff(&vec![0; self.nvars()]).inverse().expect("nonzero");
                    acc = acc.scale(&inv);
                }
                // implicit multiplication: `2x`, `3(x+1)`, `x y`
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() || c == b'_' => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<ExactPoly, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.err("expected an exponent"))?;
            return base
                .pow_bounded(e, crate::poly::DEFAULT_MAX_TERMS)
                .map_err(|e| self.err(&e.to_string()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExactPoly, ParseError> {
        let n = self.nvars();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.power()?)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                // scientific suffix like 1e-3
                if self.pos < self.src.len() && self.src[self.pos] == b'e' {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.src.len() && matches!(self.src[self.pos], b'-' | b'+') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if digits == self.pos {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let r = parse_rational(text).map_err(|e| ParseError { pos: start, msg: e.0 })?;
                Ok(MultiPoly::constant(n, GaussianRational::real(r)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if let Some(idx) = self.vars.iter().position(|v| *v == name) {
                    Ok(MultiPoly::var(n, idx))
                } else if name == "i" {
                    Ok(MultiPoly::constant(n, GaussianRational::i()))
                } else {
                    Err(ParseError { pos: start, msg: format!("unknown variable '{name}'") })
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_cubic_expression() {
        let p = parse_poly("x^2 - x*z + 1 + y", &["x", "y", "z"]).unwrap();
        let x = ExactPoly::var(3, 0);
        let y = ExactPoly::var(3, 1);
        let z = ExactPoly::var(3, 2);
        let expected = &(&(&x * &x) - &(&x * &z)) + &(&ExactPoly::one(3) + &y);
        assert_eq!(p, expected);
    }

    #[test]
    fn rationals_and_gaussian_unit() {
        let p = parse_poly("(1/2)x + 3i - 2/4", &["x"]).unwrap();
        assert_eq!(p.coeff(&[1]), GaussianRational::from_ratio(1, 2));
        assert_eq!(
            p.coeff(&[0]),
            GaussianRational::new(GaussianRational::from_ratio(-1, 2).re().clone(), num_rational::BigRational::from_integer(3.into()))
        );
    }

    #[test]
    fn powers_of_sums() {
        let p = parse_poly("(x+y)^2 - x^2 - 2x y", &["x", "y"]).unwrap();
        assert_eq!(p, parse_poly("y^2", &["x", "y"]).unwrap());
    }

    #[test]
    fn errors_carry_position() {
        let e = parse_poly("x + w", &["x"]).unwrap_err();
        assert_eq!(e.pos, 4);
        assert!(parse_poly("x / y", &["x", "y"]).is_err());
        assert!(parse_poly("(x", &["x"]).is_err());
    }
}
