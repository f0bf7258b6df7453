//! Random exact members of each case of the classification tree.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_h3, AffineChange, build_h4, build_h5, ClassifyError, Family, Outcome, Q};
use crate::automorphism::PolyAutomorphism;
use crate::scalar::Coeff;
use crate::ExactPoly;

/// A leaf (or subtree) of the case tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubCase {
    H3A,
    H3B,
    H3C,
    H3D,
    H3E,
    H3F,
    H3G,
    H4A,
    H4B,
    H4C,
    H4D,
    H5A,
    H5B,
    H5C,
    H5D,
    H5E,
}

impl SubCase {
    pub const ALL: [SubCase; 16] = [
        SubCase::H3A,
        SubCase::H3B,
        SubCase::H3C,
        SubCase::H3D,
        SubCase::H3E,
        SubCase::H3F,
        SubCase::H3G,
        SubCase::H4A,
        SubCase::H4B,
        SubCase::H4C,
        SubCase::H4D,
        SubCase::H5A,
        SubCase::H5B,
        SubCase::H5C,
        SubCase::H5D,
        SubCase::H5E,
    ];

    pub fn family(self) -> Family {
        match self {
            SubCase::H3A | SubCase::H3B | SubCase::H3C | SubCase::H3D | SubCase::H3E | SubCase::H3F | SubCase::H3G => {
                Family::H3
            }
            SubCase::H4A | SubCase::H4B | SubCase::H4C | SubCase::H4D => Family::H4,
            _ => Family::H5,
        }
    }

    fn letter(self) -> char {
        let s = format!("{self:?}");
        s.chars().last().expect("nonempty")
    }

    /// The prefix every report case label for this sub-case starts with.
    pub fn case_prefix(self) -> String {
        format!("{} Case {}", self.family(), self.letter())
    }

    /// Outcome fixed by the sub-case alone, when it does not depend on
    /// further branching.
    pub fn fixed_outcome(self) -> Option<Outcome> {
        Some(match self {
            SubCase::H3A | SubCase::H3F => Outcome::EqualDegrees,
            SubCase::H3B | SubCase::H3D => Outcome::Class4,
            SubCase::H3C | SubCase::H3E => Outcome::Class2SquareRegular,
            SubCase::H3G => Outcome::BoundedDegrees,
            SubCase::H4A | SubCase::H5A => Outcome::Class1Regular,
            SubCase::H4B => Outcome::Class3,
            SubCase::H5B => Outcome::Class5,
            SubCase::H4C | SubCase::H4D | SubCase::H5C | SubCase::H5D | SubCase::H5E => return None,
        })
    }

    /// Outcome of draw `index`, where the draw's branch fixes it.
    pub fn expected_outcome(self, index: usize) -> Option<Outcome> {
        match self {
            SubCase::H5C => Some(match index % 4 {
                0 => Outcome::EqualDegrees,
                1 | 2 => Outcome::Class2SquareRegular,
                _ => Outcome::BoundedDegrees,
            }),
            SubCase::H5D if index % 2 == 0 => Some(Outcome::EqualDegrees),
            SubCase::H5D => Some(Outcome::BoundedDegrees),
            _ => self.fixed_outcome(),
        }
    }

    /// A random map of this sub-case. Draw `index` selects among inner
    /// branches round-robin where the sub-case has them.
    pub fn draw(self, rng: &mut impl Rng, index: usize) -> Result<PolyAutomorphism, ClassifyError> {
        match self.family() {
            Family::H3 => self.draw_h3(rng),
            Family::H4 => self.draw_h4(rng),
            _ => self.draw_h5(rng, index),
        }
    }

    fn draw_h3(self, rng: &mut impl Rng) -> Result<PolyAutomorphism, ClassifyError> {
        // α'' = P_zz + a'·q₂ after Q is removed
        let (alpha_set, alpha1_set, alpha2_set) = match self {
            SubCase::H3A => (true, rng.gen_bool(0.5), true),
            SubCase::H3B => (true, true, false),
            SubCase::H3C => (true, false, false),
            SubCase::H3D => (false, true, true),
            SubCase::H3E => (false, false, true),
            SubCase::H3F => (false, true, false),
            _ => (false, false, false),
        };
        let a1 = small(rng);
        // with α = α'' = 0 the only quadratic term can come from Q
        let q2 = if self == SubCase::H3G { small(rng) } else { maybe(rng) };
        let target = if alpha2_set { small(rng) } else { Q::zero() };
        let pzz = target - a1.mul_ref(&q2);
        let (x, z) = (v(0), v(2));
        let p = sum(&[
            (&x * &x).scale(&pick(rng, alpha_set)),
            (&x * &z).scale(&pick(rng, alpha1_set)),
            (&z * &z).scale(&pzz),
            x.scale(&maybe(rng)),
            z.scale(&maybe(rng)),
            c(&maybe(rng)),
        ]);
        let q = sum(&[(&x * &x).scale(&q2), x.scale(&maybe(rng)), c(&maybe(rng))]);
        build_h3(&p, &q, &a1)
    }

    fn draw_h4(self, rng: &mut impl Rng) -> Result<PolyAutomorphism, ClassifyError> {
        let (x, y) = (v(0), v(1));
        let (c1, c2, c4) = match self {
            SubCase::H4A => (small(rng), maybe(rng), small(rng)),
            SubCase::H4B => (Q::zero(), small(rng), small(rng)),
            SubCase::H4C => (Q::zero(), Q::zero(), small(rng)),
            _ => (maybe(rng), small(rng), Q::zero()),
        };
        let p = sum(&[
            (&x * &x).scale(&c1),
            (&x * &y).scale(&c2),
            (&y * &y).scale(&maybe(rng)),
            x.scale(&maybe(rng)),
            y.scale(&maybe(rng)),
            c(&maybe(rng)),
        ]);
        let q = sum(&[(&y * &y).scale(&c4), y.scale(&maybe(rng)), c(&maybe(rng))]);
        build_h4(&p, &q, &small(rng))
    }

    fn draw_h5(self, rng: &mut impl Rng, index: usize) -> Result<PolyAutomorphism, ClassifyError> {
        let (x, y) = (v(0), v(1));
        let a = small(rng);
        let b = small(rng);
        let mut c1 = maybe(rng);
        let mut c2 = maybe(rng);
        let mut c3 = maybe(rng);
        let mut c4 = small(rng);
        let mut d2 = maybe(rng);
        let mut e1 = maybe(rng);
        match self {
            SubCase::H5A => c3 = small(rng),
            SubCase::H5B => {
                // c₄ = p²/c₂ keeps the conjugation inside Q(i)
                c3 = Q::zero();
                c2 = small(rng);
                let p = small(rng);
                c4 = p.mul_ref(&p).mul_ref(&super::div(&Q::from(1), &c2));
            }
            SubCase::H5C => {
                c3 = Q::zero();
                c2 = Q::zero();
                match index % 4 {
                    0 => {
                        c1 = small(rng);
                        d2 = small(rng);
                        while (super::div(&d2.mul_ref(&c4), &b) - c1.clone()).is_zero() {
                            d2 = small(rng);
                        }
                    }
                    1 => {
                        c1 = small(rng);
                        d2 = super::div(&c1.mul_ref(&b), &c4);
                    }
                    2 => {
                        c1 = Q::zero();
                        d2 = small(rng);
                    }
                    _ => {
                        c1 = Q::zero();
                        d2 = Q::zero();
                    }
                }
            }
            SubCase::H5D => {
                c4 = Q::zero();
                e1 = Q::zero();
                if index % 2 == 0 {
                    c1 = small(rng);
                } else {
                    c1 = Q::zero();
                    c2 = small(rng);
                }
            }
            _ => {
                c4 = Q::zero();
                e1 = small(rng);
                if c1.is_zero() && c2.is_zero() && c3.is_zero() {
                    c3 = small(rng);
                }
            }
        }
        let p = sum(&[
            (&x * &x).scale(&c1),
            (&x * &y).scale(&c2),
            (&y * &y).scale(&c3),
            x.scale(&maybe(rng)),
            y.scale(&d2),
            c(&maybe(rng)),
        ]);
        let q = sum(&[(&x * &x).scale(&c4), x.scale(&e1), c(&maybe(rng))]);
        build_h5(&p, &q, &a, &b)
    }
}

impl fmt::Display for SubCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family(), self.letter())
    }
}

impl FromStr for SubCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SubCase::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown sub-case '{s}' (expected e.g. H3-B)"))
    }
}

/// `count` maps of sub-case `sub`, each from its own seeded stream.
pub fn sweep(sub: SubCase, count: usize, seed: u64) -> Result<Vec<PolyAutomorphism>, ClassifyError> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((sub as u64) << 32) ^ i as u64);
            sub.draw(&mut rng, i)
        })
        .collect()
}

/// A random invertible affine change of `C^k`: `M = L·U` with unit lower
/// triangular `L`, upper triangular `U` with nonzero diagonal, and small
/// rational entries and translation.
pub fn affine_change(k: usize, rng: &mut impl Rng) -> Result<AffineChange, ClassifyError> {
    fn entry(rng: &mut impl Rng) -> Q {
        Q::from(rng.gen_range(-2i64..=2))
    }
    let lower: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Q::one() } else if j < i { entry(rng) } else { Q::zero() }).collect())
        .collect();
    let upper: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { small(rng) } else if j > i { entry(rng) } else { Q::zero() }).collect())
        .collect();
    let m: Vec<Vec<Q>> = (0..k)
        .map(|i| (0..k).map(|j| (0..k).map(|l| lower[i][l].mul_ref(&upper[l][j])).sum()).collect())
        .collect();
    let v: Vec<Q> = (0..k).map(|_| maybe(rng)).collect();
    AffineChange::from_matrix("random affine change", &m, &v)
}

/// A nonzero rational `n/d` with `n ∈ [-5, 5] \ {0}`, `d ∈ [1, 4]`.
pub fn small(rng: &mut impl Rng) -> Q {
    let mut n = rng.gen_range(-5..=4);
    if n >= 0 {
        n += 1;
    }
    Q::from_ratio(n, rng.gen_range(1..=4))
}

/// [`small`] or zero with equal odds.
fn maybe(rng: &mut impl Rng) -> Q {
    if rng.gen_bool(0.5) {
        small(rng)
    } else {
        Q::zero()
    }
}

fn pick(rng: &mut impl Rng, nonzero: bool) -> Q {
    if nonzero {
        small(rng)
    } else {
        Q::zero()
    }
}

fn v(i: usize) -> ExactPoly {
    ExactPoly::var(3, i)
}

fn c(q: &Q) -> ExactPoly {
    ExactPoly::constant(3, q.clone())
}

fn sum(parts: &[ExactPoly]) -> ExactPoly {
    parts.iter().fold(ExactPoly::zero(3), |acc, p| &acc + p)
}
