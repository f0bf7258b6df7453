//! Randomized invariants across the polynomial, automorphism, pullback and
//! Green-function layers.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polydyn::automorphism::{DegreeMethod, Direction, PolyAutomorphism};
use polydyn::classify::sample::{affine_change, sweep, SubCase};
use polydyn::classify::conjugate;
use polydyn::expr::parse_map;
use polydyn::green::{green_plus, FloatMap, GreenParams};
use polydyn::pullback::{siu_sequence, Divisor};
use polydyn::{ExactPoly, FieldCoeff, GaussianRational, HomogPoly};

fn coeff() -> impl Strategy<Value = GaussianRational> {
    (-6i64..6, 1i64..5, -2i64..3).prop_map(|(n, d, im)| {
        GaussianRational::new(BigRational::new(n.into(), d.into()), BigRational::from_integer(im.into()))
    })
}

fn poly(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = ExactPoly> {
    prop::collection::vec((prop::collection::vec(0..=max_exp, nvars), coeff()), 0..=max_terms)
        .prop_map(move |terms| ExactPoly::from_terms(nvars, terms).unwrap())
}

fn nonzero(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = ExactPoly> {
    poly(nvars, max_exp, max_terms).prop_filter("nonzero", |p| !p.is_zero())
}

fn henon() -> PolyAutomorphism {
    let xy = ["x", "y"];
    PolyAutomorphism::new(parse_map(&["y", "y^2 + x"], &xy).unwrap(), parse_map(&["y - x^2", "x"], &xy).unwrap())
        .unwrap()
}

/// `(y, y² + c·y + a·x)` with inverse `((y − x² − c·x)/a, x)`.
fn henon_like(a: &GaussianRational, c: &GaussianRational) -> PolyAutomorphism {
    let (x, y) = (ExactPoly::var(2, 0), ExactPoly::var(2, 1));
    let a_inv = a.inverse().expect("a ≠ 0");
    let fwd = vec![y.clone(), &(&(&y * &y) + &y.scale(c)) + &x.scale(a)];
    let inv = vec![(&(&y - &(&x * &x)) - &x.scale(c)).scale(&a_inv), x];
    PolyAutomorphism::new(fwd, inv).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in poly(3, 3, 5), q in poly(3, 3, 5), r in poly(3, 3, 5)) {
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&p + &q, &q + &p);
    }

    #[test]
    fn compose_is_associative(
        p in poly(2, 2, 4),
        f in prop::collection::vec(poly(2, 2, 3), 2),
        g in prop::collection::vec(poly(2, 2, 3), 2),
    ) {
        let fg: Vec<ExactPoly> = f.iter().map(|fi| fi.compose(&g).unwrap()).collect();
        prop_assert_eq!(p.compose(&f).unwrap().compose(&g).unwrap(), p.compose(&fg).unwrap());
    }

    #[test]
    fn t_valuation_is_additive(p in nonzero(3, 3, 4), q in nonzero(3, 3, 4), a in 0u32..3, b in 0u32..3) {
        let hp = p.homogenize(p.total_degree().unwrap() + a).unwrap();
        let hq = q.homogenize(q.total_degree().unwrap() + b).unwrap();
        prop_assert_eq!(hp.t_adic_valuation().unwrap(), a);
        let prod = HomogPoly::from_poly(hp.poly() * hq.poly()).unwrap();
        prop_assert_eq!(prod.t_adic_valuation().unwrap(), a + b);
        prop_assert_eq!(hp.dehomogenize(), p);
    }

    #[test]
    fn vanishing_order_is_additive(
        p in nonzero(2, 3, 4), q in nonzero(2, 3, 4), pt in prop::collection::vec(-2i64..3, 2),
    ) {
        let pt: Vec<GaussianRational> = pt.into_iter().map(GaussianRational::from).collect();
        let lhs = (&p * &q).vanishing_order(&pt).unwrap();
        prop_assert_eq!(lhs, p.vanishing_order(&pt).unwrap() + q.vanishing_order(&pt).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn degrees_submultiplicative_and_conjugation_invariant(seed in any::<u64>(), which in 0usize..16) {
        let sub = SubCase::ALL[which];
        let f = &sweep(sub, 1, seed).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = conjugate(&affine_change(3, &mut rng).unwrap(), f).unwrap();
        for dir in [Direction::Forward, Direction::Inverse] {
            let a = f.degree_sequence(2, dir).unwrap();
            prop_assert!(a.is_submultiplicative());
            prop_assert_eq!(&a, &g.degree_sequence(2, dir).unwrap());
            let method = DegreeMethod::GenericLine { seed: 11 };
            prop_assert_eq!(f.degree_sequence_with(5, dir, method).unwrap(), g.degree_sequence_with(5, dir, method).unwrap());
        }
    }

    #[test]
    fn stable_lifts_have_full_degree(a in coeff().prop_filter("a ≠ 0", |a| !a.is_zero()), c in coeff()) {
        let f = henon_like(&a, &c);
        for n in 1..=4u32 {
            let lift = f.reduced_lift(n).unwrap();
            if lift.dropped == 0 {
                prop_assert_eq!(u64::from(lift.degree), 2u64.pow(n));
            }
        }
        // a second generic probe finds the same point at infinity
        let p1 = f.infinity_image(1).unwrap().point().cloned();
        prop_assert_eq!(p1.clone(), f.infinity_image(99).unwrap().point().cloned());
        let x_plus = p1.expect("Hénon-like maps are weakly regular");
        prop_assert!(!f.indeterminacy_membership(&x_plus).unwrap());
    }

    #[test]
    fn siu_coefficients_monotone_with_bookkeeping(h in nonzero(2, 3, 5)) {
        let f = henon();
        let s = match Divisor::from_affine(&h) {
            Ok(s) => s,
            Err(e) => {
                prop_assert!(h.is_constant(), "{e}");
                return Ok(());
            }
        };
        let seq = siu_sequence(&f, &s, 3).unwrap();
        prop_assert!(seq.is_monotone_in_unit_interval());
        for step in &seq.steps {
            let total = u64::from(s.degree()) * 2u64.pow(step.n);
            prop_assert_eq!(step.m + u64::from(step.residual_degree()), total);
            prop_assert_eq!(&step.c, &BigRational::new(BigInt::from(step.m), BigInt::from(total)));
        }
    }

    #[test]
    fn green_is_nonnegative(x in -4.0f64..4.0, y in -4.0f64..4.0, xi in -1.0f64..1.0, yi in -1.0f64..1.0) {
        let f = FloatMap::<f64>::new(&henon()).unwrap();
        let ev = green_plus(&f, &[Complex::new(x, xi), Complex::new(y, yi)], &GreenParams::default()).unwrap();
        prop_assert!(ev.g >= 0.0);
        if ev.escaped {
            prop_assert!(ev.g > 0.0);
        } else {
            prop_assert!(ev.g.is_zero());
        }
    }
}
