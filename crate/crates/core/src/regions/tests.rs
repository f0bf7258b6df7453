use proptest::prelude::*;
use rand::Rng;

use super::*;

fn q(n: i64, d: i64) -> GaussianRational {
    GaussianRational::from_ratio(n, d)
}

fn form(a: GaussianRational, b: GaussianRational, c: GaussianRational, cp: GaussianRational) -> Class4Form {
    Class4Form { a, b, c, c_prime: cp }
}

fn half_params() -> RegionParams<f64> {
    RegionParams::new(&form(q(1, 1), q(1, 2), q(0, 1), q(0, 1)), None).unwrap()
}

fn real3(x: f64, y: f64, z: f64) -> [Complex<f64>; 3] {
    [Complex::new(x, 0.0), Complex::new(y, 0.0), Complex::new(z, 0.0)]
}

/// The regions written out as disjunctions of the two branches of the max.
fn v_by_cases(p: &[Complex<f64>; 3], alpha: f64, r: f64) -> bool {
    let (x, y, z) = (p[0].norm(), p[1].norm(), p[2].norm());
    let bound_x = r.powf(1.0 / 3.0) * x;
    let beats = |s: f64| s > 2.0 * r && s > bound_x;
    beats(2.0 * alpha * y) || beats(z)
}

fn w_by_cases(p: &[Complex<f64>; 3], alpha: f64, r: f64) -> bool {
    let d = (p[0] - p[2]).norm();
    let bound_d = r.powf(1.0 / 3.0) * d;
    let beats = |s: f64| s > r && s > bound_d;
    beats(alpha * p[1].norm()) || beats(p[0].norm())
}

#[test]
fn membership_examples() {
    let p = half_params();
    assert_eq!(p.alpha(), 1.0 / 8.0);
    assert!(region_membership(&real3(0.0, 1000.0, 0.0), &p, 10.0).in_v);
    assert_eq!(region_membership(&real3(0.0, 0.0, 0.0), &p, 10.0), Membership { in_v: false, in_w: false });
    assert!(region_membership(&real3(1000.0, 0.0, 1000.0), &p, 10.0).in_w);
}

#[test]
fn epsilon_defaults_and_limits() {
    let p = half_params();
    // |b| = 1/2: eps_max = (1/2)/(5/2) = 1/5
    assert!((p.eps_max().unwrap() - 0.2).abs() < 1e-15);
    assert!((p.eps().unwrap() - 0.18).abs() < 1e-15);
    let f = form(q(1, 1), q(1, 2), q(0, 1), q(0, 1));
    assert!(matches!(RegionParams::<f64>::new(&f, Some(0.25)), Err(RegionError::BadEpsilon { .. })));

    let unit = RegionParams::<f64>::new(&form(q(1, 1), q(1, 1), q(0, 1), q(0, 1)), None).unwrap();
    assert_eq!(unit.eps(), None);
    assert!(matches!(
        verify_inclusions(&unit, 1e4, 10, 42, Transcription::Faithful),
        Err(RegionError::PreconditionFailed { .. })
    ));
    assert!(matches!(
        verify_inclusions(&p, 1.0, 10, 42, Transcription::Faithful),
        Err(RegionError::RadiusTooSmall { .. })
    ));
}

#[test]
fn inverse_constant_is_minus_c_prime_over_b() {
    let p = RegionParams::<f64>::new(&form(q(2, 1), q(1, 2), q(1, 1), q(3, 1)), None).unwrap();
    assert_eq!(p.c_second(), &q(-6, 1));
    // g⁻¹ ∘ g = id at a sample point
    let z = real3(0.3, -1.2, 2.5);
    let g = p.form().build().unwrap();
    let exact: Vec<GaussianRational> = g.apply(&[q(3, 10), q(-6, 5), q(5, 2)], crate::automorphism::Direction::Forward);
    let image = [exact[0].to_complex64(), exact[1].to_complex64(), exact[2].to_complex64()];
    let back = p.g_inverse(&image);
    for i in 0..3 {
        assert!((back[i] - z[i]).norm() < 1e-12);
    }
}

#[test]
fn transcription_agrees_with_case_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let alpha: f64 = rng.gen_range(0.01..2.0);
        let r: f64 = 10f64.powf(rng.gen_range(0.01..6.0));
        let mut coord = || {
            let scale = 10f64.powf(rng.gen_range(-1.0..8.0));
            polar(scale, &mut rng)
        };
        let p = [coord(), coord(), coord()];
        assert_eq!(in_v(&p, alpha, r), v_by_cases(&p, alpha, r));
        assert_eq!(in_w(&p, alpha, r), w_by_cases(&p, alpha, r));
    }
}

#[test]
fn samples_lie_in_their_regions() {
    let alpha = 0.125;
    let mut hits = 0;
    for i in 0..2000 {
        for inc in [Inclusion::FromV, Inclusion::FromW] {
            let mut rng = sample_rng(1, inc, i);
            hits += usize::from(in_domain(inc, &sample_point(inc, alpha, 1e4, &mut rng), alpha, 1e4));
        }
    }
    // rejection is rare; a redraw loop covers the rest
    assert!(hits > 3900, "{hits}");
}

#[test]
fn inclusions_hold_for_small_b() {
    let p = half_params();
    let rep = verify_inclusions(&p, 1e4, 20_000, 42, Transcription::Faithful).unwrap();
    assert_eq!(rep.checked, 40_000);
    assert_eq!(rep.violation_count, 0, "{:?}", rep.violations.first());
}

#[test]
fn widened_targets_are_caught() {
    let p = half_params();
    let rep = verify_inclusions(&p, 1e4, 20_000, 42, Transcription::Widened { factor: 8 }).unwrap();
    assert!(rep.violation_count > 0);
    assert!(rep.violations.len() <= MAX_RECORDED);
    // with |b| = 3/4 the threshold 2/|b| drops below 4
    let f = form(q(1, 1), q(3, 4), q(0, 1), q(0, 1));
    let p34 = RegionParams::<f64>::new(&f, None).unwrap();
    let rep = verify_inclusions(&p34, 1e4, 20_000, 42, Transcription::Widened { factor: 4 }).unwrap();
    assert!(rep.violation_count > 0);
}

#[test]
fn quadrupled_targets_are_tight_at_half() {
    // |x₁| = 2|z| > 4R on V_R, so nothing can escape the widened target
    let rep = verify_inclusions(&half_params(), 1e4, 20_000, 42, Transcription::Widened { factor: 4 }).unwrap();
    assert_eq!(rep.violation_count, 0);
}

#[test]
fn runs_are_reproducible() {
    let p = half_params();
    let a = verify_inclusions(&p, 1e2, 3000, 9, Transcription::Widened { factor: 8 }).unwrap();
    let b = verify_inclusions(&p, 1e2, 3000, 9, Transcription::Widened { factor: 8 }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invariant_line() {
    let one = invariant_line_check(&form(q(1, 1), q(1, 1), q(0, 1), q(0, 1))).unwrap();
    assert_eq!(one, InvariantLine { applicable: true, verified: true, witnesses_non_attracting: true });
    let two = invariant_line_check(&form(q(4, 1), q(2, 1), q(0, 1), q(0, 1))).unwrap();
    assert!(two.applicable && two.verified);
    let shifted = invariant_line_check(&form(q(1, 1), q(1, 1), q(1, 1), q(0, 1))).unwrap();
    assert!(!shifted.applicable);
    let small = invariant_line_check(&form(q(1, 4), q(1, 2), q(0, 1), q(0, 1))).unwrap();
    assert!(small.verified && !small.witnesses_non_attracting);
}

proptest! {
    #[test]
    fn regions_shrink_as_r_grows(
        xs in proptest::array::uniform6(-1e6f64..1e6),
        alpha in 0.01f64..2.0,
        r in 1.01f64..1e5,
        factor in 1.0f64..100.0,
    ) {
        let p = [Complex::new(xs[0], xs[1]), Complex::new(xs[2], xs[3]), Complex::new(xs[4], xs[5])];
        let big = r * factor;
        prop_assert!(!in_v(&p, alpha, big) || in_v(&p, alpha, r));
        prop_assert!(!in_w(&p, alpha, big) || in_w(&p, alpha, r));
    }
}
