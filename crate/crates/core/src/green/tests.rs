use num_bigint::BigInt;
use num_traits::Signed;

use super::*;
use crate::expr::{parse_map, parse_poly};

const XY: [&str; 2] = ["x", "y"];

fn henon() -> PolyAutomorphism {
    PolyAutomorphism::new(parse_map(&["y", "y^2 + x"], &XY).unwrap(), parse_map(&["y - x^2", "x"], &XY).unwrap())
        .unwrap()
}

fn pt(x: f64, y: f64) -> Vec<Complex<f64>> {
    vec![Complex::new(x, 0.0), Complex::new(y, 0.0)]
}

fn params() -> GreenParams<f64> {
    GreenParams::default()
}

/// `ln |n|` for a big integer, from its top 64 bits.
fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `2^{-n} ln|y_n|` along the exact integer orbit of `(x, y)`.
fn exact_rate(x: i64, y: i64, n: u32) -> f64 {
    let (mut a, mut b) = (BigInt::from(x), BigInt::from(y));
    for _ in 0..n {
        let next = &b * &b + &a;
        a = b;
        b = next;
    }
    ln_big(&b) / 2f64.powi(n as i32)
}

#[test]
fn fixed_point_does_not_escape() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    let ev = green_plus(&f, &pt(0.0, 0.0), &params()).unwrap();
    assert!(!ev.escaped);
    assert_eq!(ev.g, 0.0);
    assert_eq!(ev.iterations, 200);
    assert_eq!(green_functional_residual(&f, &pt(0.0, 0.0), &params()).unwrap(), 0.0);
}

#[test]
fn escaping_point_matches_exact_orbit() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    let ev = green_plus(&f, &pt(0.0, 10.0), &params()).unwrap();
    assert!(ev.escaped);
    let oracle = exact_rate(0, 10, 16);
    assert!((ev.g - oracle).abs() < 1e-12, "{} vs {oracle}", ev.g);
    // the limit sits close to ln 10 since x stays negligible next to y^2
    assert!((ev.g - 10f64.ln()).abs() < 1e-2);
    assert!(ev.cauchy_increment < 1e-12);
}

#[test]
fn immediate_escape() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    let z = pt(0.0, 1e9);
    let ev = green_plus(&f, &z, &params()).unwrap();
    assert!(ev.escaped);
    assert_eq!(ev.trail.len() as u32, ev.iterations + 1);
    assert!((ev.g - exact_rate(0, 1_000_000_000, 12)).abs() < 1e-12);
    assert!((ev.g - 1e9f64.ln()).abs() < 1e-6);
}

#[test]
fn functional_equation_at_escaping_points() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    assert!(green_functional_residual(&f, &pt(0.0, 10.0), &params()).unwrap() < 1e-6);
    let mut worst = 0f64;
    for i in 0..40 {
        let t = i as f64 / 40.0 * std::f64::consts::TAU;
        let z = vec![Complex::from_polar(3.0, t), Complex::from_polar(4.0, 2.0 * t)];
        worst = worst.max(green_functional_residual(&f, &z, &params()).unwrap());
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn refinement_increments_shrink() {
    // a class-4 map escapes at the slower geometric rate
    let g = PolyAutomorphism::new(
        parse_map(&["x^2 - x*z + 1 + y", "2z", "x/2 + 3"], &["x", "y", "z"]).unwrap(),
        parse_map(&["2z - 6", "x - (2z - 6)^2 + (2z - 6)*y/2 - 1", "y/2"], &["x", "y", "z"]).unwrap(),
    )
    .unwrap();
    let f = FloatMap::<f64>::new(&g).unwrap();
    let ev = green_plus(&f, &[Complex::new(20.0, 1.0), Complex::new(-3.0, 0.5), Complex::new(2.0, 0.0)], &params())
        .unwrap();
    assert!(ev.escaped);
    let inc: Vec<f64> = ev.trail.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for pair in inc.windows(2).filter(|p| p[0] > 1e-13) {
        assert!(pair[1] < 0.9 * pair[0], "{inc:?}");
    }
    assert!(ev.g > 0.0);
}

#[test]
fn verdicts_are_tri_state() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    let v = orbit_verdicts(&f, &[pt(0.0, 0.0), pt(0.0, 10.0)], 100, 1e8).unwrap();
    assert_eq!(v[0].forward_bounded, Boundedness::Bounded);
    assert_eq!(v[0].backward_bounded, Boundedness::Bounded);
    assert!(matches!(v[1].forward_bounded, Boundedness::Escapes { .. }));
    let slow = orbit_verdicts(&f, &[pt(0.0, 1.5)], 1, 1e8).unwrap();
    assert_eq!(slow[0].forward_bounded, Boundedness::Unknown);
    assert_eq!(serde_json::to_value(slow[0].forward_bounded).unwrap(), serde_json::json!("unknown"));
}

fn divisor(src: &str) -> Divisor {
    Divisor::from_affine(&parse_poly(src, &XY).unwrap()).unwrap()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn experiment_on_henon_divisors() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    let grid = vec![pt(0.0, 10.0)];
    let zx = potential_convergence_experiment(&f, &divisor("x"), &ratio(1, 2), &grid, 25, &params()).unwrap();
    assert!(zx.deviations_at(25)[0] < 1e-3);

    let zt = potential_convergence_experiment(&f, &Divisor::hyperplane_at_infinity(2), &ratio(1, 1), &grid, 25, &params())
        .unwrap();
    assert!(zt.rows.iter().all(|r| r.w == 0.0 && r.target == 0.0));

    let zy = potential_convergence_experiment(&f, &divisor("y - 1"), &ratio(0, 1), &grid, 25, &params()).unwrap();
    assert!(zy.deviations_at(25)[0] < 1e-3);
}

#[test]
fn experiment_flags_bad_points() {
    let f = FloatMap::<f64>::new(&henon()).unwrap();
    // (0, 0) never escapes; (1, 0) maps to (0, 1) on Z(x)
    let grid = vec![pt(0.0, 0.0), pt(1e3, 0.0)];
    let t = potential_convergence_experiment(&f, &divisor("x"), &ratio(1, 2), &grid, 5, &params()).unwrap();
    assert_eq!(t.excluded, vec![(0, Exclusion::NotEscaping), (1, Exclusion::HitsDivisor { n: 1 })]);
}

#[test]
fn trimming_drops_the_worst() {
    let v: Vec<f64> = (0..20).map(f64::from).collect();
    assert_eq!(trimmed_max(&v, 0.05), Some(18.0));
    assert_eq!(trimmed_max::<f64>(&[], 0.05), None);
}
