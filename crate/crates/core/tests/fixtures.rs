//! The bundled fixture files parse, round-trip and mean what their names say.

use std::fs;
use std::path::{Path, PathBuf};

use polydyn::automorphism::PolyAutomorphism;
use polydyn::classify::sample::SubCase;
use polydyn::classify::{classify, Class4Form};
use polydyn::expr::parse_map;
use polydyn::io::{load_automorphism, load_divisor, AutomorphismJson, DivisorJson};
use polydyn::pullback::Divisor;
use polydyn::GaussianRational;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    out.sort();
    out
}

fn same_map(f: &PolyAutomorphism, g: &PolyAutomorphism) -> bool {
    f.forward() == g.forward() && f.inverse() == g.inverse()
}

#[test]
fn maps_round_trip() {
    let mut n = 0;
    for dir in [fixtures().join("maps"), fixtures().join("maps/subcases")] {
        for path in json_files(&dir) {
            let text = fs::read_to_string(&path).unwrap();
            let j: AutomorphismJson = serde_json::from_str(&text).unwrap();
            let f = j.decode().unwrap();
            let mut again = AutomorphismJson::encode(&f);
            again.note = j.note.clone();
            assert_eq!(again, j, "{}", path.display());
            let back: AutomorphismJson = serde_json::from_str(&serde_json::to_string(&again).unwrap()).unwrap();
            assert!(same_map(&back.decode().unwrap(), &f));
            n += 1;
        }
    }
    assert_eq!(n, 5 + 16);
}

#[test]
fn divisors_round_trip() {
    for path in json_files(&fixtures().join("divisors")) {
        let text = fs::read_to_string(&path).unwrap();
        let j: DivisorJson = serde_json::from_str(&text).unwrap();
        let d = j.decode().unwrap();
        assert_eq!(DivisorJson::encode(&d), j, "{}", path.display());
    }
    let t = load_divisor(&fixtures().join("divisors/t.json")).unwrap();
    assert_eq!(t, Divisor::hyperplane_at_infinity(2));
}

#[test]
fn named_maps_match_their_definitions() {
    let xy = ["x", "y"];
    let henon = PolyAutomorphism::new(
        parse_map(&["y", "y^2 + x"], &xy).unwrap(),
        parse_map(&["y - x^2", "x"], &xy).unwrap(),
    )
    .unwrap();
    assert!(same_map(&load_automorphism(&fixtures().join("maps/henon.json")).unwrap(), &henon));

    let g = load_automorphism(&fixtures().join("maps/class4.json")).unwrap();
    let q = GaussianRational::from_ratio;
    assert_eq!(Class4Form::read(&g), Some(Class4Form { a: q(2, 1), b: q(1, 2), c: q(1, 1), c_prime: q(3, 1) }));
}

#[test]
fn subcase_fixtures_land_in_their_case() {
    for sub in SubCase::ALL {
        let path = fixtures().join(format!("maps/subcases/{}.json", sub.to_string().to_lowercase()));
        let rep = classify(&load_automorphism(&path).unwrap()).unwrap();
        assert_eq!(rep.family, sub.family(), "{sub}");
        assert!(rep.case.starts_with(&sub.case_prefix()), "{sub}: {}", rep.case);
        if let Some(outcome) = sub.fixed_outcome() {
            assert_eq!(rep.outcome, outcome, "{sub}");
        }
    }
}
