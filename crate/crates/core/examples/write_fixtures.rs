//! Regenerates the bundled fixture files.
//!
//! ```text
//! cargo run -p polydyn --example write_fixtures -- crates/core/fixtures
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use polydyn::automorphism::PolyAutomorphism;
use polydyn::classify::sample::{sweep, SubCase};
use polydyn::classify::Class4Form;
use polydyn::expr::{parse_map, parse_poly};
use polydyn::io::{AutomorphismJson, DivisorJson};
use polydyn::pullback::Divisor;
use polydyn::GaussianRational;

/// Seed of the per-sub-case fixture draws.
const SUBCASE_SEED: u64 = 2024;

fn map(fwd: &[&str], inv: &[&str], vars: &[&str]) -> PolyAutomorphism {
    PolyAutomorphism::new(parse_map(fwd, vars).unwrap(), parse_map(inv, vars).unwrap()).unwrap()
}

fn write_map(dir: &Path, name: &str, f: &PolyAutomorphism, note: &str) {
    let mut j = AutomorphismJson::encode(f);
    j.note = Some(note.to_string());
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&j).unwrap() + "\n").unwrap();
}

fn write_divisor(dir: &Path, name: &str, d: &Divisor) {
    let s = serde_json::to_string_pretty(&DivisorJson::encode(d)).unwrap();
    fs::write(dir.join(format!("{name}.json")), s + "\n").unwrap();
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/fixtures".into()));
    let (maps, subs, divs) = (root.join("maps"), root.join("maps/subcases"), root.join("divisors"));
    for d in [&maps, &subs, &divs] {
        fs::create_dir_all(d).unwrap();
    }
    let xy = ["x", "y"];
    let xyz = ["x", "y", "z"];

    write_map(&maps, "henon", &map(&["y", "y^2 + x"], &["y - x^2", "x"], &xy), "Henon map (y, y^2 + x)");
    write_map(&maps, "identity", &PolyAutomorphism::identity(2), "identity of C^2");
    write_map(&maps, "unstable", &map(&["x + y^2", "y"], &["x - y^2", "y"], &xy), "elementary, not algebraically stable");
    write_map(
        &maps,
        "remark",
        &map(&["y^2 + z", "y^2 + x", "y"], &["y - z^2", "z", "x - z^2"], &xyz),
        "(P(y) + a z, Q(y) + b x, y) with P = Q = y^2, a = b = 1",
    );
    let q = GaussianRational::from_ratio;
    let class4 = Class4Form { a: q(2, 1), b: q(1, 2), c: q(1, 1), c_prime: q(3, 1) };
    write_map(&maps, "class4", &class4.build().unwrap(), "class-4 normal form with a = 2, b = 1/2, c = 1, c' = 3");

    for sub in SubCase::ALL {
        let f = &sweep(sub, 1, SUBCASE_SEED).unwrap()[0];
        let name = sub.to_string().to_lowercase();
        write_map(&subs, &name, f, &format!("random draw of sub-case {sub}, seed {SUBCASE_SEED}"));
    }

    for (name, src) in [("x", "x"), ("y", "y"), ("y_minus_t", "y - 1")] {
        write_divisor(&divs, name, &Divisor::from_affine(&parse_poly(src, &xy).unwrap()).unwrap());
    }
    write_divisor(&divs, "t", &Divisor::hyperplane_at_infinity(2));
}
