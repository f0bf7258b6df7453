use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polydyn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact (comment lines and header dropped).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn siu_henon_x_is_one_half() {
    let o = run(&["siu", "--map", &fixture("maps/henon.json"), "--divisor", &fixture("divisors/x.json"), "--N", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# polydyn siu\n# config: {"));
    assert!(text.contains("c_n[exact]"));
    let r = rows(&text);
    assert_eq!(r.len(), 6);
    assert!(r.iter().all(|row| row[3] == "1/2"), "{text}");
}

#[test]
fn siu_integers_keep_a_denominator() {
    let o = run(&["siu", "--map", &fixture("maps/henon.json"), "--divisor", &fixture("divisors/t.json"), "--N", "3"]);
    assert!(rows(&stdout(&o)).iter().all(|row| row[3] == "1/1"));
}

#[test]
fn fibonacci_inverse_degrees() {
    let o = run(&["degrees", "--map", &fixture("maps/class4.json"), "--direction", "inverse", "--N", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let degrees: Vec<String> = rows(&text).into_iter().map(|r| r[1].clone()).collect();
    assert_eq!(degrees, ["2", "3", "5", "8", "13", "21"]);
    assert!(text.contains("# dynamical degree: (1+√5)/2"));
}

#[test]
fn classify_names_class_four() {
    let o = run(&["classify", "--map", &fixture("maps/class4.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class_number"], 4);
    assert_eq!(v["report"]["outcome"], "class4");
    assert_eq!(v["all_passed"], true);
    assert!(v["summary"].as_str().unwrap().contains("class 4"));
    assert_eq!(v["config"]["depth"], 6);
}

#[test]
fn every_subcase_fixture_classifies_and_verifies() {
    for name in ["h3-a", "h3-g", "h4-b", "h4-d", "h5-b", "h5-e"] {
        let o = run(&["classify", "--map", &fixture(&format!("maps/subcases/{name}.json"))]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn region_runs_are_byte_identical_and_controls_fail() {
    let args = ["verify-regions", "--a", "1", "--b", "1/2", "--samples", "20000", "--seed", "42"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["report"]["violation_count"], 0);

    let mut widened = args.to_vec();
    widened.extend(["--widen", "8"]);
    assert_eq!(run(&widened).status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["converge", "--map", &fixture("maps/henon.json"), "--divisor", &fixture("divisors/x.json"), "--n", "12"];
    let many = run(&args);
    let one = Command::new(env!("CARGO_BIN_EXE_polydyn")).args(args).env("POLYDYN_THREADS", "1").output().unwrap();
    assert_eq!(many.status.code(), Some(0));
    assert_eq!(many.stdout, one.stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let args = ["green-grid", "--map", &fixture("maps/henon.json"), "--grid=-2:2:3"];
    let direct = run(&args);
    let mut with_out = args.to_vec();
    let p = path.display().to_string();
    with_out.extend(["--out", &p]);
    let o = run(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    // the fixed point at the origin does not escape
    assert!(stdout(&direct).contains("0e0,0e0,0e0,0e0,0e0,200,0e0,false"));
}

#[test]
fn conjugacy_check_agrees() {
    let o = run(&["conjugacy-check", "--map", &fixture("maps/subcases/h4-a.json"), "--N", "5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["agree"], true);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"k\": 2, \"forward\": [").unwrap();
    let o = run(&["degrees", "--map", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("IoError::Json") && err.contains("line 1"), "{err}");

    let o = run(&["classify", "--map", &fixture("maps/henon.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ClassifyError::NotThreeDimensional"));

    let o = run(&["verify-regions", "--a", "1", "--b", "2", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("RegionError::PreconditionFailed"));

    assert_eq!(run(&["degrees", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
