use std::path::Path;
use std::process::Command;

use gridstrength::cli::{bundled_case_dir, run_with, CASE_DIR_ENV};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("gridstrength").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn case(name: &str) -> String {
    bundled_case_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn gscr_report_for_dual_case() {
    let (code, out, _) = run(&["gscr", &case("dual.json")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 2);
    assert_eq!(v["gscr"], v["eigenvalues"][0]);
    assert_eq!(v["class"], "VeryWeak");
}

#[test]
fn threshold_overrides_change_the_class() {
    let (code, out, _) = run(&["--cg", "1.0", "--bg", "1.5", "classify", &case("dual.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("Strong"), "{out}");
}

#[test]
fn missing_case_is_an_input_error_naming_the_path() {
    let (code, _, err) = run(&["gscr", "missing.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.json"), "{err}");
}

#[test]
fn malformed_case_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    let text = std::fs::read_to_string(case("dual.json")).unwrap().replace("\"x_pu\": 0.3", "\"x_pu\": 0");
    std::fs::write(&p, text).unwrap();
    let (code, _, err) = run(&["gscr", p.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn unknown_flag_and_bad_aggregation_are_rejected() {
    assert_eq!(run(&["--frobnicate", "gscr", &case("dual.json")]).0, 2);
    assert_eq!(run(&["--agg", "median", "find-bgscr", &case("dual.json")]).0, 2);
}

#[test]
fn map_csv_layout() {
    let (code, out, _) = run(&["map", &case("dual.json")]);
    assert_eq!(code, 0);
    let header = out.lines().next().unwrap();
    assert_eq!(
        header,
        "lambda,u_pu_1,u_pu_2,p_mw_1,p_mw_2,q_mvar_1,q_mvar_2,mu_deg_1,mu_deg_2,min_singular_value"
    );
    assert!(!out.contains('\r'));
    assert!(out.lines().count() > 10);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [vec!["map"], vec!["find-bgscr"], vec!["sweep", "--ratios", "0.5,1,2"]] {
        let mut files = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{}-{k}", cmd[0]));
            let c = case("dual.json");
            let mut args = vec!["--out", out.to_str().unwrap(), cmd[0], &c];
            args.extend(&cmd[1..]);
            let (code, _, err) = run(&args);
            assert_eq!(code, 0, "{err}");
            files.push(std::fs::read(&out).unwrap());
        }
        assert_eq!(files[0], files[1], "{}", cmd[0]);
    }
}

#[test]
fn case_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(case("triple.json"), dir.path().join("mine.json")).unwrap();
    let bin = env!("CARGO_BIN_EXE_gridstrength");
    let out = Command::new(bin).env(CASE_DIR_ENV, dir.path()).args(["gscr", "mine"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"gscr\""));

    let out = Command::new(bin).env(CASE_DIR_ENV, Path::new("/nonexistent")).args(["gscr", "mine"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_writes_a_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let (code, _, err) = run(&["--jobs", "2", "--out", out.to_str().unwrap(), "validate"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let rows = v["rows"].as_array().unwrap();
    for id in ["case1", "case2", "case3", "case4", "case5", "case6", "case7", "case8", "sweep"] {
        assert!(rows.iter().any(|r| r["scenario"] == id), "{id}");
    }
    assert!(rows.iter().all(|r| !r["source"].as_str().unwrap().is_empty()));
}
