mod common;

use std::process::Command;

use common::{scenario_path, BUNDLED, VALID};
use superkoszul::cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("superkoszul").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    scenario_path(name).to_string_lossy().into_owned()
}

#[test]
fn check_master_exit_codes() {
    for name in BUNDLED {
        let (code, out, _) = call(&["check-master", "--scenario", &path(name)]);
        assert_eq!(code, EXIT_PASS, "{name}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], true);
    }
    let (code, out, _) = call(&["check-master", "--scenario", &path("violator_r3"), "--format", "text"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("master-equation"));
}

#[test]
fn verify_all_exit_codes() {
    for name in VALID {
        let (code, _, err) = call(&["verify-all", "--scenario", &path(name), "--max-arity", "3"]);
        assert_eq!(code, EXIT_PASS, "{name}: {err}");
    }
    let (code, out, _) = call(&["verify-all", "--scenario", &path("broken_sign")]);
    assert_eq!(code, EXIT_FAIL);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["linfty-morphism"]);
    let (code, _, _) = call(&["verify-all", "--scenario", &path("violator_r3")]);
    assert_eq!(code, EXIT_FAIL);
}

#[test]
fn json_reports_are_byte_identical() {
    let args = ["verify-all", "--scenario", &path("cubic_r21"), "--seed", "7", "--checks", "diagram,linfty-morphism"];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (EXIT_PASS, EXIT_PASS));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn selected_checks_and_truncation_overrides() {
    let (code, out, err) = call(&[
        "verify-all",
        "--scenario",
        &path("cubic_r21"),
        "--checks",
        "route-equivalence,hamilton-jacobi",
        "--truncate",
        "antimomentum=5",
        "--format",
        "text",
    ]);
    assert_eq!(code, EXIT_PASS, "{err}");
    assert!(out.contains("route-equivalence") && out.contains("hamilton-jacobi"));
    assert!(!out.contains("diagram"));
}

#[test]
fn compute_operations() {
    let p = path("classical_r2");
    let (code, out, _) = call(&["compute", "--scenario", &p, "--what", "lichnerowicz", "--arg", "1", "--format", "text"]);
    assert_eq!((code, out.trim()), (EXIT_PASS, "0"));
    let (code, out, _) = call(&["compute", "--scenario", &p, "--what", "pullback", "--arg", "x1^2", "--format", "text"]);
    assert_eq!((code, out.trim()), (EXIT_PASS, "x1^2"));
    let (code, out, _) = call(&[
        "compute", "--scenario", &p, "--what", "koszul-bracket", "--arg", "x1", "--arg", "x2",
    ]);
    assert_eq!(code, EXIT_PASS);
    assert!(serde_json::from_str::<serde_json::Value>(&out).is_ok());
    let c = path("cubic_r21");
    let (code, a, _) = call(&["compute", "--scenario", &c, "--what", "morphism-image", "--arg", "dx1*dx2"]);
    let (_, b, _) = call(&["compute", "--scenario", &c, "--what", "pullback", "--arg", "dx1*dx2"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(a, b);
}

#[test]
fn input_errors_exit_with_two() {
    let p = path("classical_r2");
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["check-master"],
        vec!["check-master", "--scenario", "/nonexistent/scenario.json"],
        vec!["check-master", "--scenario", &p, "--format", "yaml"],
        vec!["check-master", "--scenario", &p, "--truncate", "antimomentum"],
        vec!["check-master", "--scenario", &p, "--truncate", "weight=3"],
        vec!["check-master", "--scenario", &p, "--seed", "minus-one"],
        vec!["verify-all", "--scenario", &p, "--checks", "everything"],
        vec!["verify-all", "--scenario", &p, "--max-arity", "many"],
        vec!["compute", "--scenario", &p, "--what", "lichnerowicz", "--arg", "x1 +* x2"],
        vec!["compute", "--scenario", &p, "--what", "lichnerowicz"],
        vec!["compute", "--scenario", &p, "--what", "pullback", "--arg", "dx1"],
    ];
    for args in cases {
        let (code, _, err) = call(&args);
        assert_eq!(code, EXIT_INPUT, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn malformed_scenario_files_are_input_errors() {
    let dir = std::env::temp_dir().join(format!("superkoszul-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"name\": 3}").unwrap();
    let (code, _, _) = call(&["check-master", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    let text = std::fs::read_to_string(scenario_path("classical_r2")).unwrap();
    let odd = dir.join("odd.json");
    std::fs::write(&odd, text.replace("\"x1*xs2*xs1", "\"xs1 + x1*xs2*xs1")).unwrap();
    let (code, _, _) = call(&["check-master", "--scenario", odd.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_honours_thread_count() {
    let bin = env!("CARGO_BIN_EXE_superkoszul");
    let p = path("cubic_r21");
    let run_with = |threads: &str| {
        Command::new(bin)
            .args(["verify-all", "--scenario", &p, "--checks", "diagram,hamilton-jacobi"])
            .env("SUPERKOSZUL_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run_with("1");
    let four = run_with("4");
    assert_eq!(one.status.code(), Some(EXIT_PASS));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run_with("zero").status.code(), Some(EXIT_INPUT));
    assert_eq!(run_with("0").status.code(), Some(EXIT_INPUT));
}
