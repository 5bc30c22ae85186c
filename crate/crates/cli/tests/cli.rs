use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn analyze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analyze"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn ex2_json_is_fully_determined() {
    let out = analyze(&[&path("ex2.lag"), "--picture", "both", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for pic in ["lagrangian", "hamiltonian"] {
        assert_eq!(v["pictures"][pic]["termination"], "FullyDetermined");
    }
    assert_eq!(v["equivalence"]["matched"], true);
    assert_eq!(v["verification"]["max_residual"], 0.0);
}

#[test]
fn json_has_the_stable_keys() {
    let out = analyze(&[&path("ex4.lag"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["system", "dim", "side_conditions", "pictures", "equivalence", "verification", "warnings"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    let lag = &v["pictures"]["lagrangian"];
    for k in ["generations", "determined", "termination", "evolution_field"] {
        assert!(lag.get(k).is_some(), "missing {k}");
    }
    let c = &lag["generations"][0]["constraints"][0];
    for k in ["label", "expr", "class", "resolution"] {
        assert!(c.get(k).is_some(), "missing {k}");
    }
    assert!(lag["determined"].get("velocities").is_some());
    assert!(lag["determined"].get("accelerations").is_some());
    assert!(v["equivalence"].get("map").is_some());
    assert!(v["verification"].get("samples").is_some());
}

#[test]
fn budget_exhaustion_exits_1() {
    let out = analyze(&[&path("ex4.lag"), "--max-gen", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not terminate within 1"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(analyze(&["no-such-file.lag"]).status.code(), Some(2));
    assert_eq!(
        analyze(&[&path("ex5.lag"), "--set", "gamma=1"]).status.code(),
        Some(2)
    );
    assert_eq!(analyze(&[&path("ex1.lag"), "--max-gen", "0"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lag");
    std::fs::write(&bad, "system \"bad\"\ndim 1\nlagrangian = v1 *\n").unwrap();
    let out = analyze(&[bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn parameter_overrides_select_the_branch() {
    let a = analyze(&[&path("ex5.lag"), "--set", "alpha=0", "--set", "beta=0", "--format", "json"]);
    let b = analyze(&[&path("ex5.lag"), "--set", "alpha=0", "--format", "json"]);
    let a: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(a["pictures"]["hamiltonian"]["termination"], "GaugeFreedom");
    assert_eq!(b["pictures"]["hamiltonian"]["termination"], "FullyDetermined");
    assert_eq!(b["side_conditions"], serde_json::json!(["beta"]));
}

#[test]
fn output_is_deterministic_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for p in [&first, &second] {
        let out = analyze(&[
            &path("ex3.lag"),
            "--format",
            "json",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn several_files_give_a_json_array() {
    let out = analyze(&[&path("ex1.lag"), &path("ex2.lag"), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().map(Vec::len), Some(2));
}

#[test]
fn text_report_narrates_generations() {
    let out = analyze(&[&path("ex1.lag")]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("generation 0"));
    assert!(s.contains("h   = 1/2*p1^2 + U(q1)"));
    assert!(s.contains("equivalence: matched"));
}
