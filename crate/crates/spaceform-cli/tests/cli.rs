use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spaceform")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn verify_cone_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cone.json");
    let o = run(&["verify", "--family", "cone-r0", "--grid", "10x10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report_version"], "1");
    assert_eq!(v["pass"], true);
    assert_eq!(v["sample_count"], 100);
}

#[test]
fn horosphere_passes_to_stdout() {
    let o = run(&["verify", "--family", "horosphere", "--grid", "4x3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn perturbed_diagonal_family_fails() {
    let o = run(&["verify", "--family", "t2diag", "--lambda", "2", "--R", "0", "--perturb-y", "0.3", "--grid", "6x4"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["max_abs_mean_curvature"].as_f64().unwrap() > 1e-2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--family", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--family", "cone-r0", "--grid", "1x5"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--family", "cone-r0", "--tol-H", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["typeiii", "--skip", "nothing"]).status.code(), Some(2));
    assert_eq!(run(&["tabulate", "--theta-range", "0:2:3"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let o = run(&["verify", "--family", "cone-r0", "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        run(&["typeiii", "--theta-range", "-0.6:0.6:3", "--skip", "abelian", "--out", p.to_str().unwrap()]);
    }
    assert_eq!(without_timestamp(json(&a)), without_timestamp(json(&b)));
    for p in [&a, &b] {
        run(&["verify", "--family", "t2nilpotent", "--grid", "5x3", "--seed", "7", "--out", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn skip_omits_abelian_records() {
    let o = run(&["typeiii", "--theta-range", "0:0:1", "--skip", "abelian"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(!names.iter().any(|n| n.starts_with("abelian") || n.starts_with("loop_")));
    assert!(names.contains(&"rho0"));
    assert_eq!(v["skipped"][0], "abelian");
    let all_pass = v["records"].as_array().unwrap().iter().all(|r| r["pass"] == true);
    assert_eq!(v["pass"], all_pass);
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
}

#[test]
fn typeiii_default_records_constants() {
    let o = run(&["typeiii"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rec = |name: &str| v["records"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap().clone();
    assert_eq!(rec("rho0")["pass"], true);
    for name in ["conserved_a", "conserved_b", "invariant_f"] {
        assert_eq!(rec(name)["pass"], true, "{name}");
    }
    assert!(rec("r")["measured"].as_f64().is_some());
    assert!(v["holonomy"]["commutator"].is_object());
}

#[test]
fn tabulate_writes_csv() {
    let o = run(&["tabulate", "--theta-range", "-0.5:0.5:5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("theta,r1,r2,r3,rho_plus,rho_minus"));
}

#[test]
fn exports() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("cone.obj");
    let o = run(&["export-mesh", "--family", "cone-r0", "--grid", "40x40", "--out", obj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 1600);
    let side = std::fs::read_to_string(obj.with_extension("csv")).unwrap();
    assert_eq!(side.lines().count(), 1601);

    let horo = dir.path().join("horo.obj");
    run(&["export-mesh", "--family", "horosphere", "--grid", "10x10", "--out", horo.to_str().unwrap()]);
    for l in std::fs::read_to_string(&horo).unwrap().lines().filter(|l| l.starts_with("v ")) {
        let n2: f64 = l[2..].split(' ').map(|x| x.parse::<f64>().unwrap().powi(2)).sum();
        assert!(n2 < 1.0);
    }

    let o = run(&["export-leaf", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 17);

    let o = run(&["export-lattice"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("minimal")).count(), 24);
}
