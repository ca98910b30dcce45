use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
}

fn jetham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetham"))
        .args(args)
        .output()
        .unwrap()
}

fn compute(sc: &Path, what: &str) -> (i32, Option<Value>, String) {
    let out = jetham(&[
        "compute",
        "--scenario",
        sc.to_str().unwrap(),
        "--what",
        what,
        "--out",
        "-",
    ]);
    let doc = serde_json::from_slice(&out.stdout).ok();
    (
        out.status.code().unwrap(),
        doc,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn families(doc: &Value) -> &Vec<Value> {
    doc["results"][0]["families"].as_array().unwrap()
}

fn family<'a>(doc: &'a Value, label: &str) -> &'a Value {
    families(doc).iter().find(|f| f["family"] == label).unwrap()
}

fn entry(fam: &Value, index: &[u64]) -> f64 {
    fam["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| {
            e["index"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap())
                .eq(index.iter().cloned())
        })
        .unwrap()["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn flat_torsion_is_zero() {
    let (code, doc, _) = compute(&scenario("flat"), "torsion");
    assert_eq!(code, 0);
    let doc = doc.unwrap();
    assert_eq!(doc["schema"], "jetham/1");
    let fams = families(&doc);
    assert_eq!(fams.len(), 18);
    assert_eq!(
        fams.iter()
            .filter(|f| f["structural_zero"] == false)
            .count(),
        12
    );
    for f in fams {
        for e in f["entries"].as_array().unwrap() {
            assert_eq!(e["value"].as_f64().unwrap(), 0.0, "{}", f["family"]);
        }
    }
}

#[test]
fn sphere_curvature_entries() {
    let (code, doc, _) = compute(&scenario("sphere"), "curvature");
    assert_eq!(code, 0);
    let doc = doc.unwrap();
    let r = family(&doc, "R_ijk^l");
    // R(δ/δx^2, δ/δx^1) δ/δx^2 = −sin²(π/3) δ/δx^1
    approx::assert_abs_diff_eq!(entry(r, &[1, 2, 1, 2]), -0.75, epsilon = 1e-12);
    approx::assert_abs_diff_eq!(entry(r, &[1, 2, 2, 1]), 0.75, epsilon = 1e-12);
    approx::assert_abs_diff_eq!(entry(r, &[2, 1, 1, 2]), 1.0, epsilon = 1e-12);
    // paired family δ^d_a r^i_{ljk}; m = 1 so P indices are (i, 1)
    let rp = family(&doc, "R_(l)(a)jk^(d)(i)");
    approx::assert_abs_diff_eq!(
        entry(rp, &[1, 1, 2, 1, 1, 2]),
        entry(r, &[2, 1, 1, 2]),
        epsilon = 1e-12
    );
}

#[test]
fn every_table_computes() {
    for what in [
        "frames",
        "brackets",
        "torsion",
        "curvature",
        "deflection",
        "fundamental-metric",
        "almost-product",
    ] {
        let (code, doc, err) = compute(&scenario("custom"), what);
        assert_eq!(code, 0, "{what}: {err}");
        let doc = doc.unwrap();
        assert_eq!(doc["what"], what);
        assert_eq!(doc["results"].as_array().unwrap().len(), 2);
    }
    let (_, doc, _) = compute(&scenario("custom"), "almost-product");
    let r = &doc.unwrap()["results"][0];
    assert_eq!(r["multiplicity_plus"], 3);
    assert_eq!(r["multiplicity_minus"], 2);
}

#[test]
fn scenario_echo_round_trips() {
    let (_, doc, _) = compute(&scenario("custom"), "deflection");
    let echoed = doc.unwrap()["scenario"].clone();
    let original: Value =
        serde_json::from_str(&std::fs::read_to_string(scenario("custom")).unwrap()).unwrap();
    assert_eq!(echoed, original);
}

#[test]
fn verify_flat_passes() {
    let out = jetham(&[
        "verify",
        "--scenario",
        scenario("flat").to_str().unwrap(),
        "--suite",
        "all",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS covariance")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
    assert!(text.contains("INFO integrability: integrable"));
}

#[test]
fn sphere_non_integrability_is_a_finding() {
    let out = jetham(&[
        "verify",
        "--scenario",
        scenario("sphere").to_str().unwrap(),
        "--suite",
        "integrability",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(text.contains("not integrable"), "{text}");
}

#[test]
fn corrupted_connection_fails_covariance() {
    let out = jetham(&[
        "verify",
        "--scenario",
        scenario("custom_corrupted").to_str().unwrap(),
        "--suite",
        "covariance",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .any(|l| l.starts_with("FAIL covariance")));
    let out = jetham(&[
        "verify",
        "--scenario",
        scenario("custom").to_str().unwrap(),
        "--suite",
        "covariance",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

fn with_scenario(text: &str, args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, text).unwrap();
    let mut all = args.to_vec();
    all.extend(["--scenario", path.to_str().unwrap()]);
    jetham(&all)
}

fn sphere_with(metric: &str) -> String {
    std::fs::read_to_string(scenario("sphere"))
        .unwrap()
        .replace("sin(x[1])^2", metric)
}

#[test]
fn exit_codes() {
    let out = jetham(&[
        "compute",
        "--scenario",
        "/nonexistent.json",
        "--what",
        "torsion",
        "--out",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent.json"));

    let out = with_scenario(
        "{\n  \"dims\": {\"m\": 1,\n",
        &["compute", "--what", "torsion", "--out", "-"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains(":3:"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = with_scenario(
        &sphere_with("x[1]^"),
        &["compute", "--what", "torsion", "--out", "-"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spatial_metric[2][2]"));

    let out = with_scenario(
        &sphere_with("0"),
        &["compute", "--what", "curvature", "--out", "-"],
    );
    assert_eq!(out.status.code(), Some(4));

    let out = with_scenario(
        &sphere_with("log(x[1] - 5)"),
        &["compute", "--what", "curvature", "--out", "-"],
    );
    assert_eq!(out.status.code(), Some(3));

    let out = jetham(&[
        "compute",
        "--scenario",
        scenario("sphere").to_str().unwrap(),
        "--what",
        "fundamental-metric",
        "--out",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_jetham"))
            .args([
                "compute",
                "--scenario",
                scenario("custom").to_str().unwrap(),
                "--what",
                "curvature",
                "--out",
                "-",
            ])
            .env("JETHAM_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("8"));
}
