//! End-to-end CLI tests: artifact shapes, determinism and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ckem"))
}

fn write_config(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

const LINEAR_MODEL: &str = r#"{
  "case": "I", "d": 1, "r": 1,
  "lambda": -1, "nu": 1, "a": -1, "b": 1, "mu": -3,
  "base": { "kind": "ball", "scale": 1.0 }
}"#;

const RANK_TWO_MODEL: &str = r#"{
  "case": "IV-1", "d": 1, "r": 2,
  "lambda": 1, "nu": 0, "a": 1, "b": -1,
  "base": { "kind": "fubini_study", "scale": 1.0 }
}"#;

const BAD_MODEL: &str = r#"{
  "case": "I", "d": 1, "r": 1,
  "lambda": 1, "nu": 1, "a": 1, "b": 1, "mu": -1
}"#;

#[test]
fn verify_passes_and_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", LINEAR_MODEL);
    let run = |out: &str| {
        let status = bin()
            .args(["verify", "--config"])
            .arg(&cfg)
            .args([
                "--out",
                &dir.path().join(out).to_string_lossy(),
                "--seed",
                "7",
                "--grid",
                "32",
            ])
            .status()
            .unwrap();
        assert!(status.success(), "verify exited {status:?}");
        fs::read(dir.path().join(out).join("report.json")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "reports differ between identical runs");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"schema\": \"ckem-report/1\""));
    assert!(text.contains("\"verdict\": \"pass\""));
}

#[test]
fn verify_failure_exits_one_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", LINEAR_MODEL);
    let out = dir.path().join("out");
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--out", &out.to_string_lossy(), "--grid", "32"])
        .args(["--tol", "einstein_residual=1e-30"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(text.contains("\"verdict\": \"fail\""));
}

#[test]
fn gamma_mismatched_base_fails_the_base_check() {
    let dir = tempfile::tempdir().unwrap();
    // flat base has γ = 0, the model needs γ = −2
    let cfg = write_config(
        dir.path(),
        "model.json",
        r#"{"case":"I","d":1,"r":1,"lambda":-1,"nu":1,"a":-1,"b":1,"mu":-3,
            "base":{"kind":"flat","scale":1.0}}"#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--out", &out.to_string_lossy(), "--grid", "32"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(text.contains("base_gamma_match"));
}

#[test]
fn perturbed_mu_fails_einstein_certification() {
    let dir = tempfile::tempdir().unwrap();
    // μ = −2.9 instead of −3: still admissible, but the ball base no longer
    // matches γ and the Einstein residual blows up
    let cfg = write_config(
        dir.path(),
        "model.json",
        r#"{"case":"I","d":1,"r":1,"lambda":-1,"nu":1,"a":-1,"b":1,"mu":-2.9,
            "base":{"kind":"ball","scale":1.0}}"#,
    );
    let out = dir.path().join("out");
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--out", &out.to_string_lossy(), "--grid", "32"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let einstein = checks
        .iter()
        .find(|c| c["name"] == "einstein_residual")
        .unwrap();
    assert_eq!(einstein["pass"], false, "{einstein}");
    assert!(einstein["max_abs"].as_f64().unwrap() > 1e-2);
}

#[test]
fn inadmissible_model_exits_two_with_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", BAD_MODEL);
    let output = bin()
        .args(["profile", "--config"])
        .arg(&cfg)
        .args(["--out", &dir.path().to_string_lossy()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("a<0 violated"), "stderr: {err}");
}

#[test]
fn profile_tables_are_deterministic_and_match_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", LINEAR_MODEL);
    let run = |out: &str| {
        let outdir = dir.path().join(out);
        let status = bin()
            .args(["profile", "--config"])
            .arg(&cfg)
            .args([
                "--out",
                &outdir.to_string_lossy(),
                "--grid",
                "200",
                "--seed",
                "3",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        (
            fs::read(outdir.join("profile.csv")).unwrap(),
            fs::read(outdir.join("reconstruction.csv")).unwrap(),
        )
    };
    let (p1, r1) = run("a");
    let (p2, r2) = run("b");
    assert_eq!(p1, p2);
    assert_eq!(r1, r2);

    let text = String::from_utf8(p1).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,phi,dphi,residual_first,residual_second");
    assert_eq!(rows.len(), 201);
    // φ(x) = x on this model
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - cols[0]).abs() <= 1e-8 * (1.0 + cols[0].abs()));
    }
    let rtext = String::from_utf8(r1).unwrap();
    assert!(rtext.starts_with("t,x,F\n"));
}

#[test]
fn rank_two_profile_reaches_the_closing_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", RANK_TWO_MODEL);
    let out = dir.path().join("out");
    let status = bin()
        .args(["profile", "--config"])
        .arg(&cfg)
        .args(["--out", &out.to_string_lossy(), "--grid", "64"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("profile.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[0] - 3.0).abs() < 1e-12, "last x = {}", cols[0]);
    assert!(
        cols[1].abs() < 1e-12,
        "phi at the closing endpoint = {}",
        cols[1]
    );
}

#[test]
fn classify_reports_the_domain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.json", LINEAR_MODEL);
    let out = dir.path().join("out");
    let status = bin()
        .args(["classify", "--config"])
        .arg(&cfg)
        .args(["--out", &out.to_string_lossy()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("classification.json")).unwrap();
    assert!(text.contains("B^r_{L0} (h<1)"), "{text}");
    assert!(text.contains("SmoothClosure"));
    assert!(text.contains("CompleteEnd"));
}

#[test]
fn corollary_tables_and_the_analytic_only_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["corollary", "--id", "1.9", "--out", &out.to_string_lossy()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("corollary_1_9.json")).unwrap();
    assert!(text.contains("\"max_delta_rel\""));

    let status = bin()
        .args(["corollary", "--id", "1.14", "--out", &out.to_string_lossy()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("corollary_1_14.json")).unwrap();
    assert!(text.contains("\"analytic_only\": true"));

    let status = bin()
        .args(["corollary", "--id", "9.9", "--out", &out.to_string_lossy()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
