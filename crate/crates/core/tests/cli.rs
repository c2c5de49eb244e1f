use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn charpar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charpar")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = charpar(&["validate", "--example", "wave"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);

    let parabolic = charpar(&["validate", "--example", "parabolic"]);
    assert_eq!(code(&parabolic), 1);
    let report: Value = serde_json::from_slice(&parabolic.stdout).unwrap();
    let hyp = &report["checks"][0];
    assert_eq!(hyp["name"], "hyperbolicity");
    assert_eq!(hyp["passed"], false);

    let wrong = charpar(&["validate", "--example", "wrong-characteristics"]);
    assert_eq!(code(&wrong), 1);
    let report: Value = serde_json::from_slice(&wrong.stdout).unwrap();
    let chars = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "characteristics").unwrap();
    assert_eq!(chars["passed"], false);
    assert!(chars["detail"]["max_char_residual"][0].as_f64().unwrap() > 0.5);
    assert!(chars["detail"]["residual_witness"][0]["x1"].is_number());
}

#[test]
fn spec_errors_exit_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.spec");
    fs::write(&path, "[equation]\na = 1\nb = 0\nc = -1 +* 2\nf = 0\n").unwrap();
    let out = charpar(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    assert_eq!(code(&charpar(&["validate", "--example", "no-such-example"])), 2);
    assert_eq!(code(&charpar(&["validate", "/definitely/missing.spec"])), 2);
    assert_eq!(code(&charpar(&["frobnicate"])), 2);
    assert_eq!(code(&charpar(&["solve", "--example", "wave"])), 2, "wave has no solver block");
}

#[test]
fn mixed_wave_grid_output() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, rep) = (dir.path().join("u.csv"), dir.path().join("r.json"));
    let out = charpar(&[
        "solve",
        "--example",
        "mixed-wave",
        "--grid",
        "51",
        "--out",
        csv.to_str().unwrap(),
        "--json-report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,u"));
    assert_eq!(lines.count(), 2601);
    assert!(!text.contains('\r'));
    let report = json(&rep);
    assert!(report["max_error"].as_f64().unwrap() <= 1e-9);
    assert_eq!(report["points"], 2601);
}

#[test]
fn darboux_point_value() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = charpar(&[
        "solve",
        "--example",
        "darboux",
        "--points",
        "1,1",
        "--out",
        dir.path().join("u.csv").to_str().unwrap(),
        "--json-report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    // u = x1 x2 - 0.4 (x1² + x2²) for f = 1, α = 1/2, β = 2
    assert!((json(&rep)["value"].as_f64().unwrap() - 0.2).abs() < 1e-8);
}

#[test]
fn free_goursat_takes_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let out = charpar(&[
        "solve",
        "--example",
        "goursat-linear-free",
        "--out",
        dir.path().join("u.csv").to_str().unwrap(),
        "--json-report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&rep);
    assert_eq!(report["iteration"]["iterations"], 1);
    assert!(report["max_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn nonconvergence_exits_one_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("slow.spec");
    let base = charpar::catalog::find("goursat-linear").unwrap().source;
    fs::write(&spec, format!("{base}\n[tolerances]\nmax_picard = 2\n")).unwrap();
    let rep = dir.path().join("r.json");
    let out = charpar(&[
        "solve",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("u.csv").to_str().unwrap(),
        "--json-report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let report = json(&rep);
    assert_eq!(report["converged"], false);
    assert_eq!(report["iteration"]["history"].as_array().unwrap().len(), 2);
}

#[test]
fn check_identity_thresholds() {
    let ok = charpar(&["check-identity", "--example", "variable-speed"]);
    assert_eq!(code(&ok), 0);
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(report["residual"].as_f64().unwrap().abs() < 1e-10);

    let bad = charpar(&["check-identity", "--example", "wave", "--solution", "x1^2"]);
    assert_eq!(code(&bad), 1);

    let probe = charpar(&["check-identity", "--example", "wave", "--solution", "x1^2", "--probe", "--tol", "1"]);
    assert_eq!(code(&probe), 0);
    let report: Value = serde_json::from_slice(&probe.stdout).unwrap();
    assert!((report["probe"]["defect"].as_f64().unwrap() + 0.5).abs() < 1e-4);
}

#[test]
fn solver_grid_output_passes_identity_audit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    let solved = charpar(&["solve", "--example", "mixed-wave", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&solved), 0);
    let audit = charpar(&[
        "check-identity",
        "--example",
        "mixed-wave",
        "--solution-grid",
        csv.to_str().unwrap(),
        "--rect",
        "-0.3,0.2,0.5,1.2",
        "--tol",
        "1e-6",
    ]);
    assert_eq!(code(&audit), 0, "{}", String::from_utf8_lossy(&audit.stdout));
}

#[test]
fn trace_writes_labels_close_to_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, rep) = (dir.path().join("g.csv"), dir.path().join("r.json"));
    let run = || {
        charpar(&[
            "trace",
            "--example",
            "traced-wave",
            "--out",
            csv.to_str().unwrap(),
            "--json-report",
            rep.to_str().unwrap(),
        ])
    };
    assert_eq!(code(&run()), 0);
    let first = fs::read(&csv).unwrap();
    assert_eq!(code(&run()), 0);
    assert_eq!(first, fs::read(&csv).unwrap(), "trace output is not deterministic");
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("x1,x2,gamma1,gamma2\n"));
    assert_eq!(text.lines().count(), 1 + 21 * 21);
    let report = json(&rep);
    for d in report["max_deviation"].as_array().unwrap() {
        assert!(d.as_f64().unwrap() < 1e-8, "{d}");
    }
}

#[test]
fn list_examples_names_every_entry() {
    let out = charpar(&["list-examples"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for e in charpar::catalog::entries() {
        assert!(text.lines().any(|l| l.starts_with(e.name)), "{}", e.name);
    }
}
