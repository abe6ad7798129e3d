use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const ELLIPSOID: &str = r#"{"dimension": 3, "family": "ellipsoid", "Q": [[4,0.3,0],[0.3,1,0.2],[0,0.2,2]]}"#;
const BALL: &str = r#"{"dimension": 3, "family": "ball", "radius": 1.5}"#;
const UNIT_BALL: &str = r#"{"dimension": 3, "family": "ball", "radius": 1}"#;
const TORUS: &str = r#"{"kind": "torus", "R": 2.0, "r": 0.5}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn wulff(args: &[&str], files: &[(&str, &Path)], out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wulff"));
    cmd.args(args);
    for (flag, path) in files {
        cmd.arg(flag).arg(path);
    }
    cmd.arg("--out").arg(out).output().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["check"].as_str().unwrap().to_string(), r["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", "{\n  \"family\": \"ball\",\n  \"radius\": \n}");
    let out = wulff(&["body-info"], &[("--body", &body)], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("body.json:4:"), "{err}");
}

#[test]
fn unknown_keys_and_bad_resolution_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", r#"{"family": "ball", "radius": 1, "colour": 3}"#);
    let out = wulff(&["body-info"], &[("--body", &body)], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let body = write(dir.path(), "ok.json", BALL);
    let out = wulff(&["body-info", "--res", "4"], &[("--body", &body)], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let out = wulff(&["body-info"], &[("--body", &missing)], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn body_info_ellipsoid_and_ball() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", ELLIPSOID);
    let o = dir.path().join("e");
    let out = wulff(&["body-info", "--res", "16"], &[("--body", &body)], &o);
    assert!(out.status.success());
    let report = json(o.join("report.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    let nodes = report["nodes"].as_u64().unwrap() as usize;
    assert_eq!(nodes, 16 * 8);
    let csv = std::fs::read_to_string(o.join("wulff.csv")).unwrap();
    assert_eq!(csv.lines().count(), nodes + 1);

    let body = write(dir.path(), "ball.json", BALL);
    let o = dir.path().join("b");
    assert!(wulff(&["body-info"], &[("--body", &body)], &o).status.success());
    let report = json(o.join("report.json"));
    let min = report["min_hessian_eigenvalue"].as_f64().unwrap();
    assert!((min - 1.5).abs() < 1e-12, "{min}");
}

#[test]
fn surface_report_on_scaled_minkowski_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", ELLIPSOID);
    let surface = write(dir.path(), "s.json", r#"{"kind": "minkowski_sphere", "lambda": 2.0}"#);
    let o = dir.path().join("o");
    let out = wulff(&["surface-report"], &[("--body", &body), ("--surface", &surface)], &o);
    assert!(out.status.success());
    let r = json(o.join("report.json"));
    for key in ["h_m_min", "h_m_max"] {
        assert!((r[key].as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
    assert!((r["functionals"]["isoperimetric_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    let frames = std::fs::read_to_string(o.join("frames.csv")).unwrap();
    let header = frames.lines().next().unwrap();
    assert!(header.starts_with("node,p0,p1,x,y,z,xi_x"));
    assert!(header.ends_with("H_m,K_m,B_m_sq,rho"));
}

#[test]
fn torus_curvature_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", UNIT_BALL);
    let surface = write(dir.path(), "t.json", TORUS);
    let o = dir.path().join("o");
    assert!(wulff(&["surface-report"], &[("--body", &body), ("--surface", &surface)], &o).status.success());
    let r = json(o.join("report.json"));
    // principal curvatures cos φ/(R + r cos φ) ∈ [−2/3, 2/5] and 1/r = 2
    let lo = r["lambda_min"][0].as_f64().unwrap();
    let hi = r["lambda_max"][0].as_f64().unwrap();
    assert!((lo + 2.0 / 3.0).abs() < 1e-8 && (hi - 0.4).abs() < 1e-8, "{lo} {hi}");
    assert!((r["lambda_min"][1].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn functionals_reports_isoperimetric_row() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", ELLIPSOID);
    let surface = write(dir.path(), "t.json", TORUS);
    let o = dir.path().join("o");
    assert!(wulff(&["functionals"], &[("--body", &body), ("--surface", &surface)], &o).status.success());
    let r = json(o.join("report.json"));
    assert!(r["isoperimetric"]["ratio"].as_f64().unwrap() > 1.001);
    let f = &r["functionals"];
    let (a, mixed) = (f["area_minkowski"].as_f64().unwrap(), f["mixed_volume"].as_f64().unwrap());
    assert_eq!(3.0 * mixed, a);
}

#[test]
fn identity_suite_torus_marks_laplacian_rho_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", UNIT_BALL);
    let surface = write(dir.path(), "t.json", TORUS);
    let o = dir.path().join("o");
    let out = wulff(&["identity-suite"], &[("--body", &body), ("--surface", &surface)], &o);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = statuses(&json(o.join("report.json")));
    assert!(rows.contains(&("laplacian_rho".into(), "not_applicable".into())));
    assert!(rows.iter().all(|(_, s)| s != "fail"));
}

#[test]
fn identity_suite_surfaces_corrupted_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(
        dir.path(),
        "body.json",
        r#"{"dimension": 3, "family": "ball", "radius": 1, "debug_corrupt_gradient": 0.01}"#,
    );
    let surface = write(dir.path(), "s.json", r#"{"kind": "round_sphere", "radius": 1.0}"#);
    let o = dir.path().join("o");
    let out = wulff(&["identity-suite"], &[("--body", &body), ("--surface", &surface)], &o);
    assert_eq!(out.status.code(), Some(1));
    let rows = statuses(&json(o.join("report.json")));
    assert!(rows.contains(&("frame_consistency".into(), "fail".into())), "{rows:?}");
}

#[test]
fn variation_check_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", ELLIPSOID);
    let surface = write(dir.path(), "s.json", r#"{"kind": "minkowski_sphere", "lambda": 1.0, "center": [0.1, 0, 0]}"#);
    let specs = [
        r#"{"variation": "birkhoff_normal", "field": {"kind": "random", "seed": 7, "degree": 3}, "orders": [1, 2]}"#,
        r#"{"variation": "birkhoff_normal", "field": {"kind": "translation_component", "v": [1,0,0]}}"#,
        r#"{"variation": "birkhoff_normal", "field": {"kind": "constant", "c": 1.0}}"#,
        r#"{"variation": "scaling"}"#,
        r#"{"variation": "translation", "v": [0, 1, 0]}"#,
    ];
    for (i, spec) in specs.iter().enumerate() {
        let v = write(dir.path(), &format!("v{i}.json"), spec);
        let o = dir.path().join(format!("o{i}"));
        let out = wulff(
            &["variation-check"],
            &[("--body", &body), ("--surface", &surface), ("--variation", &v)],
            &o,
        );
        assert!(out.status.success(), "{spec}\n{}", String::from_utf8_lossy(&out.stdout));
    }
    let bad = write(dir.path(), "bad.json", r#"{"variation": "twist"}"#);
    let out = wulff(
        &["variation-check"],
        &[("--body", &body), ("--surface", &surface), ("--variation", &bad)],
        &dir.path().join("bad"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stability_outputs_and_small_basis() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", ELLIPSOID);
    let surface = write(dir.path(), "s.json", r#"{"kind": "minkowski_sphere", "lambda": 1.0}"#);
    let o = dir.path().join("o");
    let out = wulff(&["stability"], &[("--body", &body), ("--surface", &surface)], &o);
    assert!(out.status.success());
    let s = json(o.join("spectrum.json"));
    assert_eq!(s["near_zero"].as_array().unwrap().len(), 3);
    assert_eq!(s["eigenvalues"].as_array().unwrap().len(), 25);
    let csv = std::fs::read_to_string(o.join("eigenfunctions.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 6 + 25);

    let out = wulff(&["stability", "--basis", "4"], &[("--body", &body), ("--surface", &surface)], &o);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--basis"));
}

#[test]
fn tol_scale_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "body.json", BALL);
    let o = dir.path().join("o");
    assert!(wulff(&["body-info", "--tol-scale", "10"], &[("--body", &body)], &o).status.success());
    let r = json(o.join("report.json"));
    assert_eq!(r["tolerances"]["scale"].as_f64(), Some(10.0));
    assert!((r["tolerances"]["first_variation"].as_f64().unwrap() - 1e-5).abs() < 1e-18);
}
