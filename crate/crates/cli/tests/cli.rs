use std::path::PathBuf;
use std::process::{Command, Output};

fn eindef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eindef"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn list_backgrounds_names_the_catalog() {
    let out = eindef(&["list-backgrounds"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["flat_euclidean", "flat_minkowski", "sphere", "hyperbolic", "de_sitter_static", "schwarzschild"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn passing_suite_exits_zero() {
    let out = eindef(&["verify", "--suite", "complex", "--background", "sphere", "--dim", "2", "--points", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["reports"][0]["background"], "sphere");
    assert_eq!(v["reports"][0]["dim"], 2);
    assert!(v["reports"][0].get("wall_time").is_none());
}

#[test]
fn non_einstein_background_fails_the_complex_property() {
    let out = eindef(&["verify", "--suite", "complex", "--background", &data("non_einstein_2d.metric"), "--points", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let checks = v["reports"][0]["checks"].as_array().unwrap();
    let pk = checks.iter().find(|c| c["name"] == "p_of_killing_vanishes").unwrap();
    assert_eq!(pk["pass"], false);
    assert!(pk["relative"].as_f64().unwrap() > 1e-5);
    let ck = checks.iter().find(|c| c["name"] == "calabi_of_killing_equals_ck_formula").unwrap();
    assert_eq!(ck["pass"], true);
}

#[test]
fn evaluation_failure_is_an_error_not_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("singular.metric");
    std::fs::write(
        &path,
        "name singular\ndim 2\ncoords x y\ng[0][0] = ln(x)\ng[1][1] = 1\ndomain x in (-1, 1)\ndomain y in (-1, 1)\n",
    )
    .unwrap();
    let out = eindef(&["verify", "--suite", "complex", "--background", path.to_str().unwrap(), "--points", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["reports"][0]["checks"][0]["status"], "error");
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(eindef(&["verify", "--suite", "nope"]).status.code(), Some(3));
    assert_eq!(eindef(&["verify", "--background", "torus"]).status.code(), Some(3));
    assert_eq!(eindef(&["verify", "--background", "schwarzschild", "--dim", "3"]).status.code(), Some(3));
    assert_eq!(eindef(&["verify", "--epsilons", "1e-3,1e-2"]).status.code(), Some(3));
    assert_eq!(eindef(&["verify", "--format", "xml"]).status.code(), Some(3));
    assert_eq!(eindef(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(eindef(&["curvature", "--background", "sphere", "--point", "1,2"]).status.code(), Some(3));
    assert_eq!(eindef(&["verify", "--background", "sphere", "--param", "q=1"]).status.code(), Some(3));
    assert_eq!(eindef(&["--help"]).status.code(), Some(0));
    assert_eq!(eindef(&["--version"]).status.code(), Some(0));
}

#[test]
fn output_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = eindef(&[
        "verify", "--suite", "gauge", "--background", "hyperbolic", "--dim", "3", "--points", "3",
        "--format", "csv", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("suite,background,dim,seed,kind,name,status"));
    assert!(lines.next().unwrap().starts_with("gauge,hyperbolic,3,42,check,"));
}

#[test]
fn curvature_of_the_unit_two_sphere() {
    let out = eindef(&["curvature", "--background", "sphere", "--dim", "2", "--point", "1.0,0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["scalar_curvature"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let out = eindef(&["curvature", "--background", "sphere", "--dim", "2", "--point", "1.0,0.5", "--param", "r=2"]);
    assert!((json(&out)["scalar_curvature"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn classify_certificates() {
    let out = eindef(&["classify", "--background", "schwarzschild", "--points", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v[0]["is_einstein"], true);
    assert_eq!(v[0]["is_constant_curvature"], false);
    let out = eindef(&["classify", "--background", &data("non_einstein_3d.metric"), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>() == ["is_einstein", "false"]));
}

#[test]
fn reports_are_deterministic() {
    let args = ["verify", "--suite", "perturbation", "--background", "sphere", "--points", "3", "--seed", "7"];
    let a = eindef(&args);
    let b = eindef(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = eindef(&["verify", "--suite", "perturbation", "--background", "sphere", "--points", "3", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

/// Same shape and verdicts; numbers agree except where both sit at roundoff.
fn assert_matches(got: &serde_json::Value, want: &serde_json::Value, path: &str) {
    use serde_json::Value::*;
    match (got, want) {
        (Object(a), Object(b)) => {
            assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>(), "{path}");
            for (k, v) in b {
                assert_matches(&a[k], v, &format!("{path}.{k}"));
            }
        }
        (Array(a), Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert_matches(x, y, &format!("{path}[{i}]"));
            }
        }
        (Number(x), Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            let tiny = x.abs() < 1e-9 && y.abs() < 1e-9;
            assert!(tiny || (x - y).abs() <= 1e-6 * x.abs().max(y.abs()), "{path}: {x} vs {y}");
        }
        _ => assert_eq!(got, want, "{path}"),
    }
}

#[test]
fn golden_report() {
    let golden: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "docs", "report-example.json"].iter().collect();
    let want: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(golden).unwrap()).unwrap();
    let out = eindef(&["verify", "--suite", "all", "--background", "sphere", "--dim", "2", "--points", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_matches(&json(&out), &want, "$");
}
