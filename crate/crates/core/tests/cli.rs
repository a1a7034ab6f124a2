mod common;

use std::process::{Command, Output};

use common::models_dir;
use serde_json::Value;
use topical::metrics::hilbert_metric;
use topical::{parse, PointMul};

fn topical(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topical"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model_path(name: &str) -> String {
    models_dir().join(format!("{name}.tfn")).display().to_string()
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn check_example2() {
    let out = topical(&["check", &model_path("eq-example2")]);
    assert_eq!(out.status.code(), Some(0));
    let js = &json_lines(&out)[0];
    assert_eq!(js["strongly_connected"], false);
    assert_eq!(js["indecomposable"], true);
    assert_eq!(js["stabilized_at"], 4);
    assert_eq!(js["witness"], Value::Null);
}

#[test]
fn check_identity_reports_witness() {
    let out = topical(&["check", &model_path("identity2")]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["indecomposable"], false);
    assert_eq!(js["witness"]["I"], serde_json::json!([1]));
    assert_eq!(js["witness"]["J"], serde_json::json!([2]));
    assert!(js["verdict"].as_str().unwrap().starts_with("decomposable, witness"));
}

#[test]
fn eigen_example2() {
    let out = topical(&["eigen", &model_path("eq-example2")]);
    assert_eq!(out.status.code(), Some(0));
    let js = &json_lines(&out)[0];
    assert_eq!(js["status"], "converged");
    assert!((js["eigenvalue_multiplicative"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    let v = PointMul::new(vec_of(&js["eigenvector_multiplicative"])).unwrap();
    let u = PointMul::new(vec![1.0, 2.0, 8.0, 4.0]).unwrap();
    assert!(hilbert_metric(&v, &u).unwrap() < 1e-8);
    assert_eq!(vec_of(&js["eigenvector_additive"]).len(), 4);
    for key in ["eigenvalue_additive", "residual_sup", "iterations", "cw_lower", "cw_upper"] {
        assert!(js.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn eigen_exit_codes() {
    let out = topical(&["eigen", &model_path("jordan")]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no boundedness certificate at horizon"));
    assert!(!err.to_lowercase().contains("no eigenvector"));
    assert_ne!(json_lines(&out)[0]["status"], "converged");

    for name in ["eq-example2", "eq-xunq", "e-gex", "e-ill", "e-ill2", "eq-example", "swap", "identity2"] {
        assert_eq!(topical(&["eigen", &model_path(name)]).status.code(), Some(0), "{name}");
    }
}

#[test]
fn graph_dot_for_identity() {
    let out = topical(&["graph", &model_path("identity2"), "--dot"]);
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8_lossy(&out.stdout);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("[label=").count(), 2);
    assert_eq!(dot.matches("->").count(), 2);
    assert!(dot.contains("v1 -> v1;") && dot.contains("v2 -> v2;"));
}

#[test]
fn graph_json_lists_components() {
    let out = topical(&["graph", &model_path("eq-example")]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["associated"]["scc"], serde_json::json!([[1], [2], [3, 4]]));
    assert_eq!(js["syntactic"]["strongly_connected"], true);
    assert_eq!(js["dual"]["scc"], serde_json::json!([[1], [2, 3], [4]]));
}

#[test]
fn aggregate_tower() {
    let out = topical(&["aggregate", &model_path("eq-example")]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["stabilized_at"], 4);
    assert_eq!(js["levels"][1]["vertices"][2]["sigma"], serde_json::json!([3, 4]));
    let dot = topical(&["aggregate", &model_path("eq-example"), "--dot"]);
    assert_eq!(String::from_utf8_lossy(&dot.stdout).matches("digraph").count(), 4);
}

#[test]
fn several_files_give_json_lines_in_order() {
    let names = ["eq-example2", "eq-xunq", "swap", "e-gex", "e-ill2"];
    let paths: Vec<String> = names.iter().map(|n| model_path(n)).collect();
    let mut args = vec!["cycletime"];
    args.extend(paths.iter().map(String::as_str));
    let serial = topical(&args);
    args.extend(["--jobs", "3"]);
    let parallel = topical(&args);
    assert_eq!(serial.stdout, parallel.stdout);
    let lines = json_lines(&serial);
    assert_eq!(lines.len(), names.len());
    for (line, path) in lines.iter().zip(&paths) {
        assert_eq!(line["file"], path.as_str());
    }
    let ln2 = 2f64.ln();
    assert!((lines[0]["chi_upper_est"].as_f64().unwrap() - ln2).abs() < 1e-9);
}

#[test]
fn output_is_deterministic() {
    for cmd in ["eigen", "cw", "slice-cert"] {
        let a = topical(&[cmd, &model_path("e-gex"), "--seed", "11"]);
        let b = topical(&[cmd, &model_path("e-gex"), "--seed", "11"]);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn recession_prints_function_and_certificate() {
    let out = topical(&["recession", &model_path("e-ill2")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let (dsl, json) = text.split_at(text.find('{').unwrap());
    assert_eq!(parse(dsl).unwrap(), parse(&std::fs::read_to_string(model_path("e-ill")).unwrap()).unwrap());
    let js: Value = serde_json::from_str(json.trim()).unwrap();
    assert_eq!(js["bounded_certified"], true);

    let out = topical(&["slice-cert", &model_path("identity2")]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["bounded_certified"], false);
    assert_eq!(js["witness"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn cw_uses_eigenvector_anchor() {
    let out = topical(&["cw", &model_path("eq-example2"), "--samples", "10"]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["eigenvector_anchor"], true);
    assert!((js["cw_upper"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-9);
}

#[test]
fn diameter_and_membership() {
    let out = topical(&["diameter", &model_path("swap"), "--lambda", "1"]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["bounded"], true);
    let b = js["bound"].as_f64().unwrap();
    assert!((1.0..=2.0).contains(&b));

    let out = topical(&["diameter", &model_path("identity2"), "--lambda", "1"]);
    assert_eq!(json_lines(&out)[0]["bounded"], false);

    let out = topical(&["membership", &model_path("e-ill"), "--point", "13.8,0,0", "--lambda", "0"]);
    let js = &json_lines(&out)[0];
    assert_eq!(js["in_super"], true);
    assert_eq!(js["in_sub"], Value::Null);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tfn");
    std::fs::write(&bad, "dim 2\n1: max(x1, -1*x2)\n2: x2\n").unwrap();
    let out = topical(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:"));

    assert_eq!(topical(&["eigen", "--k-max", "0", &model_path("swap")]).status.code(), Some(2));
    assert_eq!(topical(&["cw", &model_path("swap"), "--dot"]).status.code(), Some(2));
    assert_eq!(topical(&["eigen", &model_path("swap"), "--json", "--dot"]).status.code(), Some(2));
    assert_eq!(topical(&["unknown", &model_path("swap")]).status.code(), Some(2));
    assert_eq!(topical(&["membership", &model_path("swap"), "--point", "0,0"]).status.code(), Some(2));
}
