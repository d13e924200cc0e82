use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn focusopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focusopt"))
        .args(args)
        .env_remove("FOCUSOPT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .filter(|l| !l.starts_with("half_max_radius"))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn footer(text: &str) -> Option<f64> {
    let line = text.lines().find(|l| l.starts_with("half_max_radius,"))?;
    line.split_once(',').unwrap().1.parse().ok()
}

fn schema(name: &str) -> jsonschema::Validator {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs");
    let load = |f: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap() };
    let config = jsonschema::Resource::from_contents(load("config.schema.json")).unwrap();
    jsonschema::options()
        .with_resource("urn:focusopt:config", config)
        .build(&load(name))
        .unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn lambda_surface_normalization_at_pi() {
    let out = focusopt(&["lambda", "--kmax", "0", "--r-min", &PI.to_string(), "--r-max", "4", "--r-step", "10", "--convention", "surface"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["R", "lambda_0"]);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 1.0).abs() < 1e-11);
}

#[test]
fn lambda_humps_move_right_with_degree() {
    let out = focusopt(&["lambda", "--convention", "surface", "--r-step", "0.01"]);
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header.len(), 5);
    // Λ only grows; its humps are the first local maxima of the increments.
    let peak = |col: usize| {
        let inc: Vec<f64> = rows.windows(2).map(|w| w[1][col] - w[0][col]).collect();
        let i = (1..inc.len() - 1).find(|&i| inc[i] > inc[i - 1] && inc[i] >= inc[i + 1]).unwrap();
        rows[i + 1][0]
    };
    let peaks: Vec<f64> = (1..=4).map(peak).collect();
    assert!(peaks.windows(2).all(|w| w[0] < w[1]), "{peaks:?}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = focusopt(&["lambda", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("R,lambda_0,lambda_1,lambda_2,lambda_3\n"));
    assert!(text.lines().nth(1).unwrap().split(',').all(|c| c.len() >= 18 && c.contains('e')));
}

#[test]
fn density_footers_and_limit() {
    let scalar = stdout(&focusopt(&["density", "--mode", "scalar"]));
    let r = footer(&scalar).unwrap();
    assert!((r - 2.0).abs() <= 0.2, "{r}");
    let (header, rows) = csv_rows(&scalar);
    assert_eq!(header, ["R", "density"]);
    assert!((rows[0][1] / (4.0 * PI) - 1.0).abs() < 0.1);
    let maxwell = stdout(&focusopt(&["density", "--mode", "maxwell"]));
    let r = footer(&maxwell).unwrap();
    assert!((r - 1.9).abs() <= 0.2 && r < 1.9, "{r}");
    let short = stdout(&focusopt(&["density", "--r-max", "1"]));
    assert!(short.ends_with("half_max_radius,\n"));
    let out = focusopt(&["density", "--r-min", "1e-4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn crossings_report() {
    let out = focusopt(&["crossings"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("crossings.schema.json"), &doc);
    let scalar = doc["scalar_crossing"]["root"].as_f64().unwrap();
    let criterion = doc["criterion_crossing"]["root"].as_f64().unwrap();
    assert!(scalar > 3.0 && scalar < 3.3, "{scalar}");
    assert!(criterion > 2.3 && criterion < 2.7, "{criterion}");

    let out = focusopt(&["crossings", "--r-max", &(PI / 2.0).to_string()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["scalar_crossing"]["root"].is_null());
    assert!(doc["criterion_crossing"]["root"].is_null());
    assert_eq!(doc["scalar_crossing"]["brackets"].as_array().unwrap().len(), 0);
}

#[test]
fn verify_report_matches_schema() {
    let out = focusopt(&["verify"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("verify.schema.json"), &doc);
    let passed = doc["passed"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if passed { 0 } else { 1 }));
    let status = |id: &str| -> String {
        let checks = doc["checks"].as_array().unwrap();
        let c = checks.iter().find(|c| c["id"] == id).unwrap();
        c["status"].as_str().unwrap().to_string()
    };
    for id in ["specfun.cross_validation", "oracle.scalar_spectrum", "oracle.maxwell_top_ell_rotate", "oracle.perturbation_violations"] {
        assert_eq!(status(id), "pass", "{id}");
    }
}

#[test]
fn verify_flags_a_wrong_prefactor() {
    let out = focusopt(&["verify", "--convention", "surface"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let check = doc["checks"].as_array().unwrap().iter().find(|c| c["id"] == "oracle.scalar_spectrum").unwrap();
    assert_eq!(check["status"], "fail");
    let ratio = check["observed"].as_f64().unwrap();
    assert!((ratio - (PI / 2.0).sqrt()).abs() < 1e-6, "{ratio}");
}

#[test]
fn coarse_grid_is_an_accuracy_error() {
    let out = focusopt(&["verify", "--resolution", "8", "--r-max", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("accuracy error"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["lambda", "--r-min", "0"][..],
        &["lambda", "--r-step", "-0.1"],
        &["lambda", "--resolution", "4"],
        &["lambda", "--convention", "other"],
        &["nonsense"],
    ] {
        assert_eq!(focusopt(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn environment_fills_in_missing_flags() {
    let run = |env: &[(&str, &str)], args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_focusopt"));
        cmd.args(args);
        for (k, v) in env {
            cmd.env(k, v);
        }
        String::from_utf8(cmd.output().unwrap().stdout).unwrap()
    };
    let env_only = run(&[("FOCUSOPT_KMAX", "1"), ("FOCUSOPT_R_MAX", "0.2")], &["lambda"]);
    assert!(env_only.starts_with("R,lambda_0,lambda_1\n"));
    assert_eq!(env_only.lines().count(), 5);
    let flag_wins = run(&[("FOCUSOPT_KMAX", "1"), ("FOCUSOPT_R_MAX", "0.2")], &["lambda", "--kmax", "2"]);
    assert!(flag_wins.starts_with("R,lambda_0,lambda_1,lambda_2\n"));
}

#[test]
fn unwritable_output_is_reported() {
    let out = focusopt(&["lambda", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent-dir/x.csv"));
}

#[test]
fn table_json_matches_schema() {
    let out = focusopt(&["density", "--format", "json", "--r-step", "0.5"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("table.schema.json"), &doc);
    assert!(doc["footer"]["half_max_radius"].is_number());
    let bad = serde_json::json!({"config": doc["config"], "columns": [], "rows": [], "footer": {}});
    assert!(!schema("table.schema.json").is_valid(&bad));
}

fn field(args: &[&str], points: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.txt");
    std::fs::write(&path, points).unwrap();
    let mut all = vec!["field", "--points", path.to_str().unwrap()];
    all.extend_from_slice(args);
    let out = focusopt(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

#[test]
fn field_samples() {
    let text = field(&["--density", "ell"], "0,0,0\n");
    let (header, rows) = csv_rows(&text);
    assert_eq!(header.len(), 3 + 6 + 1 + 6);
    assert!((rows[0][3] - 8.0 * PI / 3.0).abs() < 1e-11);
    assert!(rows[0][5].abs() < 1e-12 && rows[0][7].abs() < 1e-12);

    let text = field(&["--density", "constant"], &format!("0 0 {PI}\n"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["x0", "x1", "x2", "e0_re", "e0_im", "abs_e"]);
    assert!(rows[0][5] < 1e-12);

    let text = field(&["--density", "harmonic", "--k", "1"], "0.5 0 0\n");
    assert_eq!(csv_rows(&text).1[0].len(), 6);
    let text = field(&["--density", "masked", "--band", "0.2"], "0 0 0\n");
    let e0 = csv_rows(&text).1[0][9];
    assert!(e0 > 0.0 && e0 < (8.0 * PI / 3.0).sqrt());
}

#[test]
fn far_field_sample_matches_the_fitted_profile() {
    use focusopt::fields::{far_field_check, TangentDensity};
    use focusopt::quadrature::sphere_grid;
    let grid = std::sync::Arc::new(sphere_grid(3, 420).unwrap());
    let fit = far_field_check(&TangentDensity::ell(grid), 100.0).unwrap();
    let text = field(&["--density", "ell", "--resolution", "420"], "0 100 0\n");
    let magnitude = csv_rows(&text).1[0][9];
    let predicted = fit.amplitude * 100f64.sin().abs() / 100.0;
    assert!((magnitude / predicted - 1.0).abs() < 0.03, "{magnitude} vs {predicted}");
}

#[test]
fn bad_points_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    std::fs::write(&path, "0 0 0\n# ok\n1 2\n").unwrap();
    let out = focusopt(&["field", "--points", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
