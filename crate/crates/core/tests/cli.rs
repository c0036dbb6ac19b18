//! End-to-end tests of the command-line front end: dispatch, exit codes,
//! and the determinism contract of the serialized reports.

use std::process::{Command, Output};

fn meanfreq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanfreq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn resonance_round_table() {
    let out = meanfreq(&[
        "resonance",
        "--n",
        "3",
        "-L",
        "6.2831853",
        "--max-degree",
        "100",
    ]);
    let v = stdout_json(&out);
    let row = &v["rows"][0];
    let alpha = row["alpha_bar"].as_f64().unwrap();
    assert!(
        (alpha - 2.0 / std::f64::consts::PI).abs() < 1e-4,
        "alpha_bar = {alpha}"
    );
    assert!(row["max_deviation"].as_f64().unwrap() <= 3.0);
    assert_eq!(row["verdict"].as_bool(), Some(true));
}

#[test]
fn frequency_ellipsoid_bounds() {
    let out = meanfreq(&[
        "frequency",
        "--model",
        r#"{"kind":"ellipsoid","axes":[1,1.2,1.5]}"#,
        "--ellipse",
        "0,1",
        "--periods",
        "50",
    ]);
    let v = stdout_json(&out);
    let row = &v["rows"][0];
    let alpha = row["alpha_bar"].as_f64().unwrap();
    assert!(alpha > 0.17684 && alpha < 0.25465, "alpha_bar = {alpha}");
    assert_eq!(row["verdict"].as_bool(), Some(true));
}

#[test]
fn frequency_katok_reference() {
    let out = meanfreq(&[
        "frequency",
        "--model",
        r#"{"kind":"katok","n":3,"epsilon":0.4142135623}"#,
    ]);
    let v = stdout_json(&out);
    let row = &v["rows"][0];
    assert_eq!(row["count"].as_i64(), Some(4));
    let alpha = row["alpha_bar"].as_f64().unwrap();
    assert!((alpha - 2.0 / std::f64::consts::PI).abs() < 1e-10);
    assert_eq!(row["verdict"].as_bool(), Some(true));
}

#[test]
fn verify_sturm_passes() {
    let out = meanfreq(&["verify", "sturm", "--trials", "25", "--seed", "7"]);
    let v = stdout_json(&out);
    assert_eq!(v["metadata"]["pass"].as_bool(), Some(true));
    assert_eq!(v["rows"].as_array().unwrap().len(), 25);
}

#[test]
fn invalid_model_exits_2() {
    let out = meanfreq(&["frequency", "--model", r#"{"kind":"torus"}"#]);
    assert_eq!(out.status.code(), Some(2));
    let out = meanfreq(&["frequency", "--model", "not json at all"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_output_bytes() {
    let args = ["verify", "star", "--trials", "4", "--seed", "11"];
    let a = meanfreq(&args);
    let b = meanfreq(&args);
    assert!(a.status.success());
    assert_eq!(
        a.stdout, b.stdout,
        "identical command + seed => identical bytes"
    );
}

#[test]
fn ring_csv_shape() {
    let out = meanfreq(&[
        "ring",
        "--n",
        "3",
        "-L",
        "6.283185307179586",
        "--max-degree",
        "30",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "class,degree,critical_level,dual_class");
    assert!(lines.len() > 5);
    assert!(lines.iter().any(|l| l.starts_with("U,")));
    // byte-identical on repeat
    let again = meanfreq(&[
        "ring",
        "--n",
        "3",
        "-L",
        "6.283185307179586",
        "--max-degree",
        "30",
        "--format",
        "csv",
    ]);
    assert_eq!(text.as_bytes(), &again.stdout[..]);
}

#[test]
fn out_file_written() {
    let dir = std::env::temp_dir().join("meanfreq-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sep.json");
    let out = meanfreq(&[
        "separation",
        "--mu",
        "2.0",
        "--lambda",
        "1.05",
        "--m",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["metadata"]["threshold"].as_f64(), Some(1.0625));
    assert_eq!(v["metadata"]["separated"].as_bool(), Some(true));
}

#[test]
fn resonance_mod_p_coefficients() {
    let out = meanfreq(&[
        "resonance",
        "--n",
        "4",
        "-L",
        "6.2831853",
        "--max-degree",
        "400",
        "--coefficients",
        "mod5",
    ]);
    let v = stdout_json(&out);
    let row = &v["rows"][0];
    assert_eq!(row["verdict"].as_bool(), Some(true));
    let alpha = row["alpha_bar"].as_f64().unwrap();
    assert!((alpha - 6.0 / 6.2831853).abs() < 1e-6, "alpha_bar = {alpha}");
    // composite modulus rejected as invalid input
    let out = meanfreq(&[
        "resonance", "--n", "4", "-L", "6.28", "--max-degree", "400", "--coefficients", "mod6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ellipsoid_chain_report() {
    let out = meanfreq(&[
        "ellipsoid",
        "--model",
        r#"{"kind":"ellipsoid","axes":[1,1.2,1.5]}"#,
        "--periods",
        "20",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["metadata"]["chain_ok"].as_bool(), Some(true));
    assert_eq!(v["metadata"]["alpha1_lt_alpha3"].as_bool(), Some(true));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert_eq!(row["verdict"].as_bool(), Some(true));
        let a = row["alpha_bar"].as_f64().unwrap();
        assert!(a > row["lower"].as_f64().unwrap());
        assert!(a < row["upper"].as_f64().unwrap());
    }
}

#[test]
fn perturb_scan_verdict() {
    let out = meanfreq(&[
        "perturb",
        "--base-curvature",
        "1.0",
        "--s-grid",
        "0,0.1,0.2",
        "--periods",
        "12",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["metadata"]["verdict"].as_str(), Some("index-increasing"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn model_file_path_accepted() {
    let dir = std::env::temp_dir().join("meanfreq-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    std::fs::write(&path, r#"{"kind":"round","n":3,"K":1.0}"#).unwrap();
    let out = meanfreq(&["frequency", "--model", path.to_str().unwrap()]);
    let v = stdout_json(&out);
    let alpha = v["rows"][0]["alpha_bar"].as_f64().unwrap();
    assert!((alpha - 2.0 / std::f64::consts::PI).abs() < 1e-12);
}
