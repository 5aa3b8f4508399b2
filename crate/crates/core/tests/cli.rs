use std::process::{Command, Output};

use serde_json::Value;

fn cohwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohwit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_exit_codes() {
    let o = cohwit(&["certify", "--space", "P0,X01", "--values", "0.2,0.6"]);
    assert_eq!(o.status.code(), Some(10));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdict"], "nonclassical");
    assert!(doc["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["direction"].as_array().unwrap().len(), 2);

    assert_eq!(cohwit(&["certify", "--space", "X01", "--values", "0.5"]).status.code(), Some(0));
    assert_eq!(cohwit(&["certify", "--space", "X01", "--values", "-0.5"]).status.code(), Some(0));
    assert_eq!(cohwit(&["certify", "--space", "P0,P1", "--values", "0.6,0.6"]).status.code(), Some(11));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = cohwit(&["certify", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    assert_eq!(cohwit(&["certify", "--space", "P0,X01", "--values", "0.2"]).status.code(), Some(2));
    assert_eq!(cohwit(&["bound", "--space", "Q7"]).status.code(), Some(2));
    assert_eq!(cohwit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cohwit(&["--help"]).status.code(), Some(0));
}

#[test]
fn certify_reads_json_input_and_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.json");
    let output = dir.path().join("out.json");
    std::fs::write(&input, r#"{"space": "P0,X01", "values": [0.2, 0.6]}"#).unwrap();
    let o = cohwit(&["certify", "--input", input.to_str().unwrap(), "--output", output.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc["space"], "P0,X01");
    assert_eq!(doc["verdict"], "nonclassical");
}

#[test]
fn bounds_print_six_decimals() {
    assert_eq!(stdout(&cohwit(&["bound", "--space", "X01"])).trim(), "0.857764");
    assert_eq!(stdout(&cohwit(&["bound", "--space", "X02"])).trim(), "0.520260");
    assert_eq!(stdout(&cohwit(&["bound", "--space", "X12"])).trim(), "0.579709");
    assert_eq!(stdout(&cohwit(&["bound", "--space", "P0,X01", "--at", "P0=1"])).trim(), "0.000000");
    let at = stdout(&cohwit(&["bound", "--space", "P0,X01", "--at", "P0=0.5"]));
    let expected = 2.0 * 0.5 * (2f64.ln()).sqrt();
    assert!((at.trim().parse::<f64>().unwrap() - expected).abs() < 1e-6);
}

#[test]
fn support_reports_both_sets() {
    let o = cohwit(&["support", "--space", "P0,P1", "--direction", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((doc["h_classical"].as_f64().unwrap() - (-1f64).exp()).abs() < 1e-9);
    assert!((doc["h_quantum"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--family", "zero-one", "--space", "P0,X01", "--grid", "11x6", "--nbar-range", "0:0.5"];
    let a = cohwit(&args);
    let b = cohwit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,space,T,nbar,margin,verdict");
    assert_eq!(lines.len(), 1 + 11 * 6);
    assert!(lines.iter().any(|l| l.ends_with(",nonclassical")));
}

#[test]
fn sweep_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    let o = cohwit(&["sweep", "--family", "zero-two", "--space", "P0,X02", "--grid", "5", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["family"], "zero-two");
    assert_eq!(doc["points"].as_array().unwrap().len(), 25);
}

fn curve_rows(args: &[&str]) -> Vec<Vec<f64>> {
    let o = cohwit(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(3).map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn coherent_curve_lies_on_the_boundary() {
    for row in curve_rows(&["curve", "--family", "coherent", "--space", "P0,P1", "--samples", "25"]) {
        let (mu, p0, p1) = (row[0], row[1], row[2]);
        assert!((p0 - (-mu).exp()).abs() < 1e-9);
        assert!((p1 - mu * (-mu).exp()).abs() < 1e-9);
    }
    // P2 = P1^2 / (2 P0) along the curve
    for row in curve_rows(&["curve", "--family", "coherent", "--space", "P1,P2", "--samples", "25", "--mu-max", "5"]) {
        let (mu, p1, p2) = (row[0], row[1], row[2]);
        assert!((p2 - p1 * p1 / (2.0 * (-mu).exp())).abs() < 1e-9);
    }
}

#[test]
fn threshold_command_reports_the_zero_one_transition() {
    let o = cohwit(&["threshold", "--family", "zero-one", "--space", "P0,X01"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["parameter"], "T");
    assert!((doc["critical"].as_f64().unwrap() - 0.733).abs() < 0.002);
}
