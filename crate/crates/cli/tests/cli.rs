use std::process::{Command, Output};

use serde_json::Value;

fn permspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = permspec(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn strip_timing(stdout: &[u8]) -> String {
    String::from_utf8(stdout.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timing_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn single_eigenangle_moments() {
    let v = json(&[
        "exact-moments", "--n", "1", "--theta", "1", "--alpha", "0.2", "--beta", "0.7", "--model",
        "mod",
    ]);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "exact-moments");
    let m = &v["results"]["moments"][0];
    assert!((m["mean"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((m["variance"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(v["timing_ms"].is_u64());
}

#[test]
fn independent_irrational_constant() {
    let v = json(&["constants", "--case", "both-irrational-independent"]);
    let row = &v["results"]["constants"][0];
    assert!((row["c2_closed"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-15);
    assert!((row["c2_numeric"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-2);
}

#[test]
fn constants_from_tokens() {
    let v = json(&["constants", "--alpha", "rat:1/3", "--beta", "rat:3/4", "--n", "1200"]);
    let row = &v["results"]["constants"][0];
    assert_eq!(row["case"], "both-rational");
    // one-period sum over 12 divides 1200, so the partial average is exact
    let closed = row["c2_closed"].as_f64().unwrap();
    assert!((row["c2_numeric"].as_f64().unwrap() - closed).abs() < 1e-12);
    let out = permspec(&["constants", "--case", "rational-alpha", "--alpha", "irr:e", "--beta", "irr:golden"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identities_all_pass() {
    let v = json(&["identities", "--n", "500", "--theta", "0.7"]);
    let rows = v["results"]["identities"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!(r["pass"], true, "{r}");
    }
    assert!(v["results"]["max_relative_gap"].as_f64().unwrap() < 1e-8);
}

#[test]
fn usage_errors_exit_two() {
    let out = permspec(&["clt", "--n", "10", "--alpha", "0.1", "--beta", "0.4", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    // stochastic commands refuse to run without a seed
    let out = permspec(&["spacings", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = permspec(&["mesoscopic", "--seed", "1", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = permspec(&["exact-moments", "--n", "5", "--alpha", "0.7", "--beta", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn runtime_errors_exit_one() {
    // a full-circle arc has zero variance
    let out = permspec(&["clt", "--n", "50", "--alpha", "0.25", "--beta", "1.25", "--seed", "3", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["sample", "--n", "200", "--seed", "42", "--trials", "50", "--arcs", "0.1,0.6;rat:1/3,irr:e", "--model", "mod"];
    let a = permspec(&args);
    let b = permspec(&args);
    assert!(a.status.success());
    assert_eq!(strip_timing(&a.stdout), strip_timing(&b.stdout));
    let other = permspec(&["sample", "--n", "200", "--seed", "43", "--trials", "50"]);
    assert_ne!(strip_timing(&a.stdout), strip_timing(&other.stdout));
}

#[test]
fn config_echo_is_exact() {
    let v = json(&["coupling-check", "--n", "300", "--theta", "0.7", "--seed", "9", "--trials", "20", "--epsilon-tail", "0.0025"]);
    let echo = &v["config_echo"];
    assert_eq!(echo["theta"].as_f64().unwrap().to_bits(), 0.7f64.to_bits());
    assert_eq!(echo["epsilon_tail"].as_f64().unwrap().to_bits(), 0.0025f64.to_bits());
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["trials"], 20);
    assert_eq!(echo["n"], 300);
}

#[test]
fn csv_round_trips_json_values() {
    let base = ["clt", "--n", "400", "--arcs", "irr:sqrt2,irr:golden;0.05,0.3", "--seed", "5", "--trials", "40", "--model", "mod"];
    let v = json(&base);
    let matrix = &v["results"]["matrix"];
    let values: Vec<f64> = matrix["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();

    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let out = permspec(&args);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["trial", "z_0", "z_1"]);
    let mut parsed = Vec::new();
    for (t, rec) in reader.records().enumerate() {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<usize>().unwrap(), t);
        parsed.push(rec[1].parse::<f64>().unwrap());
        parsed.push(rec[2].parse::<f64>().unwrap());
    }
    assert_eq!(parsed.len(), values.len());
    for (a, b) in parsed.iter().zip(&values) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn csv_per_size_rows() {
    let out = permspec(&["spacings", "--n-list", "50,100", "--seed", "1", "--trials", "30", "--format", "csv"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "n");
    assert!(header.iter().any(|h| h == "n2_d_q95"));
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][0], "100");

    let out = permspec(&["mesoscopic", "--n-list", "1000,4000", "--seed", "2", "--trials", "20", "--model", "mod", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,delta,log_n_delta,exact_mean,exact_variance,target,ratio\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn sample_counts_match_structure() {
    let v = json(&["sample", "--n", "30", "--seed", "8", "--trials", "25", "--alpha", "rat:0", "--beta", "rat:1"]);
    for t in v["results"]["trials"].as_array().unwrap() {
        let total: u64 = t["cycle_type"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p[0].as_u64().unwrap() * p[1].as_u64().unwrap())
            .sum();
        assert_eq!(total, 30);
        // the full circle (0, 1] holds every eigenvalue
        assert_eq!(t["counts"][0], 30);
    }
}
