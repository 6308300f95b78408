use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn infocost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infocost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const BINARY: &str = r#"{"states":["a","b"],"signals":["x","y"],"probs":[[0.8,0.2],[0.2,0.8]]}"#;
const UNIT_BETA: &str = r#"{"rule":"constant","value":1}"#;

#[test]
fn cost_of_binary_experiment() {
    let dir = TempDir::new().unwrap();
    let exp = write(dir.path(), "e.json", BINARY);
    let beta = write(dir.path(), "b.json", UNIT_BETA);
    let out = dir.path().join("cost.json");
    let run = infocost(&[
        "cost",
        "--experiment",
        exp.to_str().unwrap(),
        "--beta",
        beta.to_str().unwrap(),
        "--prior",
        "0.5,0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    // 2 · (0.6 ln 4)
    let expected = 1.2 * 4f64.ln();
    assert!((report["cost"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!((report["cost"].as_f64().unwrap() - 1.663553).abs() < 1e-6);
    assert_eq!(report["pairs"].as_array().unwrap().len(), 2);
    assert!(report["via_posteriors"]["delta"].as_f64().unwrap() < 1e-9);
}

#[test]
fn cost_csv_and_uninformative() {
    let dir = TempDir::new().unwrap();
    let exp = write(
        dir.path(),
        "e.json",
        r#"{"states":["a","b"],"signals":["x","y"],"probs":[[0.3,0.7],[0.3,0.7]]}"#,
    );
    let beta = write(dir.path(), "b.json", UNIT_BETA);
    let out = dir.path().join("cost.csv");
    let run = infocost(&[
        "cost",
        "--experiment",
        exp.to_str().unwrap(),
        "--beta",
        beta.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("from,to,beta,kl,contribution\n"));
    assert!(text.ends_with("cost,,,,0\n"));
}

#[test]
fn bad_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let exp = write(
        dir.path(),
        "e.json",
        r#"{"states":["a","b"],"signals":["x","y"],"probs":[[0.8,0.2],[0.0,1.0]]}"#,
    );
    let beta = write(dir.path(), "b.json", UNIT_BETA);
    let run = infocost(&[
        "cost",
        "--experiment",
        exp.to_str().unwrap(),
        "--beta",
        beta.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("not strictly positive"));

    let garbage = write(dir.path(), "g.json", "{not json");
    let run = infocost(&[
        "cost",
        "--experiment",
        garbage.to_str().unwrap(),
        "--beta",
        beta.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn reproduce_gdp() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("gdp.csv");
    assert!(
        infocost(&["reproduce", "gdp", "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    let rows = csv_rows(&out);
    assert_eq!(rows[0][0], "H1");
    let h1: f64 = rows[0][1].parse().unwrap();
    let h2: f64 = rows[1][1].parse().unwrap();
    assert!((21.0..23.5).contains(&h1), "{h1}");
    assert!((147_900.0..148_200.0).contains(&h2), "{h2}");
}

#[test]
fn reproduce_coinflip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("coin.csv");
    assert!(infocost(&[
        "reproduce",
        "coinflip",
        "--k",
        "30",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 30);
    let llr: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let mi: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!((mi[0] - 0.192745).abs() < 1e-6);
    for k in 1..30 {
        assert!((llr[k] - (k + 1) as f64 * llr[0]).abs() < 1e-6 * llr[k]);
        assert!(mi[k] > mi[k - 1] && mi[k] < 2f64.ln());
    }
    for k in 1..29 {
        assert!(mi[k + 1] - mi[k] <= mi[k] - mi[k - 1]);
    }
}

#[test]
fn reproduce_swans() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("swans.csv");
    assert!(infocost(&[
        "reproduce",
        "swans",
        "--epsilon",
        "1e-4",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    let ratio: f64 = rows[0][3].parse().unwrap();
    let log = 1e4f64.ln();
    assert!(ratio >= log - 2.0 && ratio <= log, "{ratio}");
}

#[test]
fn reproduce_perception_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(
        infocost(&["reproduce", "perception", "--out", a.to_str().unwrap()])
            .status
            .success()
    );
    assert!(
        infocost(&["reproduce", "perception", "--out", b.to_str().unwrap()])
            .status
            .success()
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 20);
    let red: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(red.windows(2).all(|w| w[1] < w[0]));
}

fn perception_file(dir: &Path, r: i64) -> PathBuf {
    let states: Vec<i64> = (50 - r..=50 + r).filter(|&i| i != 50).collect();
    let labels: Vec<String> = states.iter().map(|i| i.to_string()).collect();
    let values: Vec<f64> = states.iter().map(|&i| i as f64).collect();
    let red: Vec<f64> = states
        .iter()
        .map(|&i| f64::from(u8::from(i < 50)))
        .collect();
    let blue: Vec<f64> = states
        .iter()
        .map(|&i| f64::from(u8::from(i > 50)))
        .collect();
    let prior = vec![1.0 / states.len() as f64; states.len()];
    let problem = serde_json::json!({
        "states": labels, "values": values, "actions": ["R", "B"],
        "utility": [red, blue], "prior": prior,
    });
    write(dir, "problem.json", &problem.to_string())
}

#[test]
fn solve_perception_is_monotone() {
    let dir = TempDir::new().unwrap();
    let problem = perception_file(dir.path(), 5);
    let beta = write(
        dir.path(),
        "b.json",
        r#"{"rule":"inverse_square","kappa":1}"#,
    );
    let out = dir.path().join("r.json");
    let run = infocost(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--cost",
        "llr",
        "--beta",
        beta.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let result: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for field in [
        "rule",
        "objective",
        "cost",
        "expected_utility",
        "foc_residual",
        "iterations",
        "converged",
    ] {
        assert!(result.get(field).is_some(), "missing {field}");
    }
    let blue: Vec<f64> = result["rule"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[1].as_f64().unwrap())
        .collect();
    assert_eq!(blue.len(), 10);
    assert!(blue.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn solve_mi_with_huge_lambda_is_uninformative() {
    let dir = TempDir::new().unwrap();
    let problem = perception_file(dir.path(), 3);
    let out = dir.path().join("r.json");
    let run = infocost(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--cost",
        "mi",
        "--lambda",
        "1e6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let result: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    // The two actions tie under the prior, so rows differ from 1/2 by about
    // 1/(4λ); the information cost vanishes at the same rate.
    for row in result["rule"].as_array().unwrap() {
        assert!((row[0].as_f64().unwrap() - 0.5).abs() < 1e-6);
    }
    assert!(result["cost"].as_f64().unwrap() < 1e-6);
}

#[test]
fn zero_beta_warns() {
    let dir = TempDir::new().unwrap();
    let problem = write(
        dir.path(),
        "p.json",
        r#"{"states":["a","b"],"actions":["x","y"],"utility":[[1,0],[0,1]],"prior":[0.5,0.5]}"#,
    );
    let beta = write(
        dir.path(),
        "b.json",
        r#"{"states":["a","b"],"coef":[[0,1],[0,0]]}"#,
    );
    let out = dir.path().join("r.json");
    let run = infocost(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--cost",
        "llr",
        "--beta",
        beta.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stderr).contains("non-strict concavity"));
}

#[test]
fn solve_needs_matching_parameter() {
    let dir = TempDir::new().unwrap();
    let problem = perception_file(dir.path(), 2);
    let run = infocost(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--cost",
        "llr",
    ]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn check_suites_pass() {
    for suite in ["axioms", "appendix"] {
        let run = infocost(&["check", "--suite", suite, "--seed", "7", "--trials", "1000"]);
        assert!(
            run.status.success(),
            "{}",
            String::from_utf8_lossy(&run.stdout)
        );
    }
}

#[test]
fn injected_negative_beta_is_caught() {
    let run = infocost(&[
        "check",
        "--suite",
        "axioms",
        "--seed",
        "7",
        "--trials",
        "50",
        "--inject-negative-beta",
    ]);
    assert_eq!(run.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&run.stdout);
    let line = stdout
        .lines()
        .find(|l| l.starts_with("blackwell_monotonicity"))
        .unwrap();
    assert!(line.ends_with("FAIL"));
    assert!(String::from_utf8_lossy(&run.stderr).contains("blackwell_monotonicity"));
}
