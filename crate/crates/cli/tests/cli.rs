use std::path::Path;
use std::process::{Command, Output};

fn smoothiso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothiso"))
        .args(args)
        .env_remove("SMOOTHISO_WORKERS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn constants_has_flat_keys() {
    let out = smoothiso(&["constants", "--scenario", "linear-regression", "--p", "2"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["sigma1", "Dsq", "m_n", "m_c", "m_limit", "sigma2", "theta2", "theta1", "theta_tilde2", "alpha0"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["alpha0"], 0.0);
}

#[test]
fn estimate_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let s = smoothiso::model::simulate_regression(&smoothiso::MonotoneFunction::polynomial(vec![1.0, -1.0]), 200, 0.1, 1)
        .unwrap();
    smoothiso::io::write_sample(&s, std::fs::File::create(&sample).unwrap()).unwrap();
    let est = dir.path().join("est.csv");
    let out = smoothiso(&[
        "estimate",
        "--in",
        sample.to_str().unwrap(),
        "--method",
        "sg",
        "--b",
        "0.1",
        "--grid",
        "513",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&est).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert_eq!(lines.count(), 513);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&smoothiso(&["frobnicate"])), 2);
    assert_eq!(code(&smoothiso(&[])), 2);
    assert_eq!(code(&smoothiso(&["constants", "--p", "two"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"bandwith": 0.1}"#);
    let out = smoothiso(&["estimate", "--config", &bad, "--seed", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bandwith"));
    let not_json = write(dir.path(), "x.json", "[1, 2]");
    assert_eq!(code(&smoothiso(&["constants", "--config", &not_json])), 3);
    assert_eq!(code(&smoothiso(&["constants", "--config", "/nonexistent.json"])), 3);
    // valid config, impossible bandwidth: fails at run time
    assert_eq!(code(&smoothiso(&["estimate", "--b", "0.7", "--seed", "1"])), 4);
    assert_eq!(code(&smoothiso(&["chernoff", "--M", "0", "--seed", "1"])), 4);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.json", "{}");
    let out = smoothiso(&["constants", "--config", &empty]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p"], 2.0);
    let cfg = write(dir.path(), "c.json", r#"{"b": 0.1, "p": 1.0}"#);
    let v: serde_json::Value = serde_json::from_slice(&smoothiso(&["constants", "--config", &cfg]).stdout).unwrap();
    assert_eq!(v["b"], 0.1);
    assert_eq!(v["p"], 1.0);
    let v: serde_json::Value =
        serde_json::from_slice(&smoothiso(&["constants", "--config", &cfg, "--p", "3"]).stdout).unwrap();
    assert_eq!(v["p"], 3.0);
    assert_eq!(v["b"], 0.1);
}

#[test]
fn missing_seed_is_generated_and_logged() {
    let out = smoothiso(&["chernoff", "--M", "5"]);
    assert_eq!(code(&out), 0);
    let err = String::from_utf8_lossy(&out.stderr);
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed logged")
        .trim()
        .parse()
        .unwrap();
    assert!(err.contains("chernoff config"));
    // the printed seed replays the run
    let again = smoothiso(&["chernoff", "--M", "5", "--seed", &seed.to_string()]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn power_row_and_test_exit_code() {
    let out = smoothiso(&[
        "power", "--fn", "lambda_a", "--a", "0", "--sigma", "0.1", "--n", "100", "--N", "200", "--B", "200", "--alpha",
        "0.05", "--seed", "7",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let rate: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(rate <= 0.07, "{rate}");

    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,y\n");
    for i in 1..=100 {
        let x = i as f64 / 100.0;
        // increasing on the right half
        let y = if x < 0.5 { 1.0 - x } else { x };
        csv.push_str(&format!("{x},{y}\n"));
    }
    let path = write(dir.path(), "v.csv", &csv);
    let out = smoothiso(&["test", "--in", &path, "--B", "50", "--seed", "1"]);
    assert_eq!(code(&out), 10, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reject"], true);
    assert_eq!(code(&smoothiso(&["test", "--B", "50", "--seed", "1"])), 3);
    assert_eq!(code(&smoothiso(&["test", "--in", &path, "--p", "3", "--seed", "1"])), 3);
}
