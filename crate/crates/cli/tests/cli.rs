use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use starkres::profiles::default_model2_base;
use starkres::resolvent::model2_r0_expansion;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starkres"))
        .args(args)
        .env_remove("STARKRES_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn p(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn resonance_without_field() {
    let out = run(&["resonance", "--mu", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["re"].as_f64().unwrap() - 1.01905).abs() < 5e-5);
    assert!((v["im"].as_f64().unwrap() + 0.0111115).abs() < 5e-5);
    assert_eq!(v["count_certified"], true);
    assert_eq!(v["kind"], "resonance");
}

#[test]
fn decoupled_root_is_one() {
    let out = run(&["resonance", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["re"].as_f64(), Some(1.0));
    assert_eq!(v["im"].as_f64(), Some(0.0));
}

#[test]
fn model2_root_near_small_coupling_formula() {
    let eps = 0.05;
    let out = run(&["resonance", "--model", "model2", "--epsilon", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let pred = model2_r0_expansion(eps, &default_model2_base(), 1e-12).unwrap();
    let d = (v["re"].as_f64().unwrap() - pred.re).hypot(v["im"].as_f64().unwrap() - pred.im);
    assert!(d <= eps.powi(4), "distance {d:e}");
    assert_eq!(v["model"], "model2");
}

#[test]
fn trace_emits_decreasing_field_column() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["trace", "--f-range", "0.05", "0.04", "--steps", "4", "--seed", "1.0", "-0.005", "--out", p(dir.path())];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "trajectory.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("f_field_strength,re_r_energy,im_r_energy,residual_abs_F,im_over_f"));
    let fs: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(fs.len(), 5);
    assert!(fs.windows(2).all(|w| w[1] < w[0]));
    let s = json(&out);
    assert!(s["c0_hat"].as_f64().unwrap() > 0.0);
    assert_eq!(s["points"], 5);
}

const SCAN: [&str; 12] = ["scan", "--f", "0.05", "--window", "0.95", "1.1", "-0.03", "-0.001", "--grid", "3x2", "--svg", "--out"];

#[test]
fn scan_count_matches_winding_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SCAN.to_vec();
    args.push(p(dir.path()));
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&out);
    assert_eq!(s["count"], s["winding_count"]);
    assert!(s["count"].as_u64().unwrap() >= 1);
    let svg = read(dir.path(), "roots.svg");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(read(dir.path(), "roots.csv").lines().count() as u64, s["count"].as_u64().unwrap() + 1);
}

#[test]
fn csv_is_identical_across_runs_and_thread_counts() {
    let runs: Vec<(String, String)> = ["1", "1", "3"]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let mut args = SCAN.to_vec();
            args.extend([p(dir.path()), "--threads", t]);
            assert_eq!(run(&args).status.code(), Some(0));
            let tr = ["trace", "--f-range", "0.05", "0.045", "--steps", "2", "--seed", "1.0", "-0.005", "--threads", t, "--out"];
            let mut targs = tr.to_vec();
            targs.push(p(dir.path()));
            assert_eq!(run(&targs).status.code(), Some(0));
            (read(dir.path(), "roots.csv"), read(dir.path(), "trajectory.csv"))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn config_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["scan", "--mu", "0.2", "--grid", "4x5", "--seed", "1.0", "-0.01", "--emit-config"]);
    assert_eq!(first.status.code(), Some(0));
    let path = dir.path().join("run.json");
    std::fs::write(&path, &first.stdout).unwrap();
    let second = run(&["scan", "--config", path.to_str().unwrap(), "--emit-config"]);
    assert_eq!(first.stdout, second.stdout);
    let v = json(&second);
    assert_eq!(v["grid"], serde_json::json!([4, 5]));
    let flag_wins = run(&["scan", "--config", path.to_str().unwrap(), "--mu", "0.3", "--emit-config"]);
    assert_eq!(json(&flag_wins)["mu"].as_f64(), Some(0.3));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"mu\": 0.1,\n  \"grid\": [3]\n}").unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["resonance", "--tol", "0"], "`tol`"),
        (vec!["scan", "--window", "1.1", "0.9", "-0.1", "0"], "`window`"),
        (vec!["scan", "--grid", "3by2"], "--grid"),
        (vec!["trace", "--f-range", "0.001", "0.01"], "`f_range`"),
        (vec!["resonance", "--config", bad.to_str().unwrap()], "line 3"),
        (vec!["resonance", "--threads", "0"], "thread"),
        (vec!["frobnicate"], "unrecognized"),
    ];
    for (args, needle) in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn validate_exit_code_follows_fit_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", "--out", p(dir.path())]);
    let s: Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    let pass = s["pass"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if pass { 0 } else { 2 }));
    for fit in s["fits"].as_array().unwrap() {
        let dev = (fit["fit_exponent"].as_f64().unwrap() - fit["expected_exponent"].as_f64().unwrap()).abs();
        assert_eq!(fit["pass"].as_bool().unwrap(), dev <= 0.25);
    }
    let csv = read(dir.path(), "order_laws.csv");
    assert!(csv.starts_with("f_field_strength,abs_err_expansion24,abs_err_leading26\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn sweep_writes_csv_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep-mu", "--mu-grid", "0.2,0.05,0.1", "--svg", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "mu_sweep.csv");
    let mus: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(mus, ["5.0000000000000003e-2", "1.0000000000000001e-1", "2.0000000000000001e-1"]);
    assert!(read(dir.path(), "mu_sweep_im.svg").contains("<polyline"));
    assert_eq!(json(&out)["all_below_axis"], true);
}
