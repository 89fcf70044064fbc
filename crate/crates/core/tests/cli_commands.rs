use std::path::Path;
use std::process::Command;

use ldpc_storage::cli::{run_args, CliError};
use ldpc_storage::graph::alist;

fn run(args: &[&str]) -> Result<String, CliError> {
    run_args(std::iter::once("ldpc-store").chain(args.iter().copied()))
}

fn csv_rows(out: &str) -> Vec<Vec<String>> {
    let body: String = out.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn write_code(dir: &Path, n: &str, m: &str, qc: Option<&str>) -> String {
    let path = dir.join(format!("code_{n}_{m}.alist"));
    let p = path.to_str().unwrap();
    let mut args = vec!["construct", "--n", n, "--m", m, "--dv", "2", "--out", p];
    if let Some(l) = qc {
        args.extend(["--qc", l]);
    }
    run(&args).unwrap();
    p.to_string()
}

#[test]
fn compare_baselines() {
    let out = run(&["compare", "--schemes", "replication3,rs_15_10"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["scheme", "storage_overhead", "repair_bw_overhead", "mttdl_days", "source", "citation"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][2], "1.0");
    assert_eq!(rows[2][2], "10.0");
    assert!(out.lines().last().unwrap().starts_with("# version="));
    assert!(out.contains("seed=1 config_hash="));
}

#[test]
fn compare_empty_is_header_only() {
    let out = run(&["compare", "--schemes", ""]).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("scheme,"));
    assert!(lines[1].starts_with("# "));
}

#[test]
fn compare_ldpc_uses_check_degree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "30", "10", None);
    let g = alist::read(&path).unwrap();
    assert!(g.is_cn_regular());
    assert_eq!(g.cn_degree(0), 6);
    let scheme = format!("ldpc:{path}");
    let out = run(&["compare", "--schemes", &scheme, "--samples", "2000"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows[1][2], "5.0");
    assert_eq!(rows[1][4], "computed");
}

#[test]
fn compare_reference_rows_carry_citations() {
    let out = run(&["compare", "--reference"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        assert_eq!(row[4], "reference");
        assert!(!row[5].is_empty());
    }
}

#[test]
fn missing_graph_file() {
    let err = run(&["compare", "--schemes", "ldpc:/definitely/not/here.alist"]).unwrap_err();
    assert!(matches!(err, CliError::MissingGraphFile(_)));
    assert_ne!(err.exit_code(), 0);
    let err = run(&["lossprob", "--alist", "/definitely/not/here.alist"]).unwrap_err();
    assert!(matches!(err, CliError::MissingGraphFile(_)));
}

#[test]
fn tradeoff_half_rate() {
    let out = run(&["tradeoff", "--rate", "1/2", "--dc-min", "4", "--dc-max", "7"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows[0][..4], ["dc", "gamma", "scaled_threshold", "dv"]);
    assert_eq!(rows.len(), 5);
    let t: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[0] < w[1]), "{t:?}");
}

#[test]
fn tradeoff_two_thirds_row() {
    let out = run(&["tradeoff", "--rate", "2/3", "--dc-min", "9", "--dc-max", "9"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows[1][0], "9");
    assert_eq!(rows[1][1], "8");
    let t: f64 = rows[1][2].parse().unwrap();
    assert!((t - 0.943).abs() < 0.01, "{t}");
}

#[test]
fn rates_must_be_fractions() {
    for rate in ["0", "0.5", "1/1"] {
        let err = run(&["tradeoff", "--rate", rate, "--dc-min", "4", "--dc-max", "5"]).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{rate}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn lossprob_columns_and_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "12", "6", None);
    let out = run(&["lossprob", "--alist", &path, "--p", "0,0.1", "--trials", "5000"]).unwrap();
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["p", "ldpc_loss", "ci_lo", "ci_hi", "rs_loss", "rep3_loss"]);
    assert!(rows[1][1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{:?}", rows[1]);
    let rs: f64 = rows[2][4].parse().unwrap();
    let tail: f64 = (6..=15)
        .map(|e: i32| {
            let c: f64 = (0..e).map(|j| (15 - j) as f64 / (j + 1) as f64).product();
            c * 0.1f64.powi(e) * 0.9f64.powi(15 - e)
        })
        .sum();
    assert!((rs - tail).abs() < 1e-15);
    assert!((rows[2][5].parse::<f64>().unwrap() - 1e-3).abs() < 1e-15);
}

#[test]
fn output_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "20", "10", None);
    let args = |t: &'static str| {
        vec!["--threads", t, "--seed", "7", "lossprob", "--alist", path.as_str(), "--p", "0.05,0.2", "--trials", "20000"]
    };
    assert_eq!(run(&args("1")).unwrap(), run(&args("3")).unwrap());
    let prof = |t: &'static str| {
        vec!["--threads", t, "profile", "--alist", path.as_str(), "--samples", "20000", "--format", "csv"]
    };
    assert_eq!(run(&prof("1")).unwrap(), run(&prof("4")).unwrap());
}

#[test]
fn construct_is_reproducible() {
    let a = run(&["--seed", "5", "construct", "--n", "60", "--m", "20", "--qc", "10"]).unwrap();
    let b = run(&["--seed", "5", "construct", "--n", "60", "--m", "20", "--qc", "10"]).unwrap();
    assert_eq!(a, b);
    let g = alist::parse(&a).unwrap();
    assert_eq!((g.n(), g.m()), (60, 20));
    assert!(run(&["construct", "--n", "60", "--m", "20", "--qc", "7"]).is_err());
}

#[test]
fn threshold_and_optimize_json() {
    let out = run(&["threshold", "--lambda", "1.0:2", "--rho", "1.0:6"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["epsilon_star"].as_f64().unwrap() - 0.2).abs() < 1e-4);
    assert!((v["scaled"].as_f64().unwrap() - 0.6).abs() < 1e-3);

    let out = run(&["optimize", "--rate", "1/2", "--dc", "5"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["scaled"].as_f64().unwrap() - 0.91).abs() < 0.02);
    let lambda = v["lambda"].as_object().unwrap();
    let sum: f64 = lambda.values().map(|c| c.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-9);
    assert!(v["dv"].as_f64().is_some());
}

#[test]
fn mttdl_schemes() {
    let out = run(&["mttdl", "--scheme", "rs", "--n", "15", "--k", "10"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let days = v["normalized_days"].as_f64().unwrap();
    assert!((days / 2.13e10).log10().abs() < 1.0);
    assert_eq!(v["method"], "mds");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("system.cfg");
    std::fs::write(&cfg, "# slower links\nr_node = 5e8\n").unwrap();
    let slow = run(&["--config", cfg.to_str().unwrap(), "mttdl", "--scheme", "replication"]).unwrap();
    let fast = run(&["mttdl", "--scheme", "replication"]).unwrap();
    let d = |s: &str| serde_json::from_str::<serde_json::Value>(s).unwrap()["normalized_days"].as_f64().unwrap();
    assert!(d(&slow) < d(&fast));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let err = run(&["--config", cfg.to_str().unwrap(), "mttdl", "--scheme", "replication"]).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
    let err = run(&["mttdl", "--scheme", "rs", "--n", "15"]).unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
}

#[test]
fn mttdl_from_saved_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_code(dir.path(), "30", "10", None);
    let prof = dir.path().join("profile.json");
    run(&["profile", "--alist", &path, "--samples", "5000", "--out", prof.to_str().unwrap()]).unwrap();
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&prof).unwrap()).unwrap();
    for key in ["n", "m", "s_star", "q", "p", "n_s", "exact_upto"] {
        assert!(saved.get(key).is_some(), "{key}");
    }
    let a = run(&["mttdl", "--scheme", "ldpc", "--alist", &path, "--profile", prof.to_str().unwrap()]).unwrap();
    let b = run(&["mttdl", "--scheme", "ldpc", "--alist", &path, "--samples", "5000"]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ldpc-store");
    let ok = Command::new(bin).args(["compare", "--schemes", "replication3"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("scheme,"));

    let missing = Command::new(bin).args(["lossprob", "--alist", "/no/such.alist"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("not found"));

    let bad_rate = Command::new(bin).args(["optimize", "--rate", "0.5", "--dc", "6"]).output().unwrap();
    assert_eq!(bad_rate.status.code(), Some(2));
    assert!(bad_rate.stdout.is_empty());
}
