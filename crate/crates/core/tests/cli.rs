use std::path::Path;
use std::process::{Command, Output};

use smmc::harness::{import_ccdf, read_runs_csv, relative_mse};

fn smmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smmc")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bad_configs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "problem = \"norm10\"\nmethod = \"mc\"\n",
        "problem = \"norm10\"\nmethod = \"bogus\"\nseed = 1\n",
        "problem = \"nope\"\nmethod = \"mc\"\nseed = 1\n",
        "problem = \"norm10\"\nmethod = \"ss\"\nseed = 1\nss.gamma = 1.5\n",
        "problem = \"norm10\"\nmethod = \"mc\"\nseed = 1\ntypo = 3\n",
    ] {
        let cfg = write_config(dir.path(), body);
        let out = smmc(&["run", "--config", &cfg]);
        assert!(!out.status.success(), "accepted:\n{body}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    assert!(!smmc(&["run", "--config", "/nonexistent.toml"]).status.success());
}

#[test]
fn oracle_prints_reference() {
    let out = smmc(&["oracle", "--problem", "gauss1d", "--threshold", "3"]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v / 1.349898e-3 - 1.0).abs() < 1e-6);
    assert!(!smmc(&["oracle", "--problem", "quarter-car"]).status.success());
}

#[test]
fn report_and_runs_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "problem = \"norm10\"\nmethod = \"ss\"\nseed = 5\nrepetitions = 6\nthreshold = 30.0\nss.n_per_level = 500\n",
    );
    let out_dir = dir.path().join("out");
    let out = smmc(&["run", "--config", &cfg, "--output-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["L"], 6);
    assert_eq!(report["method"], "ss");

    let runs = read_runs_csv(&out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.len(), 6);
    let estimates: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let recomputed = relative_mse(&estimates, report["ref_pf"].as_f64().unwrap()).unwrap();
    let reported = report["rmse"].as_f64().unwrap();
    assert!((recomputed / reported - 1.0).abs() < 1e-12);
    let mean_evals = runs.iter().map(|r| r.1 as f64).sum::<f64>() / 6.0;
    assert_eq!(report["mean_evals"].as_f64().unwrap(), mean_evals);
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn ccdf_export_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "problem = \"gauss1d\"\nmethod = \"mmc\"\nseed = 8\nmmc.k_iters = 4\nmmc.n_per_iter = 2000\n",
    );
    let csv = dir.path().join("nested/ccdf.csv");
    let trace = dir.path().join("trace.json");
    let out = smmc(&["ccdf", "--config", &cfg, "--out", csv.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let est = import_ccdf(&csv).unwrap();
    assert!((est.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    // Trace only exists for smmc.
    assert!(!trace.exists());

    let ss = smmc(&["ccdf", "--config", &cfg, "--method", "ss", "--out", csv.to_str().unwrap()]);
    assert!(!ss.status.success());
}

#[test]
fn sweep_writes_one_directory_per_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "problem = \"gauss1d\"\nmethod = \"mc\"\nseed = 3\nrepetitions = 3\nthreshold = 1.0\n");
    let out_dir = dir.path().join("sweep");
    let out = smmc(&["sweep", "--config", &cfg, "--budgets", "1000,4000", "--output-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["mean_evals"], 1000.0);
    assert_eq!(reports[1]["mean_evals"], 4000.0);
    assert!(out_dir.join("budget_1e3/runs.csv").exists());
    assert!(out_dir.join("budget_4e3/report.json").exists());
}

#[test]
fn shipped_configs_are_valid() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            smmc::harness::RunConfig::from_file(&path).unwrap().resolved().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
