//! Report persistence and CCDF export.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binning::DistributionEstimate;
use crate::error::{Error, Result};
use crate::smmc::SubsetRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: String,
    pub problem: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub mean_evals: f64,
    pub estimates: Vec<f64>,
    /// Evaluations spent by each repetition.
    pub evals: Vec<u64>,
    pub rmse: Option<f64>,
    pub ref_pf: Option<f64>,
    pub seed: u64,
    pub wallclock_s: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json` and `runs.csv` into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json()?)?;
        self.write_runs_csv(&dir.join("runs.csv"))
    }

    /// One row per repetition: `rep,estimate,evals`.
    pub fn write_runs_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "rep,estimate,evals")?;
        for (i, (p, n)) in self.estimates.iter().zip(&self.evals).enumerate() {
            writeln!(w, "{i},{p:.17e},{n}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads back `(estimate, evals)` pairs written by [`ExperimentReport::write_runs_csv`].
pub fn read_runs_csv(path: &Path) -> Result<Vec<(f64, u64)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate().skip(1) {
        let line = line?;
        let bad = || Error::Numeric(format!("malformed runs row {}: `{line}`", i + 1));
        let mut it = line.split(',').skip(1);
        let p: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let n: u64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        rows.push((p, n));
    }
    Ok(rows)
}

pub fn export_ccdf(est: &DistributionEstimate, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    est.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn import_ccdf(path: &Path) -> Result<DistributionEstimate> {
    DistributionEstimate::read_csv(BufReader::new(File::open(path)?))
}

pub fn write_trace(trace: &[SubsetRecord], path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(trace)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::BinGrid;

    fn sample() -> ExperimentReport {
        ExperimentReport {
            method: "smmc".into(),
            problem: "norm10".into(),
            l: 2,
            mean_evals: 1.5,
            estimates: vec![1e-12, 3.5e-12],
            evals: vec![1, 2],
            rmse: Some(0.25),
            ref_pf: Some(2e-12),
            seed: 7,
            wallclock_s: 0.0,
        }
    }

    #[test]
    fn json_uses_schema_names() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        for key in ["method", "problem", "L", "mean_evals", "estimates", "rmse", "ref_pf", "seed", "wallclock_s"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn runs_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        r.write_dir(dir.path()).unwrap();
        let rows = read_runs_csv(&dir.path().join("runs.csv")).unwrap();
        assert_eq!(rows, vec![(1e-12, 1), (3.5e-12, 2)]);
        let back: ExperimentReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn uniform_ccdf_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/ccdf.csv");
        let est = DistributionEstimate::new(BinGrid::new(0.0, 4.0, 4).unwrap(), vec![0.25; 4]).unwrap();
        export_ccdf(&est, &path).unwrap();
        let back = import_ccdf(&path).unwrap();
        let c: Vec<f64> = back.ccdf().iter().map(|c| c.1).collect();
        assert_eq!(c, vec![1.0, 0.75, 0.5, 0.25]);
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 5);
    }
}
