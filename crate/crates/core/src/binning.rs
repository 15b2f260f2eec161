//! Output-space binning and per-bin probability estimates.
//!
//! Bin indices are zero-based: bin `i` covers `[a + i*delta, a + (i+1)*delta)`,
//! and the last bin is closed at `b`.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that a threshold sits on a bin edge.
const ALIGN_TOL: f64 = 1e-9;

/// Equal-width partition of `[a, b]` into `m` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinGrid {
    a: f64,
    b: f64,
    m: usize,
    delta: f64,
}

impl BinGrid {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("bin grid needs finite a < b, got [{a}, {b}]")));
        }
        if m < 2 {
            return Err(Error::InvalidArgument(format!("bin grid needs at least 2 bins, got {m}")));
        }
        Ok(Self { a, b, m, delta: (b - a) / m as f64 })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.delta
    }

    pub fn left_edge(&self, i: usize) -> f64 {
        if i == self.m {
            self.b
        } else {
            self.a + i as f64 * self.delta
        }
    }

    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.delta
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.center(i)).collect()
    }

    /// Bin containing `y`, or `None` outside `[a, b]`.
    pub fn bin_index(&self, y: f64) -> Option<usize> {
        if !(y >= self.a && y <= self.b) {
            return None;
        }
        let mut i = (((y - self.a) / self.delta).floor() as usize).min(self.m - 1);
        // Reconcile the division with the edges returned by `left_edge`.
        if i > 0 && y < self.left_edge(i) {
            i -= 1;
        } else if i + 1 < self.m && y >= self.left_edge(i + 1) {
            i += 1;
        }
        Some(i)
    }

    /// Index `k` of the bin whose left edge equals `y_star`; the failure
    /// region `[y_star, b]` is then exactly bins `k..m`.
    pub fn align_threshold(&self, y_star: f64) -> Result<usize> {
        let offset = (y_star - self.a) / self.delta;
        let k = offset.round();
        let misaligned = Error::MisalignedThreshold { y_star, a: self.a, b: self.b, m: self.m };
        if !(y_star >= self.a && y_star < self.b) || (offset - k).abs() > ALIGN_TOL * offset.abs().max(1.0) {
            return Err(misaligned);
        }
        Ok(k as usize)
    }

    pub fn histogram(&self, ys: &[f64]) -> Histogram {
        let mut counts = vec![0u64; self.m];
        let mut out_of_range = 0;
        for &y in ys {
            match self.bin_index(y) {
                Some(i) => counts[i] += 1,
                None => out_of_range += 1,
            }
        }
        Histogram { counts, out_of_range }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub out_of_range: u64,
}

/// Order statistic at rank `ceil(p * N)` of `values` (no interpolation).
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile of an empty sample"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Per-bin probabilities `P_i` over a grid together with their total `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionEstimate {
    grid: BinGrid,
    probs: Vec<f64>,
    rho: f64,
}

impl DistributionEstimate {
    pub fn new(grid: BinGrid, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: probs.len() });
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("bin probabilities must be finite and nonnegative, got {p}")));
        }
        // Summed from the top so that `ccdf()[0] == rho` bit for bit.
        let rho = probs.iter().rev().sum();
        Ok(Self { grid, probs, rho })
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `P_i / delta` at each bin center.
    pub fn pdf(&self) -> Vec<(f64, f64)> {
        let w = self.grid.width();
        self.probs.iter().enumerate().map(|(i, p)| (self.grid.center(i), p / w)).collect()
    }

    /// Tail masses `sum_{j >= i} P_j` at each left edge.
    pub fn ccdf(&self) -> Vec<(f64, f64)> {
        let mut tail = vec![0.0; self.probs.len()];
        let mut acc = 0.0;
        for i in (0..self.probs.len()).rev() {
            acc += self.probs[i];
            tail[i] = acc;
        }
        tail.into_iter().enumerate().map(|(i, t)| (self.grid.left_edge(i), t)).collect()
    }

    /// Estimated probability of the bins `m_star..m`.
    pub fn failure_prob(&self, m_star: usize) -> f64 {
        self.probs.iter().skip(m_star).rev().sum()
    }

    /// Left edge of the first bin whose tail mass is at most `1 - p`.
    pub fn extreme_quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let target = 1.0 - p;
        let ccdf = self.ccdf();
        ccdf.iter()
            .find(|(_, t)| *t <= target)
            .map(|(edge, _)| *edge)
            .ok_or(Error::Resolution { smallest: ccdf.last().map_or(0.0, |c| c.1) })
    }

    /// Writes `bin_center,bin_left,prob,pdf,ccdf` rows in scientific notation.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_center,bin_left,prob,pdf,ccdf")?;
        let pdf = self.pdf();
        for (i, (edge, tail)) in self.ccdf().into_iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", self.grid.center(i), edge, self.probs[i], pdf[i].1, tail)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or(Error::EmptyInput("distribution CSV"))??;
        if header.trim() != "bin_center,bin_left,prob,pdf,ccdf" {
            return Err(Error::InvalidArgument(format!("unexpected CSV header `{header}`")));
        }
        let mut centers = Vec::new();
        let mut probs = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad CSV row `{line}`: {e}")))?;
            if fields.len() != 5 {
                return Err(Error::InvalidArgument(format!("expected 5 CSV fields, got {}", fields.len())));
            }
            centers.push((fields[0], fields[1]));
            probs.push(fields[2]);
        }
        let (first_center, first_left) = *centers.first().ok_or(Error::EmptyInput("distribution CSV rows"))?;
        let delta = 2.0 * (first_center - first_left);
        let m = probs.len();
        let grid = BinGrid::new(first_left, first_left + delta * m as f64, m)?;
        Self::new(grid, probs)
    }
}
