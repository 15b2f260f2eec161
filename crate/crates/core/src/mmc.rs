//! Multicanonical Monte Carlo.
//!
//! The biasing law is `q(x) ∝ pi(x) / Theta(f(x))` on the active bins, with
//! `Theta` piecewise constant per bin. Each iteration draws samples from the
//! current law, histograms them and multiplies `Theta` by the observed bin
//! frequencies; at the fixed point every bin is visited equally often and
//! `Theta_i` is proportional to the bin probability `P_i`.

use serde::{Deserialize, Serialize};

use crate::binning::{BinGrid, DistributionEstimate};
use crate::error::{Error, Result};
use crate::mcmc::{select_seeds, ChainState, ModifiedMetropolis, TargetSpec};
use crate::problem::{EvalCounter, ProblemDefinition};
use crate::rng::SimRng;

/// Prior draws allowed when searching for a first in-domain point.
pub const MAX_INIT_ATTEMPTS: usize = 100_000;

/// Positive per-bin weights over the active bins `lo..lo + len`, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    lo: usize,
    values: Vec<f64>,
}

impl ThetaTable {
    /// Equal weights over bins `lo..m`.
    pub fn uniform(lo: usize, m: usize) -> Self {
        assert!(lo < m, "active range must be nonempty");
        let n = m - lo;
        Self { lo, values: vec![1.0 / n as f64; n] }
    }

    /// Normalises `values` (any positive scale) into a table starting at bin `lo`.
    pub fn from_values(lo: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("theta table needs at least one bin"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument("theta entries must be positive and finite".into()));
        }
        let total: f64 = values.iter().sum();
        Ok(Self { lo, values: values.into_iter().map(|v| v / total).collect() })
    }

    /// First active bin.
    pub fn lo(&self) -> usize {
        self.lo
    }

    /// One past the last active bin.
    pub fn hi(&self) -> usize {
        self.lo + self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, bin: usize) -> Option<f64> {
        bin.checked_sub(self.lo).and_then(|k| self.values.get(k)).copied()
    }

    pub fn ln_value(&self, bin: usize) -> Option<f64> {
        self.value(bin).map(f64::ln)
    }

    pub fn is_uniform(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }

    /// Restriction to bins `new_lo..`, renormalised. Ratios between the
    /// surviving bins are preserved.
    pub fn restrict(&self, new_lo: usize) -> Result<Self> {
        if new_lo < self.lo || new_lo >= self.hi() {
            return Err(Error::InvalidArgument(format!(
                "cannot restrict table over bins {}..{} to start at {new_lo}",
                self.lo,
                self.hi()
            )));
        }
        if new_lo == self.lo {
            return Ok(self.clone());
        }
        Self::from_values(new_lo, self.values[new_lo - self.lo..].to_vec())
    }

    /// `P_i = Theta_i / sum(Theta) * rho` for the active bins.
    pub fn bin_probs(&self, rho: f64) -> Vec<f64> {
        let total: f64 = self.values.iter().sum();
        self.values.iter().map(|v| v / total * rho).collect()
    }
}

/// How bins that received no samples are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroCountRule {
    /// An unvisited bin keeps its previous weight.
    CarryForward,
    /// An unvisited bin keeps its previous weight ratio to the nearest
    /// visited bin, so it moves together with the explored region.
    #[default]
    NeighborRatio,
}

/// `Theta'_i ∝ (N_i / n) Theta_i`, renormalised to sum one. `counts` are per
/// active bin and `n` is the number of samples behind them.
pub fn update_theta(theta: &ThetaTable, counts: &[u64], n: u64, rule: ZeroCountRule) -> Result<ThetaTable> {
    if counts.len() != theta.values.len() {
        return Err(Error::DimensionMismatch { expected: theta.values.len(), got: counts.len() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::NoCounts);
    }
    let inv_n = 1.0 / n as f64;
    let mut next: Vec<Option<f64>> =
        counts.iter().zip(&theta.values).map(|(&c, &t)| (c > 0).then(|| c as f64 * inv_n * t)).collect();
    match rule {
        ZeroCountRule::CarryForward => {
            for (slot, &t) in next.iter_mut().zip(&theta.values) {
                slot.get_or_insert(t);
            }
        }
        ZeroCountRule::NeighborRatio => {
            let visited: Vec<usize> = (0..next.len()).filter(|&k| next[k].is_some()).collect();
            let filled: Vec<f64> = (0..next.len())
                .map(|k| match next[k] {
                    Some(v) => v,
                    None => {
                        // Nearest visited bin; ties go to the lower bin.
                        let pos = visited.partition_point(|&v| v < k);
                        let j = match (pos.checked_sub(1).map(|p| visited[p]), visited.get(pos)) {
                            (Some(lo), Some(&hi)) => if k - lo <= hi - k { lo } else { hi },
                            (Some(lo), None) => lo,
                            (None, Some(&hi)) => hi,
                            (None, None) => unreachable!("at least one bin was visited"),
                        };
                        next[j].unwrap() * (theta.values[k] / theta.values[j])
                    }
                })
                .collect();
            return ThetaTable::from_values(theta.lo, filled);
        }
    }
    ThetaTable::from_values(theta.lo, next.into_iter().map(Option::unwrap).collect())
}

/// Plain importance-sampling estimate `(1/N) sum_j 1{bin_j = i} w_j`.
pub fn is_estimate(bins: &[Option<usize>], weights: &[f64], bin: usize) -> Result<f64> {
    if bins.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: bins.len(), got: weights.len() });
    }
    if bins.is_empty() {
        return Err(Error::EmptyInput("importance sampling needs samples"));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidArgument("importance weights must be positive and finite".into()));
    }
    let s: f64 = bins.iter().zip(weights).filter(|(b, _)| **b == Some(bin)).map(|(_, w)| w).sum();
    Ok(s / bins.len() as f64)
}

/// Settings for one MMC run over a fixed active range.
#[derive(Debug, Clone)]
pub struct MmcConfig {
    /// Number of weight updates before the final draw.
    pub k_iters: usize,
    /// Target number of samples per draw.
    pub n_per_iter: usize,
    pub zero_count_rule: ZeroCountRule,
    /// Fixed chain length; by default `ceil(n_per_iter / chains)`.
    pub steps_per_chain: Option<usize>,
}

impl MmcConfig {
    pub fn new(k_iters: usize, n_per_iter: usize) -> Self {
        Self { k_iters, n_per_iter, zero_count_rule: ZeroCountRule::default(), steps_per_chain: None }
    }
}

/// Bookkeeping for one MMC draw.
#[derive(Debug, Clone, Serialize)]
pub struct MmcIterationRecord {
    pub iteration: usize,
    pub counts: Vec<u64>,
    pub theta_before: Vec<f64>,
    pub theta_after: Vec<f64>,
    pub chains: usize,
    pub acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MmcOutcome {
    /// The table the final samples were drawn under (after `k_iters` updates).
    pub theta: ThetaTable,
    /// `theta` updated once more with the final draw's counts.
    pub refined: ThetaTable,
    /// Samples of the final draw, all inside the active bins.
    pub final_samples: Vec<ChainState>,
    pub records: Vec<MmcIterationRecord>,
}

/// Draws `k_iters + 1` sample sets `S_0..S_K` from `q_0..q_K`, updating the
/// table after each of the first `k_iters` draws.
///
/// Without `seeds`, the first draw is made from the prior directly when
/// `theta0` is uniform (then `q_0` is the prior restricted to the active
/// bins) and otherwise from chains started at the first in-domain prior draw.
#[allow(clippy::too_many_arguments)]
pub fn mmc_iterate(
    problem: &ProblemDefinition,
    grid: &BinGrid,
    theta0: ThetaTable,
    seeds: Option<Vec<ChainState>>,
    config: &MmcConfig,
    sampler: &ModifiedMetropolis,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<MmcOutcome> {
    if theta0.hi() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "theta table ends at bin {} but the grid has {} bins",
            theta0.hi(),
            grid.len()
        )));
    }
    if config.n_per_iter == 0 {
        return Err(Error::InvalidArgument("samples per iteration must be positive".into()));
    }
    let mut theta = theta0;
    let mut records = Vec::with_capacity(config.k_iters + 1);
    let mut previous: Option<Vec<ChainState>> = seeds.filter(|s| !s.is_empty());
    for k in 0..=config.k_iters {
        let target = TargetSpec::Binned { grid, theta: &theta };
        let (samples, chains, acceptance) = match previous.take() {
            Some(prev) => {
                let seeds = select_seeds(&prev, grid, rng)?;
                let steps = config.steps_per_chain.unwrap_or_else(|| config.n_per_iter.div_ceil(seeds.len()));
                let run = sampler.run_chains(problem, &seeds, steps, &target, rng, counter)?;
                let rate = run.acceptance_rate();
                (run.samples, seeds.len(), Some(rate))
            }
            None if theta.is_uniform() => {
                let samples = prior_draws(problem, config.n_per_iter, &target, rng, counter)?;
                (samples, 0, None)
            }
            None => {
                let seed = prior_draws(problem, 1, &target, rng, counter)?;
                let steps = config.steps_per_chain.unwrap_or(config.n_per_iter);
                let run = sampler.run_chains(problem, &seed, steps, &target, rng, counter)?;
                let rate = run.acceptance_rate();
                (run.samples, 1, Some(rate))
            }
        };
        let counts = active_counts(grid, &theta, &samples);
        let updated = update_theta(&theta, &counts, samples.len() as u64, config.zero_count_rule)?;
        records.push(MmcIterationRecord {
            iteration: k,
            counts,
            theta_before: theta.values.clone(),
            theta_after: updated.values.clone(),
            chains,
            acceptance_rate: acceptance,
        });
        if k == config.k_iters {
            return Ok(MmcOutcome { theta, refined: updated, final_samples: samples, records });
        }
        theta = updated;
        previous = Some(samples);
    }
    unreachable!("the loop returns on its last iteration")
}

/// Independent prior draws, keeping those inside the target domain. Keeps
/// drawing past `n` only while nothing in-domain has been found.
fn prior_draws(
    problem: &ProblemDefinition,
    n: usize,
    target: &TargetSpec<'_>,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<Vec<ChainState>> {
    let mut kept = Vec::with_capacity(n);
    let mut attempts = 0;
    while attempts < n || (kept.is_empty() && attempts < MAX_INIT_ATTEMPTS) {
        attempts += 1;
        let x = problem.sample_prior_one(rng);
        let y = problem.eval_unchecked(&x, counter);
        if target.contains(y) {
            kept.push(ChainState { x, y });
        }
    }
    if kept.is_empty() {
        return Err(Error::Initialization { attempts });
    }
    Ok(kept)
}

/// Histogram of `samples` restricted to the table's active bins.
pub fn active_counts(grid: &BinGrid, theta: &ThetaTable, samples: &[ChainState]) -> Vec<u64> {
    let mut counts = vec![0u64; theta.values.len()];
    for s in samples {
        if let Some(k) = grid.bin_index(s.y).and_then(|i| i.checked_sub(theta.lo)) {
            if let Some(c) = counts.get_mut(k) {
                *c += 1;
            }
        }
    }
    counts
}

/// Result of a standalone MMC run over the whole grid.
#[derive(Debug, Clone)]
pub struct MmcResult {
    pub estimate: DistributionEstimate,
    pub p_f: f64,
    pub outcome: MmcOutcome,
}

/// Standalone MMC over the full grid with `rho = 1`; the failure
/// probability is the mass of bins `m_star..`.
pub fn run_mmc(
    problem: &ProblemDefinition,
    grid: &BinGrid,
    m_star: usize,
    config: &MmcConfig,
    sampler: &ModifiedMetropolis,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<MmcResult> {
    let theta0 = ThetaTable::uniform(0, grid.len());
    let outcome = mmc_iterate(problem, grid, theta0, None, config, sampler, rng, counter)?;
    let estimate = DistributionEstimate::new(*grid, outcome.refined.bin_probs(1.0))?;
    let p_f = estimate.failure_prob(m_star);
    Ok(MmcResult { estimate, p_f, outcome })
}
