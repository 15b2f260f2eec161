//! Subset multicanonical Monte Carlo.
//!
//! MMC is run on a shrinking sequence of output intervals
//! `[left_edge(m_j), b]`. After each subset the bin probabilities of the
//! active range are fixed as `Theta_i / sum(Theta) * rho_j`, the next cutoff
//! `m_{j+1}` is the bin holding the `(1 - alpha)` quantile of the final
//! samples, and `rho_{j+1}` is the estimated mass above that cutoff. The
//! weights of the surviving bins and the samples inside the new interval are
//! handed to the next subset. The loop stops once the cutoff reaches the
//! threshold bin `m*`, and `P_F = rho_J`.

use serde::Serialize;

use crate::binning::{quantile, BinGrid, DistributionEstimate};
use crate::error::{Error, Result};
use crate::mcmc::{ChainState, ModifiedMetropolis};
use crate::mmc::{mmc_iterate, MmcConfig, ThetaTable, ZeroCountRule};
use crate::problem::{EvalCounter, ProblemDefinition};
use crate::rng::SimRng;

#[derive(Debug, Clone)]
pub struct SmmcConfig {
    /// Fraction of the final samples that should fall in the next interval.
    pub alpha: f64,
    pub n_per_iter: usize,
    /// Weight updates per subset before its final draw.
    pub k_iters: usize,
    pub max_subsets: usize,
    pub zero_count_rule: ZeroCountRule,
    pub steps_per_chain: Option<usize>,
}

impl SmmcConfig {
    pub fn new(alpha: f64, n_per_iter: usize, k_iters: usize) -> Self {
        Self {
            alpha,
            n_per_iter,
            k_iters,
            max_subsets: 50,
            zero_count_rule: ZeroCountRule::default(),
            steps_per_chain: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if (self.n_per_iter as f64) * self.alpha < 10.0 {
            return Err(Error::InvalidArgument(format!(
                "n_per_iter * alpha must be at least 10 (got {} * {})",
                self.n_per_iter, self.alpha
            )));
        }
        if self.max_subsets == 0 {
            return Err(Error::InvalidArgument("max_subsets must be positive".into()));
        }
        Ok(())
    }

    fn mmc(&self) -> MmcConfig {
        MmcConfig {
            k_iters: self.k_iters,
            n_per_iter: self.n_per_iter,
            zero_count_rule: self.zero_count_rule,
            steps_per_chain: self.steps_per_chain,
        }
    }
}

/// State after one subset, as exported in the trace.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetRecord {
    pub j: usize,
    /// First active bin of this subset.
    pub m_j: usize,
    /// Probability of this subset's interval.
    pub rho_j: f64,
    /// Refined weights over bins `m_j..`.
    pub theta: Vec<f64>,
    /// Bin probabilities over bins `m_j..`.
    pub bin_probs: Vec<f64>,
    /// Cutoff chosen for the next subset.
    pub next_cutoff: usize,
    /// Evaluations spent on this subset.
    pub evals: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmmcResult {
    /// Probabilities over the whole grid; bins below the final cutoff come
    /// from the subset that last covered them.
    pub estimate: DistributionEstimate,
    pub p_f: f64,
    pub trace: Vec<SubsetRecord>,
    pub total_evals: u64,
}

/// Bin of the `(1 - alpha)` quantile of `ys`, clipped to `m_star` and
/// forced to advance past `m_j`.
pub fn select_next_cutoff(ys: &[f64], alpha: f64, grid: &BinGrid, m_j: usize, m_star: usize) -> Result<usize> {
    let y_alpha = quantile(ys, 1.0 - alpha)?;
    let bin = grid
        .bin_index(y_alpha)
        .ok_or_else(|| Error::OutOfDomain(format!("quantile {y_alpha} lies outside the bin grid")))?;
    Ok(bin.max(m_j + 1).min(m_star))
}

/// Restricts the weights to bins `m_next..`, renormalised.
pub fn remap_theta(theta: &ThetaTable, m_next: usize) -> Result<ThetaTable> {
    theta.restrict(m_next)
}

#[allow(clippy::too_many_arguments)]
pub fn run_smmc(
    problem: &ProblemDefinition,
    grid: &BinGrid,
    m_star: usize,
    config: &SmmcConfig,
    sampler: &ModifiedMetropolis,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<SmmcResult> {
    config.validate()?;
    if m_star >= grid.len() {
        return Err(Error::InvalidArgument(format!("threshold bin {m_star} is outside a grid of {} bins", grid.len())));
    }
    let start = counter.get();
    let mmc_cfg = config.mmc();
    let mut probs = vec![0.0; grid.len()];
    probs[0] = 1.0;
    let mut m_j = 0;
    let mut rho_j = 1.0;
    let mut theta = ThetaTable::uniform(0, grid.len());
    let mut seeds: Option<Vec<ChainState>> = None;
    let mut trace = Vec::new();

    while m_j < m_star {
        if trace.len() >= config.max_subsets {
            return Err(Error::NonConvergence { method: "subset MMC", limit: config.max_subsets, partial_estimate: rho_j });
        }
        let before = counter.get();
        let outcome = mmc_iterate(problem, grid, theta, seeds.take(), &mmc_cfg, sampler, rng, counter)?;
        let local = outcome.refined.bin_probs(rho_j);
        probs[m_j..].copy_from_slice(&local);

        let ys: Vec<f64> = outcome.final_samples.iter().map(|s| s.y).collect();
        let m_next = select_next_cutoff(&ys, config.alpha, grid, m_j, m_star)?;
        let rho_next: f64 = probs[m_next..].iter().rev().sum();
        trace.push(SubsetRecord {
            j: trace.len(),
            m_j,
            rho_j,
            theta: outcome.refined.values().to_vec(),
            bin_probs: local,
            next_cutoff: m_next,
            evals: counter.get() - before,
        });

        theta = remap_theta(&outcome.refined, m_next)?;
        let lower = grid.left_edge(m_next);
        let kept: Vec<ChainState> = outcome.final_samples.into_iter().filter(|s| s.y >= lower).collect();
        if kept.is_empty() && m_next < m_star {
            return Err(Error::DegenerateLevel { level: trace.len(), threshold: lower });
        }
        seeds = Some(kept);
        m_j = m_next;
        rho_j = rho_next;
    }

    let estimate = DistributionEstimate::new(*grid, probs)?;
    Ok(SmmcResult { estimate, p_f: rho_j, trace, total_evals: counter.get() - start })
}

/// MSE-optimal scaling `phi = rho' / rho` for the flat-histogram estimator
/// over the `m - m_star` failure bins with `n` independent samples, and the
/// factor `MSE_min / P^2` it achieves.
pub fn mse_optimal_phi(n: usize, m: usize, m_star: usize) -> Result<(f64, f64)> {
    if n == 0 || m <= m_star {
        return Err(Error::InvalidArgument(format!("need n > 0 and m > m_star, got n={n}, m={m}, m_star={m_star}")));
    }
    let extra = (m - m_star - 1) as f64;
    let n = n as f64;
    Ok((n / (n + extra), extra / (extra + n)))
}

/// Model MSE of the flat-histogram estimator at scaling `phi`, relative to `P^2`.
pub fn mse_model(n: usize, m: usize, m_star: usize, phi: f64) -> f64 {
    let extra = (m - m_star - 1) as f64;
    extra / n as f64 * phi * phi + (phi - 1.0).powi(2)
}
