//! Subset simulation.
//!
//! `P_F` is written as a product of conditional probabilities over nested
//! events `{f > y_1} ⊃ {f > y_2} ⊃ ...`, each threshold chosen as the
//! `(1 - gamma)` quantile of the current level's samples. Level 0 samples
//! the prior directly; later levels run modified Metropolis chains seeded by
//! the previous level's samples above the new threshold.

use serde::Serialize;

use crate::binning::quantile;
use crate::error::{Error, Result};
use crate::mcmc::{ChainState, ModifiedMetropolis, TargetSpec};
use crate::problem::{EvalCounter, ProblemDefinition};
use crate::rng::SimRng;

#[derive(Debug, Clone)]
pub struct SsConfig {
    /// Target conditional probability per level.
    pub gamma: f64,
    pub n_per_level: usize,
    pub max_levels: usize,
    /// Fixed chain length; by default `ceil(1 / gamma)`.
    pub steps_per_chain: Option<usize>,
}

impl SsConfig {
    pub fn new(gamma: f64, n_per_level: usize) -> Self {
        Self { gamma, n_per_level, max_levels: 50, steps_per_chain: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if (self.n_per_level as f64) * self.gamma < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "n_per_level * gamma must be at least 1 (got {} * {})",
                self.n_per_level, self.gamma
            )));
        }
        if self.max_levels == 0 {
            return Err(Error::InvalidArgument("max_levels must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SsResult {
    /// Intermediate thresholds `y_1..y_K`; the last one equals `y*`.
    pub thresholds: Vec<f64>,
    pub cond_probs: Vec<f64>,
    pub p_f: f64,
    pub total_evals: u64,
}

pub fn run_ss(
    problem: &ProblemDefinition,
    config: &SsConfig,
    sampler: &ModifiedMetropolis,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<SsResult> {
    config.validate()?;
    let start = counter.get();
    let y_star = problem.threshold();
    let mut samples: Vec<ChainState> = (0..config.n_per_level)
        .map(|_| {
            let x = problem.sample_prior_one(rng);
            let y = problem.eval_unchecked(&x, counter);
            ChainState { x, y }
        })
        .collect();
    let mut thresholds = Vec::new();
    let mut cond_probs = Vec::new();
    let chain_len = config.steps_per_chain.unwrap_or_else(|| (1.0 / config.gamma).ceil() as usize);

    loop {
        let level = thresholds.len();
        let ys: Vec<f64> = samples.iter().map(|s| s.y).collect();
        let proposed = quantile(&ys, 1.0 - config.gamma)?;
        let threshold = proposed.min(y_star);
        let seeds: Vec<ChainState> = samples.iter().filter(|s| s.y > threshold).cloned().collect();
        if seeds.is_empty() {
            return Err(Error::DegenerateLevel { level, threshold });
        }
        thresholds.push(threshold);
        cond_probs.push(seeds.len() as f64 / samples.len() as f64);
        if threshold >= y_star {
            let p_f = cond_probs.iter().product();
            return Ok(SsResult { thresholds, cond_probs, p_f, total_evals: counter.get() - start });
        }
        if thresholds.len() >= config.max_levels {
            return Err(Error::NonConvergence {
                method: "subset simulation",
                limit: config.max_levels,
                partial_estimate: cond_probs.iter().product(),
            });
        }
        let run = sampler.run_chains(problem, &seeds, chain_len, &TargetSpec::Above(threshold), rng, counter)?;
        samples = run.samples;
    }
}
