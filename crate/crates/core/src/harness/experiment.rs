//! Repeated independent runs of one estimator and their summary.

use std::time::Instant;

use rayon::prelude::*;

use crate::binning::DistributionEstimate;
use crate::error::{Error, Result};
use crate::mmc::run_mmc;
use crate::monte_carlo::run_mc;
use crate::problem::EvalCounter;
use crate::rng::{substream, SimRng};
use crate::smmc::{run_smmc, SubsetRecord};
use crate::subset::run_ss;

use super::config::{Method, RunConfig};
use super::report::ExperimentReport;

/// One estimator run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub p_f: f64,
    pub evals: u64,
    /// Binned distribution of the output, for the methods that produce one.
    pub distribution: Option<DistributionEstimate>,
    pub trace: Option<Vec<SubsetRecord>>,
}

/// Runs the configured method once. `cfg` should already have its budget
/// resolved.
pub fn run_once(cfg: &RunConfig, rng: &mut SimRng) -> Result<RunOutcome> {
    let bench = cfg.benchmark()?;
    let problem = &bench.problem;
    let counter = EvalCounter::new();
    let sampler = cfg.sampler(problem.dim())?;
    let m_star = || bench.grid.align_threshold(problem.threshold());
    let (p_f, distribution, trace) = match cfg.method {
        Method::Mc => {
            let r = run_mc(problem, cfg.mc.n_samples, Some(&bench.grid), cfg.parallel, rng, &counter)?;
            (r.p_f, r.estimate, None)
        }
        Method::Ss => (run_ss(problem, &cfg.ss_config(), &sampler, rng, &counter)?.p_f, None, None),
        Method::Mmc => {
            let r = run_mmc(problem, &bench.grid, m_star()?, &cfg.mmc_config(), &sampler, rng, &counter)?;
            (r.p_f, Some(r.estimate), None)
        }
        Method::Smmc => {
            let r = run_smmc(problem, &bench.grid, m_star()?, &cfg.smmc_config(), &sampler, rng, &counter)?;
            (r.p_f, Some(r.estimate), Some(r.trace))
        }
    };
    Ok(RunOutcome { p_f, evals: counter.get(), distribution, trace })
}

/// `(1/L) sum |P_l - P|^2 / P^2`.
pub fn relative_mse(estimates: &[f64], reference: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("relative MSE needs estimates"));
    }
    if !(reference > 0.0) {
        return Err(Error::InvalidArgument(format!("reference probability must be positive, got {reference}")));
    }
    let total: f64 = estimates.iter().map(|p| (p - reference).powi(2)).sum();
    Ok(total / estimates.len() as f64 / (reference * reference))
}

/// `L` independent repetitions, repetition `l` seeded from substream `l` of
/// the master seed. Writes the report and per-run CSV when an output
/// directory is configured.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cfg = cfg.resolved()?;
    let reference = cfg.reference_pf()?;
    let start = Instant::now();
    let one = |l: usize| run_once(&cfg, &mut substream(cfg.seed, l as u64));
    let runs: Vec<RunOutcome> = if cfg.parallel {
        (0..cfg.repetitions).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.repetitions).map(one).collect::<Result<_>>()?
    };
    let estimates: Vec<f64> = runs.iter().map(|r| r.p_f).collect();
    let evals: Vec<u64> = runs.iter().map(|r| r.evals).collect();
    let rmse = match reference {
        Some(p) => Some(relative_mse(&estimates, p)?),
        None => {
            eprintln!("warning: no reference probability for `{}`; RMSE omitted", cfg.problem);
            None
        }
    };
    let report = ExperimentReport {
        method: cfg.method.to_string(),
        problem: cfg.problem.clone(),
        l: cfg.repetitions,
        mean_evals: evals.iter().sum::<u64>() as f64 / evals.len() as f64,
        estimates,
        evals,
        rmse,
        ref_pf: reference,
        seed: cfg.seed,
        wallclock_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &cfg.output_dir {
        report.write_dir(dir)?;
    }
    Ok(report)
}

/// One experiment per budget, each with the method's sample size mapped from
/// that budget. Reports land in `output_dir/budget_<B>` when configured.
pub fn sweep(cfg: &RunConfig, budgets: &[f64]) -> Result<Vec<ExperimentReport>> {
    if budgets.is_empty() {
        return Err(Error::Config("sweep needs at least one budget".into()));
    }
    budgets
        .iter()
        .map(|&b| {
            let mut c = cfg.clone();
            c.apply_budget(b)?;
            c.output_dir = cfg.output_dir.as_ref().map(|d| d.join(format!("budget_{b:e}")));
            run_experiment(&c)
        })
        .collect()
}
