//! Probabilistic failure problems: an input random vector with independent
//! marginals, a scalar performance function and a failure threshold.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A univariate distribution usable as one component of the prior.
pub trait Marginal: Send + Sync {
    /// Log density; `f64::NEG_INFINITY` where the density is zero.
    fn ln_pdf(&self, x: f64) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;
}

/// The standard normal N(0, 1).
#[derive(Debug, Clone, Copy, Default)]
pub struct StdNormal;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

impl Marginal for StdNormal {
    fn ln_pdf(&self, x: f64) -> f64 {
        -0.5 * x * x - LN_SQRT_2PI
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        StandardNormal.sample(rng)
    }
}

type LnPdfFn = dyn Fn(f64) -> f64 + Send + Sync;
type SamplerFn = dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync;

/// A user supplied marginal given as a log-density / sampler pair.
#[derive(Clone)]
pub struct CustomMarginal {
    ln_pdf: Arc<LnPdfFn>,
    sampler: Arc<SamplerFn>,
}

impl CustomMarginal {
    pub fn new(
        ln_pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sampler: impl Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { ln_pdf: Arc::new(ln_pdf), sampler: Arc::new(sampler) }
    }
}

impl Marginal for CustomMarginal {
    fn ln_pdf(&self, x: f64) -> f64 {
        (self.ln_pdf)(x)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        (self.sampler)(rng)
    }
}

/// Counts performance-function evaluations. Shared between chains.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub(crate) fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

type PerformFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A failure problem `P(f(X) > y*)` with `X` drawn from a product prior.
#[derive(Clone)]
pub struct ProblemDefinition {
    name: String,
    perform: Arc<PerformFn>,
    marginals: Vec<Arc<dyn Marginal>>,
    threshold: f64,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("threshold", &self.threshold)
            .finish()
    }
}

impl ProblemDefinition {
    pub fn new(
        name: impl Into<String>,
        perform: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        marginals: Vec<Arc<dyn Marginal>>,
        threshold: f64,
    ) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidArgument("a problem needs at least one input dimension".into()));
        }
        if !threshold.is_finite() {
            return Err(Error::InvalidArgument(format!("threshold must be finite, got {threshold}")));
        }
        Ok(Self { name: name.into(), perform: Arc::new(perform), marginals, threshold })
    }

    /// A problem with `dim` independent standard normal inputs.
    pub fn standard_normal(
        name: impl Into<String>,
        dim: usize,
        perform: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        threshold: f64,
    ) -> Result<Self> {
        let marginal: Arc<dyn Marginal> = Arc::new(StdNormal);
        Self::new(name, perform, vec![marginal; dim], threshold)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn marginals(&self) -> &[Arc<dyn Marginal>] {
        &self.marginals
    }

    /// Same problem with a different failure threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        Self { threshold, ..self.clone() }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Evaluates the performance function, counting the call.
    pub fn evaluate(&self, x: &[f64], counter: &EvalCounter) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x, counter))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], counter: &EvalCounter) -> f64 {
        counter.bump();
        (self.perform)(x)
    }

    /// `sum_i ln phi_i(x_i)`; negative infinity outside the support.
    pub fn prior_log_density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.marginals.iter().zip(x).map(|(m, &xi)| m.ln_pdf(xi)).sum())
    }

    pub fn sample_prior_one(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.marginals.iter().map(|m| m.sample(rng)).collect()
    }

    pub fn sample_prior(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        Ok((0..n).map(|_| self.sample_prior_one(rng)).collect())
    }
}
