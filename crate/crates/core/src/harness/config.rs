//! Run configuration, read from TOML with flat dotted keys
//! (`smmc.n_per_iter = 16000`, `mmc.grid.m = 100`, ...).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{self, Benchmark};
use crate::binning::BinGrid;
use crate::error::{Error, Result};
use crate::mcmc::{ModifiedMetropolis, ProposalSpec};
use crate::mmc::{MmcConfig, ZeroCountRule};
use crate::smmc::SmmcConfig;
use crate::subset::SsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Ss,
    Mmc,
    Smmc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Ss => "ss",
            Method::Mmc => "mmc",
            Method::Smmc => "smmc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mc" => Ok(Method::Mc),
            "ss" => Ok(Method::Ss),
            "mmc" => Ok(Method::Mmc),
            "smmc" => Ok(Method::Smmc),
            other => Err(Error::Config(format!("unknown method `{other}`; expected mc, ss, mmc or smmc"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsSection {
    pub gamma: f64,
    pub n_per_level: usize,
    pub max_levels: usize,
    /// Level count assumed when a budget is split; derived from the
    /// reference probability when unset.
    pub expected_levels: Option<usize>,
}

impl Default for SsSection {
    fn default() -> Self {
        Self { gamma: 0.1, n_per_level: 10_000, max_levels: 50, expected_levels: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmcSection {
    pub k_iters: usize,
    pub n_per_iter: usize,
    pub grid: GridSection,
    pub zero_count_rule: ZeroCountRule,
}

impl Default for MmcSection {
    fn default() -> Self {
        Self { k_iters: 10, n_per_iter: 10_000, grid: GridSection::default(), zero_count_rule: ZeroCountRule::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmmcSection {
    pub alpha: f64,
    pub n_per_iter: usize,
    pub k_iters: usize,
    pub max_subsets: usize,
    /// Subset count assumed when a budget is split.
    pub expected_subsets: usize,
}

impl Default for SmmcSection {
    fn default() -> Self {
        Self { alpha: 0.2, n_per_iter: 10_000, k_iters: 5, max_subsets: 50, expected_subsets: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSection {
    pub proposal_half_width: f64,
    pub burn_in: usize,
    pub steps_per_chain: Option<usize>,
}

impl Default for McmcSection {
    fn default() -> Self {
        Self { proposal_half_width: 1.0, burn_in: 0, steps_per_chain: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_samples: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self { n_samples: 100_000 }
    }
}

fn default_repetitions() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub method: Method,
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Overrides the problem's built-in threshold.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Reference failure probability; the built-in oracle is used when unset.
    #[serde(default)]
    pub ref_pf: Option<f64>,
    /// Total evaluation budget; when set it overrides the per-method sample sizes.
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub ss: SsSection,
    #[serde(default)]
    pub mmc: MmcSection,
    #[serde(default)]
    pub smmc: SmmcSection,
    #[serde(default)]
    pub mcmc: McmcSection,
    #[serde(default)]
    pub mc: McSection,
}

impl RunConfig {
    pub fn new(problem: &str, method: Method, seed: u64) -> Self {
        Self {
            problem: problem.to_owned(),
            method,
            seed,
            repetitions: default_repetitions(),
            output_dir: None,
            threshold: None,
            ref_pf: None,
            budget: None,
            parallel: false,
            ss: SsSection::default(),
            mmc: MmcSection::default(),
            smmc: SmmcSection::default(),
            mcmc: McmcSection::default(),
            mc: McSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !benchmarks::BUILTIN_NAMES.contains(&self.problem.as_str()) {
            return Err(Error::Config(format!(
                "unknown problem `{}`; expected one of {}",
                self.problem,
                benchmarks::BUILTIN_NAMES.join(", ")
            )));
        }
        if let Some(b) = self.budget {
            if !(b.is_finite() && b >= 1.0) {
                return Err(Error::Config(format!("budget must be a positive count, got {b}")));
            }
        }
        if let Some(p) = self.ref_pf {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(format!("ref_pf must lie in (0, 1], got {p}")));
            }
        }
        Ok(())
    }

    /// The benchmark with threshold and grid overrides applied.
    pub fn benchmark(&self) -> Result<Benchmark> {
        let mut bench = benchmarks::builtin(&self.problem)?;
        if let Some(t) = self.threshold {
            bench = bench.with_threshold(t);
        }
        let g = &self.mmc.grid;
        if g.a.is_some() || g.b.is_some() || g.m.is_some() {
            bench.grid = BinGrid::new(
                g.a.unwrap_or(bench.grid.lower()),
                g.b.unwrap_or(bench.grid.upper()),
                g.m.unwrap_or(bench.grid.len()),
            )?;
        }
        Ok(bench)
    }

    /// Explicit `ref_pf`, else the built-in oracle at the effective threshold.
    pub fn reference_pf(&self) -> Result<Option<f64>> {
        if self.ref_pf.is_some() {
            return Ok(self.ref_pf);
        }
        let bench = self.benchmark()?;
        benchmarks::reference_pf(&self.problem, bench.problem.threshold())
    }

    pub fn sampler(&self, dim: usize) -> Result<ModifiedMetropolis> {
        let mut mm = ModifiedMetropolis::new(ProposalSpec::uniform(dim, self.mcmc.proposal_half_width)?);
        mm.burn_in = self.mcmc.burn_in;
        mm.parallel = self.parallel;
        Ok(mm)
    }

    pub fn ss_config(&self) -> SsConfig {
        SsConfig {
            gamma: self.ss.gamma,
            n_per_level: self.ss.n_per_level,
            max_levels: self.ss.max_levels,
            steps_per_chain: self.mcmc.steps_per_chain,
        }
    }

    pub fn mmc_config(&self) -> MmcConfig {
        MmcConfig {
            k_iters: self.mmc.k_iters,
            n_per_iter: self.mmc.n_per_iter,
            zero_count_rule: self.mmc.zero_count_rule,
            steps_per_chain: self.mcmc.steps_per_chain,
        }
    }

    pub fn smmc_config(&self) -> SmmcConfig {
        SmmcConfig {
            alpha: self.smmc.alpha,
            n_per_iter: self.smmc.n_per_iter,
            k_iters: self.smmc.k_iters,
            max_subsets: self.smmc.max_subsets,
            zero_count_rule: self.mmc.zero_count_rule,
            steps_per_chain: self.mcmc.steps_per_chain,
        }
    }

    /// Sets the active method's sample size so that its expected total
    /// number of evaluations is about `budget`.
    ///
    /// * mc: `n = budget`
    /// * mmc: `n = budget / (K + 1)`
    /// * smmc: `n = budget / ((K + 1) * expected_subsets)`
    /// * ss: `n = budget / levels`, with `levels = ceil(ln P / ln gamma)`
    ///   from the reference probability unless `ss.expected_levels` is set
    pub fn apply_budget(&mut self, budget: f64) -> Result<()> {
        if !(budget.is_finite() && budget >= 1.0) {
            return Err(Error::Config(format!("budget must be a positive count, got {budget}")));
        }
        let share = |parts: usize| ((budget / parts.max(1) as f64).round() as usize).max(1);
        match self.method {
            Method::Mc => self.mc.n_samples = share(1),
            Method::Mmc => self.mmc.n_per_iter = share(self.mmc.k_iters + 1),
            Method::Smmc => self.smmc.n_per_iter = share((self.smmc.k_iters + 1) * self.smmc.expected_subsets),
            Method::Ss => {
                let levels = match (self.ss.expected_levels, self.reference_pf()?) {
                    (Some(l), _) => l,
                    (None, Some(p)) if p > 0.0 && p < 1.0 => (p.ln() / self.ss.gamma.ln()).ceil().max(1.0) as usize,
                    _ => 5,
                };
                self.ss.n_per_level = share(levels);
            }
        }
        self.budget = Some(budget);
        Ok(())
    }

    /// Budget from the config file applied to a copy.
    pub fn resolved(&self) -> Result<Self> {
        let mut cfg = self.clone();
        if let Some(b) = self.budget {
            cfg.apply_budget(b)?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let text = r#"
            problem = "norm10"
            method = "smmc"
            seed = 42
            smmc.n_per_iter = 16000
            smmc.k_iters = 2
            mmc.grid.m = 50
            mmc.zero_count_rule = "carry-forward"
            mcmc.proposal_half_width = 0.5
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.method, Method::Smmc);
        assert_eq!(cfg.repetitions, 20);
        assert_eq!(cfg.smmc.n_per_iter, 16000);
        assert_eq!(cfg.smmc.alpha, 0.2);
        assert_eq!(cfg.mmc.zero_count_rule, ZeroCountRule::CarryForward);
        assert_eq!(cfg.benchmark().unwrap().grid.len(), 50);
        assert_eq!(cfg.sampler(10).unwrap().proposal.half_widths()[0], 0.5);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "problem = \"norm10\"\nmethod = \"smmc\"",
            "problem = \"nope\"\nmethod = \"smmc\"\nseed = 1",
            "problem = \"norm10\"\nmethod = \"xyz\"\nseed = 1",
            "problem = \"norm10\"\nmethod = \"mc\"\nseed = 1\nrepetitions = 0",
            "problem = \"norm10\"\nmethod = \"mc\"\nseed = 1\nsmmc.typo = 3",
        ] {
            assert!(matches!(RunConfig::from_toml_str(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn budget_mapping() {
        let mut cfg = RunConfig::new("norm10", Method::Mmc, 0);
        cfg.apply_budget(1e5).unwrap();
        assert_eq!(cfg.mmc.n_per_iter, 9091);
        cfg.method = Method::Smmc;
        cfg.smmc.k_iters = 2;
        cfg.apply_budget(1e5).unwrap();
        assert_eq!(cfg.smmc.n_per_iter, 16667);
        cfg.method = Method::Ss;
        cfg.apply_budget(1.2e5).unwrap();
        // P = 4.76e-12 needs 12 levels at gamma = 0.1.
        assert_eq!(cfg.ss.n_per_level, 10_000);
        cfg.method = Method::Mc;
        cfg.apply_budget(2e4).unwrap();
        assert_eq!(cfg.mc.n_samples, 20_000);
    }

    #[test]
    fn reference_follows_threshold_override() {
        let mut cfg = RunConfig::new("norm10", Method::Mc, 0);
        cfg.threshold = Some(9.0);
        let p = cfg.reference_pf().unwrap().unwrap();
        assert!((p - 0.532_103_576_374_715).abs() < 1e-12);
        cfg.ref_pf = Some(0.5);
        assert_eq!(cfg.reference_pf().unwrap(), Some(0.5));
        assert_eq!(RunConfig::new("quarter-car", Method::Mc, 0).reference_pf().unwrap(), None);
    }
}
