//! Component-wise modified Metropolis kernel with multi-chain seeding.
//!
//! The kernel targets densities proportional to `pi(x) / Theta(f(x))` on an
//! output domain `D`. Each step proposes every coordinate independently from
//! a symmetric window, accepts coordinates against the prior marginal ratio,
//! then evaluates the performance function once and accepts the candidate
//! with probability `min(1, Theta(x) / Theta(candidate))`, rejecting outright
//! when the candidate leaves `D`.

use rand::Rng;
use rayon::prelude::*;

use crate::binning::BinGrid;
use crate::error::{Error, Result};
use crate::mmc::ThetaTable;
use crate::problem::{EvalCounter, ProblemDefinition};
use crate::rng::{fork_seed, substream, SimRng};

/// Acceptance rates outside this band are reported as suspicious.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.05, 0.95);

/// Per-dimension uniform proposal windows `[x_i - w_i, x_i + w_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalSpec {
    half_widths: Vec<f64>,
}

impl ProposalSpec {
    pub fn uniform(dim: usize, half_width: f64) -> Result<Self> {
        Self::per_dimension(vec![half_width; dim])
    }

    pub fn per_dimension(half_widths: Vec<f64>) -> Result<Self> {
        if half_widths.is_empty() || half_widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("proposal half-widths must be positive and finite".into()));
        }
        Ok(Self { half_widths })
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }
}

/// A chain position with its cached performance value.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub y: f64,
}

/// The stationary law of the kernel, restricted to an output domain.
#[derive(Debug, Clone, Copy)]
pub enum TargetSpec<'a> {
    /// The prior itself, no restriction.
    Prior,
    /// The prior conditioned on `f(x) > threshold`.
    Above(f64),
    /// The multicanonical law `pi(x) / Theta(f(x))` on the table's active bins.
    Binned { grid: &'a BinGrid, theta: &'a ThetaTable },
}

impl TargetSpec<'_> {
    /// `ln Theta(y)` for `y` inside the domain, `None` outside.
    pub fn ln_weight(&self, y: f64) -> Option<f64> {
        match self {
            TargetSpec::Prior => (!y.is_nan()).then_some(0.0),
            TargetSpec::Above(t) => (y > *t).then_some(0.0),
            TargetSpec::Binned { grid, theta } => grid.bin_index(y).and_then(|i| theta.ln_value(i)),
        }
    }

    pub fn contains(&self, y: f64) -> bool {
        self.ln_weight(y).is_some()
    }
}

/// What a single kernel step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Every coordinate proposal was rejected; no evaluation was spent.
    Unchanged,
    Accepted,
    /// The candidate was evaluated but rejected (outside `D` or by the weight test).
    Rejected,
}

/// Modified Metropolis sampler settings.
#[derive(Debug, Clone)]
pub struct ModifiedMetropolis {
    pub proposal: ProposalSpec,
    /// Steps discarded at the start of every chain.
    pub burn_in: usize,
    /// Run chains on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ChainRun {
    /// Concatenated chain trajectories, chain by chain.
    pub samples: Vec<ChainState>,
    pub accepted: u64,
    pub evaluated: u64,
    pub steps: u64,
}

impl ChainRun {
    /// Fraction of steps that moved the chain.
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    pub fn acceptance_in_band(&self) -> bool {
        let r = self.acceptance_rate();
        r >= ACCEPTANCE_BAND.0 && r <= ACCEPTANCE_BAND.1
    }
}

impl ModifiedMetropolis {
    pub fn new(proposal: ProposalSpec) -> Self {
        Self { proposal, burn_in: 0, parallel: false }
    }

    /// One kernel step; `state` is updated in place.
    pub fn step<R: Rng + ?Sized>(
        &self,
        problem: &ProblemDefinition,
        state: &mut ChainState,
        target: &TargetSpec<'_>,
        rng: &mut R,
        counter: &EvalCounter,
    ) -> Result<StepOutcome> {
        if state.x.len() != problem.dim() || self.proposal.half_widths.len() != problem.dim() {
            return Err(Error::DimensionMismatch { expected: problem.dim(), got: state.x.len() });
        }
        let ln_theta_x = target
            .ln_weight(state.y)
            .ok_or_else(|| Error::OutOfDomain(format!("current performance value {} is outside the target domain", state.y)))?;
        let mut candidate = state.x.clone();
        if !self.propose(problem, &mut candidate, rng) {
            return Ok(StepOutcome::Unchanged);
        }
        let y = problem.eval_unchecked(&candidate, counter);
        let Some(ln_theta_c) = target.ln_weight(y) else {
            return Ok(StepOutcome::Rejected);
        };
        let ln_r = ln_theta_x - ln_theta_c;
        if ln_r >= 0.0 || rng.random::<f64>().ln() < ln_r {
            state.x = candidate;
            state.y = y;
            Ok(StepOutcome::Accepted)
        } else {
            Ok(StepOutcome::Rejected)
        }
    }

    /// Coordinate-wise proposal and prior-ratio acceptance. Returns whether
    /// any coordinate moved.
    fn propose<R: Rng + ?Sized>(&self, problem: &ProblemDefinition, x: &mut [f64], rng: &mut R) -> bool {
        let mut moved = false;
        for ((xi, marginal), &w) in x.iter_mut().zip(problem.marginals()).zip(&self.proposal.half_widths) {
            let xi_new = *xi + rng.random_range(-w..w);
            let ln_r = marginal.ln_pdf(xi_new) - marginal.ln_pdf(*xi);
            if ln_r >= 0.0 || rng.random::<f64>().ln() < ln_r {
                *xi = xi_new;
                moved = true;
            }
        }
        moved
    }

    /// Runs one chain per seed for `burn_in + steps_per_chain` steps and
    /// returns the recorded states, rejections included.
    ///
    /// Chain `c` draws from substream `c` of a seed forked from `rng`.
    pub fn run_chains(
        &self,
        problem: &ProblemDefinition,
        seeds: &[ChainState],
        steps_per_chain: usize,
        target: &TargetSpec<'_>,
        rng: &mut SimRng,
        counter: &EvalCounter,
    ) -> Result<ChainRun> {
        if steps_per_chain == 0 {
            return Err(Error::InvalidArgument("steps per chain must be at least 1".into()));
        }
        if let Some(bad) = seeds.iter().find(|s| !target.contains(s.y)) {
            return Err(Error::OutOfDomain(format!("seed with performance value {} is outside the target domain", bad.y)));
        }
        let base = fork_seed(rng);
        let run_one = |(c, seed): (usize, &ChainState)| -> Result<ChainRun> {
            let mut chain_rng = substream(base, c as u64);
            let mut state = seed.clone();
            let mut out = ChainRun { samples: Vec::with_capacity(steps_per_chain), ..Default::default() };
            for t in 0..self.burn_in + steps_per_chain {
                let outcome = self.step(problem, &mut state, target, &mut chain_rng, counter)?;
                if t < self.burn_in {
                    continue;
                }
                out.steps += 1;
                match outcome {
                    StepOutcome::Accepted => {
                        out.accepted += 1;
                        out.evaluated += 1;
                    }
                    StepOutcome::Rejected => out.evaluated += 1,
                    StepOutcome::Unchanged => {}
                }
                out.samples.push(state.clone());
            }
            Ok(out)
        };
        let runs: Vec<ChainRun> = if self.parallel {
            seeds.par_iter().enumerate().map(run_one).collect::<Result<_>>()?
        } else {
            seeds.iter().enumerate().map(run_one).collect::<Result<_>>()?
        };
        let mut merged = ChainRun { samples: Vec::with_capacity(seeds.len() * steps_per_chain), ..Default::default() };
        for r in runs {
            merged.samples.extend(r.samples);
            merged.accepted += r.accepted;
            merged.evaluated += r.evaluated;
            merged.steps += r.steps;
        }
        Ok(merged)
    }
}

/// Picks one sample uniformly at random from every occupied bin, in
/// ascending bin order. Samples outside the grid are ignored.
pub fn select_seeds<R: Rng + ?Sized>(samples: &[ChainState], grid: &BinGrid, rng: &mut R) -> Result<Vec<ChainState>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("seed selection needs at least one sample"));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); grid.len()];
    for (k, s) in samples.iter().enumerate() {
        if let Some(i) = grid.bin_index(s.y) {
            members[i].push(k);
        }
    }
    let seeds: Vec<ChainState> = members
        .iter()
        .filter(|m| !m.is_empty())
        .map(|m| samples[m[rng.random_range(0..m.len())]].clone())
        .collect();
    if seeds.is_empty() {
        return Err(Error::EmptyInput("no sample falls inside the bin grid"));
    }
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn identity_1d() -> ProblemDefinition {
        ProblemDefinition::standard_normal("id", 1, |x| x[0], 0.0).unwrap()
    }

    fn sampler(w: f64, d: usize) -> ModifiedMetropolis {
        ModifiedMetropolis::new(ProposalSpec::uniform(d, w).unwrap())
    }

    #[test]
    fn proposal_validation() {
        assert!(ProposalSpec::uniform(2, 0.0).is_err());
        assert!(ProposalSpec::per_dimension(vec![1.0, f64::NAN]).is_err());
        assert!(ProposalSpec::per_dimension(vec![]).is_err());
    }

    #[test]
    fn unchanged_step_spends_no_evaluation() {
        // From far in the tail, every move toward larger |x| is almost surely
        // rejected; find a step where the coordinate proposal is refused.
        let p = identity_1d();
        let mm = sampler(0.01, 1);
        let c = EvalCounter::new();
        let mut rng = seeded(5);
        let mut saw_unchanged = false;
        for _ in 0..200 {
            let mut s = ChainState { x: vec![30.0], y: 30.0 };
            let before = c.get();
            let out = mm.step(&p, &mut s, &TargetSpec::Prior, &mut rng, &c).unwrap();
            if out == StepOutcome::Unchanged {
                saw_unchanged = true;
                assert_eq!(s, ChainState { x: vec![30.0], y: 30.0 });
                assert_eq!(c.get(), before);
            } else {
                assert_eq!(c.get(), before + 1);
            }
        }
        assert!(saw_unchanged);
    }

    #[test]
    fn constant_weight_accepts_every_in_domain_candidate() {
        let p = identity_1d();
        let grid = BinGrid::new(-10.0, 10.0, 20).unwrap();
        let theta = ThetaTable::uniform(0, grid.len());
        let target = TargetSpec::Binned { grid: &grid, theta: &theta };
        let mm = sampler(1.0, 1);
        let c = EvalCounter::new();
        let mut rng = seeded(1);
        let mut s = ChainState { x: vec![0.0], y: 0.0 };
        for _ in 0..1000 {
            let out = mm.step(&p, &mut s, &target, &mut rng, &c).unwrap();
            assert_ne!(out, StepOutcome::Rejected);
        }
    }

    #[test]
    fn step_rejects_state_outside_domain() {
        let p = identity_1d();
        let mm = sampler(1.0, 1);
        let mut s = ChainState { x: vec![-1.0], y: -1.0 };
        let r = mm.step(&p, &mut s, &TargetSpec::Above(0.0), &mut seeded(0), &EvalCounter::new());
        assert!(matches!(r, Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn chain_cardinality_and_domain_preservation() {
        let p = identity_1d();
        let mm = sampler(1.0, 1);
        let c = EvalCounter::new();
        let target = TargetSpec::Above(0.5);
        let seed = ChainState { x: vec![1.0], y: 1.0 };
        let run = mm.run_chains(&p, &[seed.clone()], 50, &target, &mut seeded(2), &c).unwrap();
        assert_eq!(run.samples.len(), 50);
        let seeds = vec![seed; 5];
        let run = mm.run_chains(&p, &seeds, 20, &target, &mut seeded(2), &c).unwrap();
        assert_eq!(run.samples.len(), 100);
        assert!(run.samples.iter().all(|s| s.y > 0.5 && s.x[0] == s.y));
        assert!(mm.run_chains(&p, &seeds, 0, &target, &mut seeded(2), &c).is_err());
        let outside = vec![ChainState { x: vec![0.0], y: 0.0 }];
        assert!(mm.run_chains(&p, &outside, 5, &target, &mut seeded(2), &c).is_err());
    }

    #[test]
    fn evaluation_count_matches_kernel_bookkeeping() {
        let p = ProblemDefinition::standard_normal("n", 3, |x| x.iter().map(|v| v * v).sum(), 0.0).unwrap();
        let mm = sampler(1.0, 3);
        let c = EvalCounter::new();
        let seeds = vec![ChainState { x: vec![0.5; 3], y: 0.75 }; 4];
        let run = mm.run_chains(&p, &seeds, 250, &TargetSpec::Above(0.5), &mut seeded(8), &c).unwrap();
        assert_eq!(c.get(), run.evaluated);
        assert_eq!(run.steps, 1000);
    }

    #[test]
    fn parallel_and_sequential_chains_agree_bitwise() {
        let p = ProblemDefinition::standard_normal("n", 4, |x| x.iter().map(|v| v * v).sum(), 0.0).unwrap();
        let mut mm = sampler(1.0, 4);
        let seeds: Vec<ChainState> =
            (0..8).map(|k| ChainState { x: vec![1.0 + k as f64 * 0.1; 4], y: 4.0 * (1.0 + k as f64 * 0.1).powi(2) }).collect();
        let c1 = EvalCounter::new();
        let a = mm.run_chains(&p, &seeds, 100, &TargetSpec::Above(2.0), &mut seeded(3), &c1).unwrap();
        mm.parallel = true;
        let c2 = EvalCounter::new();
        let b = mm.run_chains(&p, &seeds, 100, &TargetSpec::Above(2.0), &mut seeded(3), &c2).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(c1.get(), c2.get());
    }

    #[test]
    fn seed_selection_one_per_occupied_bin() {
        let grid = BinGrid::new(0.0, 10.0, 10).unwrap();
        let mk = |y: f64| ChainState { x: vec![y], y };
        let samples = vec![mk(3.5), mk(7.2), mk(7.8), mk(9.1)];
        let seeds = select_seeds(&samples, &grid, &mut seeded(0)).unwrap();
        let bins: Vec<usize> = seeds.iter().map(|s| grid.bin_index(s.y).unwrap()).collect();
        assert_eq!(bins, vec![3, 7, 9]);
        let same = vec![mk(2.1), mk(2.2), mk(2.9)];
        assert_eq!(select_seeds(&same, &grid, &mut seeded(0)).unwrap().len(), 1);
        assert!(select_seeds(&[], &grid, &mut seeded(0)).is_err());
    }

    /// Two-state analogue of the coordinate step followed by the weight
    /// step: the composite transition matrix must satisfy detailed balance
    /// with respect to `pi / Theta`.
    #[test]
    fn two_state_detailed_balance() {
        for (pi, theta) in [([0.7f64, 0.3], [0.2f64, 0.8]), ([0.7, 0.3], [0.9, 0.1]), ([0.5, 0.5], [0.3, 0.7]), ([0.1, 0.9], [1.0, 1.0])] {
            // Symmetric proposal: always propose the other state.
            let move_prob = |from: usize, to: usize| (pi[to] / pi[from]).min(1.0) * (theta[from] / theta[to]).min(1.0);
            let z = pi[0] / theta[0] + pi[1] / theta[1];
            let (q0, q1) = (pi[0] / theta[0] / z, pi[1] / theta[1] / z);
            assert!((q0 * move_prob(0, 1) - q1 * move_prob(1, 0)).abs() < 1e-12);
        }
    }
}
