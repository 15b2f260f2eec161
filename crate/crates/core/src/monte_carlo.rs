//! Plain Monte Carlo: independent prior draws and an indicator average.

use rayon::prelude::*;

use crate::binning::{BinGrid, DistributionEstimate};
use crate::error::{Error, Result};
use crate::problem::{EvalCounter, ProblemDefinition};
use crate::rng::{fork_seed, substream, SimRng};

/// Draws per substream block; fixes the random stream layout so that
/// sequential and parallel runs agree.
const BLOCK: usize = 4096;

#[derive(Debug, Clone)]
pub struct McResult {
    pub p_f: f64,
    /// Histogram-based bin probabilities, when a grid was supplied.
    pub estimate: Option<DistributionEstimate>,
    pub n: usize,
}

pub fn run_mc(
    problem: &ProblemDefinition,
    n: usize,
    grid: Option<&BinGrid>,
    parallel: bool,
    rng: &mut SimRng,
    counter: &EvalCounter,
) -> Result<McResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least one sample".into()));
    }
    let base = fork_seed(rng);
    let y_star = problem.threshold();
    let m = grid.map_or(0, BinGrid::len);
    let block = |b: usize| -> (u64, Vec<u64>) {
        let mut r = substream(base, b as u64);
        let len = BLOCK.min(n - b * BLOCK);
        let mut hits = 0;
        let mut counts = vec![0u64; m];
        for _ in 0..len {
            let x = problem.sample_prior_one(&mut r);
            let y = problem.eval_unchecked(&x, counter);
            if y > y_star {
                hits += 1;
            }
            if let Some(i) = grid.and_then(|g| g.bin_index(y)) {
                counts[i] += 1;
            }
        }
        (hits, counts)
    };
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<(u64, Vec<u64>)> =
        if parallel { (0..blocks).into_par_iter().map(block).collect() } else { (0..blocks).map(block).collect() };
    let mut hits = 0;
    let mut counts = vec![0u64; m];
    for (h, c) in parts {
        hits += h;
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
    }
    let estimate = match grid {
        Some(g) => Some(DistributionEstimate::new(*g, counts.iter().map(|&c| c as f64 / n as f64).collect())?),
        None => None,
    };
    Ok(McResult { p_f: hits as f64 / n as f64, estimate, n })
}
