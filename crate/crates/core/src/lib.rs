//! Rare-event failure probability estimation.
//!
//! Four estimators of `P(f(X) > y*)` for a scalar performance function `f`
//! of a random vector `X` with independent marginals:
//!
//! * [`monte_carlo`]: plain Monte Carlo,
//! * [`subset`]: subset simulation,
//! * [`mmc`]: multicanonical Monte Carlo over a fixed output grid,
//! * [`smmc`]: subset multicanonical Monte Carlo, which runs MMC on a
//!   shrinking sequence of output intervals and also reconstructs the
//!   distribution of `f(X)` down to the failure region.
//!
//! All samplers share the modified Metropolis kernel in [`mcmc`] and are
//! deterministic given a seed. [`benchmarks`] holds the built-in test
//! problems and their oracles, and [`harness`] the experiment driver used by
//! the `smmc` binary.

pub mod benchmarks;
pub mod binning;
pub mod error;
pub mod harness;
pub mod mcmc;
pub mod mmc;
pub mod monte_carlo;
pub mod problem;
pub mod rng;
pub mod smmc;
pub mod subset;

pub use binning::{BinGrid, DistributionEstimate};
pub use error::{Error, Result};
pub use mcmc::{ChainState, ModifiedMetropolis, ProposalSpec, TargetSpec};
pub use mmc::{MmcConfig, ThetaTable, ZeroCountRule};
pub use problem::{EvalCounter, Marginal, ProblemDefinition, StdNormal};
pub use smmc::{SmmcConfig, SmmcResult};
pub use subset::{SsConfig, SsResult};
