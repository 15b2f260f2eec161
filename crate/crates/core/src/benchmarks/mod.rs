//! Built-in benchmark problems with their reference failure probabilities.

pub mod norm;
pub mod quadrature;
pub mod quarter_car;
pub mod two_circle;

use statrs::function::erf::erfc;

use crate::binning::BinGrid;
use crate::error::{Error, Result};
use crate::problem::ProblemDefinition;

pub use norm::{chi2_tail, norm_squared_perform};
pub use quarter_car::{quarter_car_perform, QuarterCarParams};
pub use two_circle::{two_circle_exact_pf, two_circle_exact_pf_with_radius, two_circle_perform};

pub const BUILTIN_NAMES: [&str; 4] = ["two-circle", "norm10", "quarter-car", "gauss1d"];

/// Default failure threshold for the quarter-car problem.
pub const QUARTER_CAR_THRESHOLD: f64 = 0.024;

/// A registered problem with its default output grid.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub problem: ProblemDefinition,
    pub grid: BinGrid,
}

impl Benchmark {
    /// Reference failure probability for the problem's current threshold,
    /// when an oracle exists.
    pub fn reference_pf(&self) -> Result<Option<f64>> {
        reference_pf(self.problem.name(), self.problem.threshold())
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.problem = self.problem.with_threshold(threshold);
        self
    }
}

pub fn two_circle_problem() -> Result<Benchmark> {
    Ok(Benchmark {
        problem: ProblemDefinition::standard_normal("two-circle", 2, two_circle_perform, -two_circle::FAILURE_RADIUS)?,
        grid: BinGrid::new(-12.0, 0.0, 120)?,
    })
}

pub fn norm10_problem() -> Result<Benchmark> {
    Ok(Benchmark {
        problem: ProblemDefinition::standard_normal("norm10", 10, norm_squared_perform, 75.0)?,
        grid: BinGrid::new(0.0, 100.0, 100)?,
    })
}

/// 100 standard normal road inputs; the noise scale is applied inside.
pub fn quarter_car_problem() -> Result<Benchmark> {
    let params = QuarterCarParams::default();
    let perform = move |u: &[f64]| params.max_deflection(u).unwrap_or(f64::NAN);
    Ok(Benchmark {
        problem: ProblemDefinition::standard_normal("quarter-car", params.steps, perform, QUARTER_CAR_THRESHOLD)?,
        grid: BinGrid::new(0.0, 0.03, 150)?,
    })
}

/// `f(x) = x` in one dimension.
pub fn gauss1d_problem() -> Result<Benchmark> {
    Ok(Benchmark {
        problem: ProblemDefinition::standard_normal("gauss1d", 1, |x| x[0], 4.0)?,
        grid: BinGrid::new(-5.0, 5.0, 50)?,
    })
}

pub fn builtin(name: &str) -> Result<Benchmark> {
    match name {
        "two-circle" => two_circle_problem(),
        "norm10" => norm10_problem(),
        "quarter-car" => quarter_car_problem(),
        "gauss1d" => gauss1d_problem(),
        other => Err(Error::Config(format!("unknown problem `{other}`; expected one of {}", BUILTIN_NAMES.join(", ")))),
    }
}

/// Standard normal upper tail.
pub fn normal_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// Reference `P(f > threshold)` for a built-in problem; `None` when no
/// oracle exists.
pub fn reference_pf(name: &str, threshold: f64) -> Result<Option<f64>> {
    match name {
        "two-circle" => {
            if threshold >= 0.0 {
                Ok(Some(0.0))
            } else {
                two_circle_exact_pf_with_radius(-threshold).map(Some)
            }
        }
        "norm10" => Ok(Some(chi2_tail(10, threshold))),
        "gauss1d" => Ok(Some(normal_tail(threshold))),
        "quarter-car" => Ok(None),
        other => Err(Error::Config(format!("unknown problem `{other}`"))),
    }
}
