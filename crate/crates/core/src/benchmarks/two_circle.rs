//! Two disjoint unit disks centred at `(8, 2)` and `(-8, 2)` under a
//! bivariate standard normal prior.
//!
//! The performance value is the negated distance to the nearer centre, so
//! failure `min distance < r` reads `f(x) > -r`.

use std::f64::consts::PI;

use super::quadrature::integrate;
use crate::error::{Error, Result};

pub const RIGHT_CENTER: [f64; 2] = [8.0, 2.0];
pub const LEFT_CENTER: [f64; 2] = [-8.0, 2.0];
pub const FAILURE_RADIUS: f64 = 1.0;

const ABS_TOL: f64 = 1e-17;
const REL_TOL: f64 = 1e-10;

pub fn two_circle_perform(x: &[f64]) -> f64 {
    let d = |c: [f64; 2]| (x[0] - c[0]).hypot(x[1] - c[1]);
    -d(RIGHT_CENTER).min(d(LEFT_CENTER))
}

/// Standard normal mass of the disk of radius `radius` around `center`,
/// integrated in polar coordinates about the centre.
pub fn disk_probability(center: [f64; 2], radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {radius}")));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    let density = |x: f64, y: f64| (-(x * x + y * y) / 2.0).exp() / (2.0 * PI);
    let ring = |r: f64| -> f64 {
        let inner = |theta: f64| density(center[0] + r * theta.cos(), center[1] + r * theta.sin());
        match integrate(&inner, 0.0, 2.0 * PI, 1e-300, 1e-13) {
            Ok((v, _)) => v * r,
            Err(_) => f64::NAN,
        }
    };
    let (v, _) = integrate(&ring, 0.0, radius, ABS_TOL, REL_TOL)?;
    Ok(v)
}

/// `P(min distance < radius)` for the two-disk problem; the disks are
/// disjoint for `radius <= 8`.
pub fn two_circle_exact_pf_with_radius(radius: f64) -> Result<f64> {
    if radius > 8.0 {
        return Err(Error::InvalidArgument("disks overlap for radius above 8".into()));
    }
    Ok(disk_probability(RIGHT_CENTER, radius)? + disk_probability(LEFT_CENTER, radius)?)
}

pub fn two_circle_exact_pf() -> Result<f64> {
    two_circle_exact_pf_with_radius(FAILURE_RADIUS)
}
