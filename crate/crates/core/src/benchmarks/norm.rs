//! `f(x) = |x|^2` under a standard normal prior, and the chi-square tail oracle.

use statrs::function::gamma::gamma_ur;

/// Sum of squares.
pub fn norm_squared_perform(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `P(chi^2_d > t)`. Even `d` uses the finite Poisson sum, odd `d` the
/// regularized upper incomplete gamma function.
pub fn chi2_tail(d: u32, t: f64) -> f64 {
    assert!(d >= 1, "degrees of freedom must be positive");
    if t <= 0.0 {
        return 1.0;
    }
    let half = 0.5 * t;
    if d % 2 == 0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..d / 2 {
            term *= half / k as f64;
            sum += term;
        }
        (-half).exp() * sum
    } else {
        gamma_ur(0.5 * d as f64, half)
    }
}
