//! Nonlinear quarter-car suspension driven by white road noise.
//!
//! ```text
//! m_s x1'' = -k_s (x1 - x2)^3 - c (x1' - x2')
//! m_u x2'' =  k_s (x1 - x2)^3 + c (x1' - x2') + k_u (z(t) - x2)
//! ```
//!
//! The road input `z` is piecewise constant over each integration step and
//! equals `sigma * u_k` for a standard normal input vector `u`. The output is
//! the largest suspension deflection `|x1 - x2|` over the integration grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterCarParams {
    pub sprung_mass: f64,
    pub unsprung_mass: f64,
    pub spring_stiffness: f64,
    pub tire_stiffness: f64,
    pub damping: f64,
    pub noise_sigma: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl Default for QuarterCarParams {
    fn default() -> Self {
        Self {
            sprung_mass: 20.0,
            unsprung_mass: 40.0,
            spring_stiffness: 400.0,
            tire_stiffness: 2000.0,
            damping: 600.0,
            noise_sigma: 0.05,
            horizon: 1.0,
            steps: 100,
        }
    }
}

/// `[x1, x1', x2, x2']`.
pub type State = [f64; 4];

impl QuarterCarParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.sprung_mass, self.unsprung_mass, self.spring_stiffness, self.tire_stiffness, self.horizon];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || self.steps == 0 || self.damping < 0.0 {
            return Err(Error::InvalidArgument("quarter-car masses, stiffnesses and horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Right-hand side of the first-order system for road displacement `z`.
    pub fn derivative(&self, s: &State, z: f64) -> State {
        let [x1, v1, x2, v2] = *s;
        let d = x1 - x2;
        let coupling = self.spring_stiffness * d * d * d + self.damping * (v1 - v2);
        [
            v1,
            -coupling / self.sprung_mass,
            v2,
            (coupling + self.tire_stiffness * (z - x2)) / self.unsprung_mass,
        ]
    }

    /// One classical fourth-order Runge–Kutta step with constant `z`.
    pub fn rk4_step(&self, s: &State, z: f64, dt: f64) -> State {
        let axpy = |a: &State, k: &State, h: f64| [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]];
        let k1 = self.derivative(s, z);
        let k2 = self.derivative(&axpy(s, &k1, 0.5 * dt), z);
        let k3 = self.derivative(&axpy(s, &k2, 0.5 * dt), z);
        let k4 = self.derivative(&axpy(s, &k3, dt), z);
        let mut out = *s;
        for i in 0..4 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    /// Integrates from `initial` with road values `sigma * u_k` and returns the
    /// trajectory at the grid points `t_0..t_steps`.
    pub fn trajectory(&self, initial: State, road: &[f64]) -> Result<Vec<State>> {
        if road.len() != self.steps {
            return Err(Error::DimensionMismatch { expected: self.steps, got: road.len() });
        }
        let dt = self.dt();
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut s = initial;
        out.push(s);
        for &u in road {
            s = self.rk4_step(&s, self.noise_sigma * u, dt);
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("quarter-car state became non-finite".into()));
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Maximum deflection `max_k |x1(t_k) - x2(t_k)|` from rest.
    pub fn max_deflection(&self, road: &[f64]) -> Result<f64> {
        if road.len() != self.steps {
            return Err(Error::DimensionMismatch { expected: self.steps, got: road.len() });
        }
        let dt = self.dt();
        let mut s = [0.0; 4];
        let mut peak: f64 = 0.0;
        for &u in road {
            s = self.rk4_step(&s, self.noise_sigma * u, dt);
            let d = (s[0] - s[2]).abs();
            if !d.is_finite() {
                return Err(Error::Numeric("quarter-car state became non-finite".into()));
            }
            peak = peak.max(d);
        }
        Ok(peak)
    }

    /// Kinetic plus spring and tire potential energy for a road at rest.
    pub fn energy(&self, s: &State) -> f64 {
        let [x1, v1, x2, v2] = *s;
        let d = x1 - x2;
        0.5 * self.sprung_mass * v1 * v1
            + 0.5 * self.unsprung_mass * v2 * v2
            + 0.25 * self.spring_stiffness * d.powi(4)
            + 0.5 * self.tire_stiffness * x2 * x2
    }
}

/// Performance function with the default parameters.
pub fn quarter_car_perform(road: &[f64]) -> Result<f64> {
    QuarterCarParams::default().max_deflection(road)
}
