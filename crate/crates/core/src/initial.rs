//! Initial data families: ground states and their even perturbations.

use serde::{Deserialize, Serialize};

use crate::asymptotics::ground_state;
use crate::grid::{SampledField, SpatialGrid};
use crate::linalg::C64;

/// `w(x) = amplitude * exp(-(x / sigma)^2) * cos(omega x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub amplitude: f64,
    pub sigma: f64,
    pub omega: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self { amplitude: 1.0, sigma: 1.0, omega: 0.0 }
    }
}

impl Perturbation {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-(x / self.sigma).powi(2)).exp() * (self.omega * x).cos()
    }

    pub fn sample(&self, grid: SpatialGrid) -> SampledField {
        SampledField::from_fn(grid, |x| C64::new(self.eval(x), 0.0))
    }
}

pub fn ground_state_field(grid: SpatialGrid, mu: f64, q: f64) -> SampledField {
    SampledField::from_fn(grid, |x| C64::new(ground_state(mu, q, x), 0.0))
}

/// `v_{mu0}(x) + eps w(x)`.
pub fn perturbed_ground_state(grid: SpatialGrid, mu0: f64, q: f64, eps: f64, w: &Perturbation) -> SampledField {
    SampledField::from_fn(grid, |x| C64::new(ground_state(mu0, q, x) + eps * w.eval(x), 0.0))
}
