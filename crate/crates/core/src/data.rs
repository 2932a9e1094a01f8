use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::linalg::{C64, I, ONE, ZERO};
use crate::quadrature::{cauchy_unchecked, trapezoid};

/// Reflection coefficient on a real grid plus the discrete spectrum `{i mu_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub spectral_grid: SpectralGrid,
    pub r_samples: Vec<C64>,
    /// `mu_k > 0`, sorted decreasing.
    pub zeros: Vec<f64>,
    pub norming_constants: Vec<C64>,
    pub beta: f64,
    pub q: f64,
}

impl ScatteringData {
    pub fn reflectionless(grid: SpectralGrid, zeros: Vec<f64>, gammas: Vec<C64>, beta: f64, q: f64) -> Self {
        let n = grid.len();
        let mut d = Self { spectral_grid: grid, r_samples: vec![ZERO; n], zeros, norming_constants: gammas, beta, q };
        d.sort_zeros();
        d
    }

    /// Keeps `zeros` decreasing with their norming constants attached.
    pub fn sort_zeros(&mut self) {
        let mut pairs: Vec<(f64, C64)> =
            self.zeros.iter().copied().zip(self.norming_constants.iter().copied()).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        self.zeros = pairs.iter().map(|p| p.0).collect();
        self.norming_constants = pairs.iter().map(|p| p.1).collect();
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_samples.len() != self.spectral_grid.len() {
            return Err(Error::InvalidArgument("r samples do not match the spectral grid".into()));
        }
        if self.zeros.len() != self.norming_constants.len() {
            return Err(Error::InvalidArgument("one norming constant per zero is required".into()));
        }
        if self.zeros.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidArgument("zeros must lie on the positive imaginary axis".into()));
        }
        if (self.beta.abs() - self.q.abs()).abs() > 1e-12 * self.q.abs().max(1.0) {
            return Err(Error::InvalidArgument("beta must be +q or -q".into()));
        }
        Ok(())
    }

    pub fn max_reflection(&self) -> f64 {
        self.r_samples.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    /// `log(1 + |r|^2)` on the grid.
    pub fn log_weight(&self) -> Vec<C64> {
        self.r_samples.iter().map(|r| C64::new(r.norm_sqr().ln_1p(), 0.0)).collect()
    }

    /// `l(z) = (1 / 2 pi i) * integral log(1 + |r|^2) / (s - z) ds` off the axis.
    pub fn l_function(&self, z: C64) -> C64 {
        if self.r_samples.iter().all(|r| *r == ZERO) {
            return ZERO;
        }
        cauchy_unchecked(&self.log_weight(), self.spectral_grid.values(), z)
    }

    /// Boundary value of `l` from above at grid node `k`.
    pub fn l_plus_at_node(&self, k: usize) -> C64 {
        let f = self.log_weight();
        let s = self.spectral_grid.values();
        if f.iter().all(|v| *v == ZERO) {
            return ZERO;
        }
        let n = s.len();
        let zk = s[k];
        let fk = f[k];
        let dfk = if k == 0 {
            (f[1] - f[0]) / (s[1] - s[0])
        } else if k == n - 1 {
            (f[n - 1] - f[n - 2]) / (s[n - 1] - s[n - 2])
        } else {
            (f[k + 1] - f[k - 1]) / (s[k + 1] - s[k - 1])
        };
        let g: Vec<C64> = (0..n).map(|j| if j == k { dfk } else { (f[j] - fk) / (s[j] - zk) }).collect();
        let mut pv = trapezoid(s, &g);
        if k > 0 && k < n - 1 {
            pv += fk * ((s[n - 1] - zk) / (zk - s[0])).ln();
        }
        0.5 * fk + pv / C64::new(0.0, 2.0 * PI)
    }

    /// Blaschke product over the discrete spectrum.
    pub fn blaschke(&self, z: C64) -> C64 {
        self.zeros.iter().map(|&m| (z - I * m) / (z + I * m)).fold(ONE, |a, b| a * b)
    }

    /// `a(z)` rebuilt from `(r, zeros)` for `Im z > 0`.
    pub fn a_of(&self, z: C64) -> C64 {
        self.blaschke(z) * (-self.l_function(z)).exp()
    }

    /// `a(z)` at real grid node `k` (boundary value from above).
    pub fn a_at_node(&self, k: usize) -> C64 {
        let z = C64::new(self.spectral_grid.values()[k], 0.0);
        self.blaschke(z) * (-self.l_plus_at_node(k)).exp()
    }

    /// `a'(i mu_k)`: the derivative of the Blaschke factor times the remaining factors.
    pub fn a_prime_at_zero(&self, k: usize) -> C64 {
        let zk = I * self.zeros[k];
        let mut v = ONE / (zk + I * self.zeros[k]);
        for (j, &m) in self.zeros.iter().enumerate() {
            if j != k {
                v *= (zk - I * m) / (zk + I * m);
            }
        }
        v * (-self.l_function(zk)).exp()
    }
}
