use std::path::{Path, PathBuf};

use bnls_core::initial::Perturbation;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Extend,
    Scatter,
    Evolve,
    Reconstruct,
    Solve,
    Asymptote,
    Simulate,
    Compare,
}

/// Initial data for the commands that start from a field.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// `v_{mu0} + eps w`.
    GroundState,
    /// `amplitude sech(x)`.
    Sech { amplitude: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub z_max: f64,
    pub n_half: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub q: f64,
    pub mu0: f64,
    pub eps: f64,
    pub perturbation: Option<Perturbation>,
    /// Draws the perturbation shape when `perturbation` is absent.
    pub seed: Option<u64>,
    pub initial: Initial,
    /// Field CSV for extend/scatter/solve/simulate, scattering JSON for evolve/reconstruct/asymptote.
    pub input: Option<PathBuf>,
    pub half_width: f64,
    pub spacing: f64,
    pub spectral: SpectralConfig,
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub dt: f64,
    /// Half width of the direct-solver domain; `half_width` when absent.
    pub pde_half_width: Option<f64>,
    /// Direct-solver guards; the solver defaults apply when absent.
    pub tail_threshold: Option<f64>,
    pub blowup_factor: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            q: 0.25,
            mu0: 1.0,
            eps: 0.0,
            perturbation: None,
            seed: None,
            initial: Initial::GroundState,
            input: None,
            half_width: 20.0,
            spacing: 0.02,
            spectral: SpectralConfig { z_max: 8.0, n_half: 400 },
            times: vec![0.0, 1.0],
            points: vec![0.0, 0.5, 1.0, 2.0],
            dt: 0.005,
            pde_half_width: None,
            tail_threshold: None,
            blowup_factor: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(bad(format!("config is for `{c:?}`, invoked as `{command:?}`")));
            }
        }
        let finite = [self.q, self.mu0, self.eps, self.half_width, self.spacing, self.dt, self.spectral.z_max];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(bad("numeric parameters must be finite"));
        }
        if self.initial == Initial::GroundState && !(self.mu0 > self.q.abs()) {
            return Err(bad(format!("mu0 = {} must exceed |q| = {}", self.mu0, self.q.abs())));
        }
        if self.eps < 0.0 {
            return Err(bad("eps must be non-negative"));
        }
        if let Initial::Sech { amplitude } = self.initial {
            if !amplitude.is_finite() {
                return Err(bad("sech amplitude must be finite"));
            }
        }
        if !(self.spacing > 0.0) || !(self.half_width > 0.0) || self.half_width / self.spacing > 1e7 {
            return Err(bad("need 0 < spacing and at most 1e7 nodes per half line"));
        }
        if let Some(l) = self.pde_half_width {
            if !(l > 0.0) || l / self.spacing > 1e7 {
                return Err(bad("pde_half_width must be positive"));
            }
        }
        if self.tail_threshold.is_some_and(|v| !(v > 0.0)) || self.blowup_factor.is_some_and(|v| !(v > 1.0)) {
            return Err(bad("tail_threshold must be positive and blowup_factor above 1"));
        }
        if !(self.dt > 0.0) {
            return Err(bad("dt must be positive"));
        }
        if !(self.spectral.z_max > 0.0) || self.spectral.n_half == 0 {
            return Err(bad("spectral grid needs z_max > 0 and n_half > 0"));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(bad("times must be finite and non-negative"));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(bad("times must be increasing"));
        }
        if command == Command::Asymptote && self.times.iter().any(|&t| t <= 0.0) {
            return Err(bad("asymptotic formulas need t > 0"));
        }
        if self.points.iter().any(|x| !x.is_finite()) {
            return Err(bad("points must be finite"));
        }
        if let Some(p) = self.perturbation {
            if !(p.sigma > 0.0) || !p.amplitude.is_finite() || !p.omega.is_finite() {
                return Err(bad("perturbation needs sigma > 0 and finite amplitude, omega"));
            }
        }
        Ok(())
    }

    pub fn perturbation(&self) -> Perturbation {
        match (self.perturbation, self.seed) {
            (Some(p), _) => p,
            (None, Some(seed)) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Perturbation { amplitude: 1.0, sigma: rng.gen_range(0.5..2.0), omega: rng.gen_range(0.0..2.0) }
            }
            (None, None) => Perturbation::default(),
        }
    }

    pub fn nodes(&self, half_width: f64) -> usize {
        (half_width / self.spacing).round() as usize + 1
    }
}
