//! Direct solver for `i u_t + u_xx / 2 + q delta(x) u + |u|^2 u = 0` with even data.
//!
//! Only the half line `x >= 0` is stepped; the delta enters through the row at
//! `x = 0`, which encodes `u_x(0+) + q u(0) = 0`. Snapshots are mirrored back.

use crate::error::{Error, Result};
use crate::grid::{SampledField, SpatialGrid};
use crate::linalg::{C64, I, ZERO};
use crate::quadrature::trapezoid_real;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Symmetric grid with a node at 0.
    pub grid: SpatialGrid,
    pub dt: f64,
    pub t_end: f64,
    pub q: f64,
    pub tail_threshold: f64,
    pub blowup_factor: f64,
}

impl SimConfig {
    pub fn new(grid: SpatialGrid, dt: f64, t_end: f64, q: f64) -> Result<Self> {
        let cfg = Self { grid, dt, t_end, q, tail_threshold: 1e-5, blowup_factor: 10.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.grid.is_symmetric() {
            return Err(Error::InvalidGrid("simulation grid must be symmetric about 0".into()));
        }
        self.grid.require_zero_node()?;
        if !(self.dt > 0.0) || self.dt > self.grid.spacing() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("dt = {} must lie in (0, h]", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.q.is_finite() {
            return Err(Error::InvalidArgument("t_end must be non-negative and q finite".into()));
        }
        Ok(())
    }
}

/// Crank-Nicolson step for `u_t = i L u` on the half line, factorized once per `dt`.
struct LinearStep {
    dt: f64,
    /// Off-diagonal entries of `L`: `upper[0]` couples row 0 to node 1.
    upper: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    /// Thomas factorization of `I - i dt/2 L`.
    c_prime: Vec<C64>,
    denom: Vec<C64>,
}

impl LinearStep {
    fn new(n: usize, h: f64, q: f64, dt: f64) -> Self {
        let h2 = h * h;
        let mut diag = vec![-1.0 / h2; n];
        let mut upper = vec![0.5 / h2; n];
        let lower = vec![0.5 / h2; n];
        diag[0] = -1.0 / h2 + q / h;
        upper[0] = 1.0 / h2;
        let k = -I * (dt / 2.0);
        let mut c_prime = vec![ZERO; n];
        let mut denom = vec![ZERO; n];
        let mut prev_c = ZERO;
        for j in 0..n {
            let b = 1.0 + k * diag[j];
            let a = if j > 0 { k * lower[j] } else { ZERO };
            let d = b - a * prev_c;
            denom[j] = d;
            let c = if j + 1 < n { k * upper[j] / d } else { ZERO };
            c_prime[j] = c;
            prev_c = c;
        }
        Self { dt, upper, lower, diag, c_prime, denom }
    }

    fn apply(&self, u: &mut [C64], rhs: &mut [C64]) {
        let n = u.len();
        let k = I * (self.dt / 2.0);
        for j in 0..n {
            let mut lu = self.diag[j] * u[j];
            if j + 1 < n {
                lu += self.upper[j] * u[j + 1];
            }
            if j > 0 {
                lu += self.lower[j] * u[j - 1];
            }
            rhs[j] = u[j] + k * lu;
        }
        let km = -k;
        let mut prev = ZERO;
        for (j, r) in rhs.iter_mut().enumerate() {
            let a = if j > 0 { km * self.lower[j] } else { ZERO };
            prev = (*r - a * prev) / self.denom[j];
            *r = prev;
        }
        u[n - 1] = rhs[n - 1];
        for j in (0..n - 1).rev() {
            u[j] = rhs[j] - self.c_prime[j] * u[j + 1];
        }
    }
}

fn nonlinear_phase(u: &mut [C64], tau: f64) {
    for v in u.iter_mut() {
        *v *= C64::from_polar(1.0, v.norm_sqr() * tau);
    }
}

/// Snapshots together with the trace of `u(0, t)` at every step.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub times: Vec<f64>,
    pub snapshots: Vec<SampledField>,
    pub origin: Vec<(f64, C64)>,
}

pub fn simulate(u0: &SampledField, cfg: &SimConfig, snapshot_times: &[f64]) -> Result<Vec<SampledField>> {
    Ok(simulate_traced(u0, cfg, snapshot_times)?.snapshots)
}

pub fn simulate_traced(u0: &SampledField, cfg: &SimConfig, snapshot_times: &[f64]) -> Result<Simulation> {
    cfg.validate()?;
    if u0.grid != cfg.grid {
        return Err(Error::InvalidGrid("initial data must live on the simulation grid".into()));
    }
    let sup0 = u0.sup_norm();
    let defect = u0.even_defect();
    if defect > 1e-10 * sup0.max(1.0) {
        return Err(Error::NotEven(defect));
    }
    let mut times = snapshot_times.to_vec();
    if times.iter().any(|&t| !(t >= 0.0) || t > cfg.t_end * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument("snapshot times must lie in [0, t_end]".into()));
    }
    times.sort_by(f64::total_cmp);

    let zero = cfg.grid.require_zero_node()?;
    let h = cfg.grid.spacing();
    // Node count on [0, L]; the last node is held at zero.
    let n = cfg.grid.n_points - zero;
    let mut u: Vec<C64> = u0.values[zero..].to_vec();
    u[n - 1] = ZERO;
    let mut rhs = vec![ZERO; n];
    let tail = u0.edge_magnitude();
    if tail > cfg.tail_threshold {
        return Err(Error::TailContamination { t: 0.0, magnitude: tail });
    }

    let mut t = 0.0;
    let mut step: Option<LinearStep> = None;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut origin = vec![(0.0, u[0])];
    for &target in &times {
        let remaining = target - t;
        if remaining > 0.0 {
            let k = (remaining / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            let dt = remaining / k as f64;
            if step.as_ref().is_none_or(|s| (s.dt - dt).abs() > 1e-15 * dt) {
                step = Some(LinearStep::new(n, h, cfg.q, dt));
            }
            let lin = step.as_ref().expect("factorized above");
            for i in 0..k {
                nonlinear_phase(&mut u, dt / 2.0);
                lin.apply(&mut u, &mut rhs);
                nonlinear_phase(&mut u, dt / 2.0);
                let now = t + (i + 1) as f64 * dt;
                origin.push((now, u[0]));
                let edge = u[n.saturating_sub(3)..n - 1].iter().map(|v| v.norm()).fold(0.0, f64::max);
                if edge > cfg.tail_threshold {
                    return Err(Error::TailContamination { t: now, magnitude: edge });
                }
                if sup0 > 0.0 {
                    let sup = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    if !(sup <= cfg.blowup_factor * sup0) {
                        return Err(Error::BlowUp(now));
                    }
                }
            }
            t = target;
        }
        snapshots.push(mirror(&cfg.grid, zero, &u));
    }
    Ok(Simulation { times, snapshots, origin })
}

fn mirror(grid: &SpatialGrid, zero: usize, half: &[C64]) -> SampledField {
    let values = (0..grid.n_points).map(|i| half[i.abs_diff(zero)]).collect();
    SampledField { grid: *grid, values }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub mass: f64,
    pub energy: f64,
}

/// Fourth-order derivative on a uniform half-line array, one-sided near both ends.
fn derivative4(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    if n < 5 {
        return (0..n)
            .map(|j| {
                let (a, b) = if j + 1 < n { (j, j + 1) } else { (j.saturating_sub(1), j) };
                if a == b {
                    ZERO
                } else {
                    (f[b] - f[a]) / h
                }
            })
            .collect();
    }
    let fw0 =
        |j: usize| (-25.0 * f[j] + 48.0 * f[j + 1] - 36.0 * f[j + 2] + 16.0 * f[j + 3] - 3.0 * f[j + 4]) / (12.0 * h);
    let fw1 = |j: usize| (-3.0 * f[j - 1] - 10.0 * f[j] + 18.0 * f[j + 1] - 6.0 * f[j + 2] + f[j + 3]) / (12.0 * h);
    let bw0 =
        |j: usize| (25.0 * f[j] - 48.0 * f[j - 1] + 36.0 * f[j - 2] - 16.0 * f[j - 3] + 3.0 * f[j - 4]) / (12.0 * h);
    let bw1 = |j: usize| (3.0 * f[j + 1] + 10.0 * f[j] - 18.0 * f[j - 1] + 6.0 * f[j - 2] - f[j - 3]) / (12.0 * h);
    (0..n)
        .map(|j| match j {
            0 => fw0(0),
            1 => fw1(1),
            _ if j == n - 1 => bw0(j),
            _ if j == n - 2 => bw1(j),
            _ => (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h),
        })
        .collect()
}

/// Half-line mass and energy of even data on a symmetric grid.
pub fn conserved_quantities(u: &SampledField, q: f64) -> Result<Conserved> {
    let half = u.nonnegative_half()?;
    let x = half.grid.nodes();
    let h = half.grid.spacing();
    let density: Vec<f64> = half.values.iter().map(|v| v.norm_sqr()).collect();
    let mass = trapezoid_real(&x, &density);
    let ux = derivative4(&half.values, h);
    let e: Vec<f64> = ux.iter().zip(&density).map(|(d, r)| d.norm_sqr() - r * r).collect();
    let energy = trapezoid_real(&x, &e) - q * density[0];
    Ok(Conserved { mass, energy })
}

/// The Hamiltonian conserved by the semi-discrete scheme: forward differences,
/// trapezoid weights and the same `-q |u(0)|^2` term. Its drift is pure splitting error.
pub fn discrete_energy(u: &SampledField, q: f64) -> Result<f64> {
    let half = u.nonnegative_half()?;
    let v = &half.values;
    let h = half.grid.spacing();
    let mut e = 0.0;
    for j in 0..v.len() - 1 {
        e += (v[j + 1] - v[j]).norm_sqr() / h;
    }
    for (j, val) in v.iter().enumerate() {
        let w = if j == 0 { 0.5 } else { 1.0 };
        e -= h * w * val.norm_sqr().powi(2);
    }
    Ok(e - q * v[0].norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::ground_state;

    fn soliton_setup(q: f64, half_width: f64, h: f64) -> (SampledField, SpatialGrid) {
        let n = (2.0 * half_width / h).round() as usize + 1;
        let grid = SpatialGrid::symmetric(half_width, n).unwrap();
        let u0 = SampledField::from_fn(grid, |x| C64::new(ground_state(1.0, q, x), 0.0));
        (u0, grid)
    }

    #[test]
    fn stationary_soliton() {
        let q = 0.25;
        let (u0, grid) = soliton_setup(q, 20.0, 0.02);
        let cfg = SimConfig::new(grid, 0.005, 1.0, q).unwrap();
        let snaps = simulate(&u0, &cfg, &[0.5, 1.0]).unwrap();
        let last = &snaps[1];
        let dev = last.values.iter().zip(&u0.values).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max);
        assert!(dev < 5e-4, "{dev:e}");
        let zero = last.grid.zero_index().unwrap();
        for k in 0..zero {
            assert_eq!(last.values[zero - k], last.values[zero + k]);
        }
        let c0 = conserved_quantities(&u0, q).unwrap();
        let c1 = conserved_quantities(last, q).unwrap();
        assert!((c0.mass - 0.75).abs() < 1e-4, "{}", c0.mass);
        assert!((c1.mass - c0.mass).abs() / c0.mass < 1e-6);
        assert!((c1.energy - c0.energy).abs() < 1e-5, "{:e}", (c1.energy - c0.energy).abs());
    }

    #[test]
    fn vacuum_and_free_soliton() {
        let grid = SpatialGrid::symmetric(30.0, 3001).unwrap();
        let zero = SampledField::zeros(grid);
        let cfg = SimConfig::new(grid, 0.005, 1.0, 0.3).unwrap();
        let out = simulate(&zero, &cfg, &[1.0]).unwrap();
        assert_eq!(out[0].sup_norm(), 0.0);
        assert_eq!(conserved_quantities(&zero, 0.3).unwrap(), Conserved { mass: 0.0, energy: 0.0 });

        let grid = SpatialGrid::symmetric(30.0, 3001).unwrap();
        let u0 = SampledField::from_fn(grid, |x| C64::new(1.0 / x.cosh(), 0.0));
        let cfg = SimConfig::new(grid, 0.005, 5.0, 0.0).unwrap();
        let sim = simulate_traced(&u0, &cfg, &[5.0]).unwrap();
        let worst = sim.origin.iter().map(|(_, v)| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 5e-4, "{worst:e}");
    }

    #[test]
    fn guards() {
        let grid = SpatialGrid::symmetric(10.0, 1001).unwrap();
        let odd = SampledField::from_fn(grid, |x| C64::new(x * (-x * x).exp(), 0.0));
        let cfg = SimConfig::new(grid, 0.01, 1.0, 0.0).unwrap();
        assert!(matches!(simulate(&odd, &cfg, &[1.0]), Err(Error::NotEven(_))));
        assert!(SimConfig::new(grid, 0.05, 1.0, 0.0).is_err());
        // A wide pulse on a short domain leaks to the boundary at once.
        let wide = SampledField::from_fn(grid, |x| C64::new((-x * x / 20.0).exp(), 0.0));
        assert!(matches!(simulate(&wide, &cfg, &[1.0]), Err(Error::TailContamination { .. })));
    }

    #[test]
    fn robin_relation_at_origin() {
        let q = 0.25;
        let mut errs = Vec::new();
        for &h in &[0.04, 0.02] {
            let (u0, grid) = soliton_setup(q, 20.0, h);
            let cfg = SimConfig::new(grid, h / 4.0, 0.5, q).unwrap();
            let u = simulate(&u0, &cfg, &[0.5]).unwrap().remove(0);
            let half = u.nonnegative_half().unwrap();
            let d = derivative4(&half.values, h);
            errs.push((d[0] + q * half.values[0]).norm());
        }
        assert!(errs[1] < errs[0] * 0.75, "{errs:?}");
    }

    #[test]
    fn splitting_error_is_second_order() {
        let q = 0.25;
        let mut drift = Vec::new();
        for &dt in &[0.01, 0.005] {
            let (u0, grid) = soliton_setup(q, 20.0, 0.02);
            let cfg = SimConfig::new(grid, dt, 1.0, q).unwrap();
            let ts: Vec<f64> = (1..=10).map(|k| k as f64 * 0.1).collect();
            let e0 = discrete_energy(&u0, q).unwrap();
            let d = simulate(&u0, &cfg, &ts)
                .unwrap()
                .iter()
                .map(|f| (discrete_energy(f, q).unwrap() - e0).abs())
                .fold(0.0, f64::max);
            drift.push(d);
        }
        assert!(drift[0] / drift[1] >= 3.5, "{drift:?}");
    }
}
