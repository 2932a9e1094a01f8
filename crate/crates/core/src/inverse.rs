//! Reconstruction of `u(x, t)` from scattering data: reflectionless Darboux chains,
//! the Born approximation for the pole-free part, and the full even-data IVP pipeline.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::backlund::backlund_extend;
use crate::darboux::{darboux_add, Frame, FreeFrame};
use crate::data::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::{SampledField, SpectralGrid};
use crate::linalg::{Mat2, Vec2, C64, I, ONE, ZERO};
use crate::spectral_data::{extension_scattering, ExtensionOptions};

/// Largest `|r|` for which the Born approximation is considered in regime.
pub const BORN_REGIME: f64 = 0.2;
/// Largest phase change of `e^{i theta}` per quadrature cell.
const PHASE_PER_CELL: f64 = 0.1;

/// Pole data `{i mu_k, gamma_k}` at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionlessConfig {
    pub zeros: Vec<f64>,
    pub gammas: Vec<C64>,
}

impl ReflectionlessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.zeros.len() != self.gammas.len() {
            return Err(Error::InvalidArgument("one norming constant per zero is required".into()));
        }
        for (k, &m) in self.zeros.iter().enumerate() {
            if !(m > 0.0) || self.zeros[..k].iter().any(|&p| (p - m).abs() < 1e-12) {
                return Err(Error::SingularLinearSystem);
            }
        }
        Ok(())
    }
}

/// Couplings `c_k = gamma_k / a_k'(z_k)` for poles added in the given order, where
/// `a_k` carries the first `k` Blaschke factors and `e^{-l}`.
pub fn chain_couplings(zeros: &[f64], gammas: &[C64], l_at_zeros: &[C64]) -> Vec<C64> {
    zeros
        .iter()
        .enumerate()
        .map(|(k, &mu)| {
            let zk = I * mu;
            let mut d = ONE / (2.0 * zk);
            for &m in &zeros[..k] {
                d *= (zk - I * m) / (zk + I * m);
            }
            gammas[k] / (d * (-l_at_zeros[k]).exp())
        })
        .collect()
}

fn sorted_poles(zeros: &[f64], gammas: &[C64]) -> (Vec<f64>, Vec<C64>) {
    let mut p: Vec<(f64, C64)> = zeros.iter().copied().zip(gammas.iter().copied()).collect();
    p.sort_by(|a, b| b.0.total_cmp(&a.0));
    (p.iter().map(|v| v.0).collect(), p.iter().map(|v| v.1).collect())
}

/// Dresses `base` with the poles in decreasing `mu`, using `gamma_k(t)`.
fn dress(base: Arc<dyn Frame>, zeros: &[f64], gammas_t: &[C64], l_at_zeros: &[C64]) -> Result<Arc<dyn Frame>> {
    let c = chain_couplings(zeros, gammas_t, l_at_zeros);
    let mut frame = base;
    for (&mu, &ck) in zeros.iter().zip(&c) {
        frame = Arc::new(darboux_add(frame, I * mu, ck)?);
    }
    Ok(frame)
}

fn evolve_gammas(zeros: &[f64], gammas: &[C64], t: f64) -> Vec<C64> {
    zeros.iter().zip(gammas).map(|(&m, &g)| g * C64::from_polar(1.0, -0.5 * m * m * t)).collect()
}

pub struct ReflectionlessSolution {
    pub u: Vec<C64>,
    pub frame: Arc<dyn Frame>,
}

/// Multi-soliton `u(x, t)` at the given points with `r = 0`.
pub fn solve_reflectionless_at(
    config: &ReflectionlessConfig,
    points: &[f64],
    t: f64,
) -> Result<ReflectionlessSolution> {
    config.validate()?;
    let (zeros, gammas) = sorted_poles(&config.zeros, &config.gammas);
    let g = evolve_gammas(&zeros, &gammas, t);
    let frame = dress(Arc::new(FreeFrame::new(points.to_vec())), &zeros, &g, &vec![ZERO; zeros.len()])?;
    Ok(ReflectionlessSolution { u: frame.potential().to_vec(), frame })
}

pub fn solve_reflectionless(config: &ReflectionlessConfig, x: f64, t: f64) -> Result<ReflectionlessSolution> {
    solve_reflectionless_at(config, &[x], t)
}

/// First-order solution of the pole-free RHP with jump `r e^{i theta}`,
/// `theta = x z - t z^2 / 2`:
/// `m = (1, C(r e^{i theta}); C(conj(r) e^{-i theta}), 1)`.
pub struct BornFrame {
    points: Vec<f64>,
    t: f64,
    s: Vec<f64>,
    r: Vec<C64>,
    u: Vec<C64>,
    /// `max |r|` exceeded [`BORN_REGIME`].
    pub regime_warning: bool,
}

impl BornFrame {
    /// `grid` and `r` hold the pole-free reflection coefficient at `t = 0`.
    pub fn new(grid: &SpectralGrid, r: &[C64], points: Vec<f64>, t: f64) -> Result<Self> {
        if r.len() != grid.len() {
            return Err(Error::InvalidArgument("r samples do not match the spectral grid".into()));
        }
        let peak = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = r[0].norm().max(r[r.len() - 1].norm());
        if edge > (1e-3 * peak).max(1e-4) {
            return Err(Error::TailTooLarge { magnitude: edge, threshold: (1e-3 * peak).max(1e-4) });
        }
        let regime_warning = peak > BORN_REGIME;
        if regime_warning {
            log::warn!("Born reconstruction outside its small-data regime: max|r| = {peak:.3}");
        }
        let z = grid.values();
        let (lo, hi) = (z[0], z[z.len() - 1]);
        let x_max = points.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let slope = x_max + t.abs() * lo.abs().max(hi.abs());
        let native = (hi - lo) / (z.len() - 1) as f64;
        let h = if slope > 0.0 { native.min(PHASE_PER_CELL / slope) } else { native };
        let n = ((hi - lo) / h).ceil() as usize + 1;
        let s: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let r_fine: Vec<C64> =
            if n == z.len() { r.to_vec() } else { s.iter().map(|&v| grid.interpolate(r, v)).collect() };
        let mut frame = Self { points, t, s, r: r_fine, u: vec![], regime_warning };
        if peak == 0.0 {
            frame.u = vec![ZERO; frame.points.len()];
        } else {
            frame.u = frame.points.par_iter().map(|&x| frame.fourier(x) / (2.0 * PI)).collect();
        }
        Ok(frame)
    }

    /// `integral r e^{i theta} ds`.
    fn fourier(&self, x: f64) -> C64 {
        let n = self.s.len();
        let h = (self.s[n - 1] - self.s[0]) / (n - 1) as f64;
        let mut acc = ZERO;
        for (k, (&s, &r)) in self.s.iter().zip(&self.r).enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += w * r * C64::from_polar(1.0, x * s - 0.5 * self.t * s * s);
        }
        acc * h
    }

    /// `C(r e^{i theta})(z)` and `C(conj(r) e^{-i theta})(z)`.
    fn cauchy_pair(&self, x: f64, z: C64) -> (C64, C64) {
        let n = self.s.len();
        let h = (self.s[n - 1] - self.s[0]) / (n - 1) as f64;
        let (mut up, mut down) = (ZERO, ZERO);
        for (k, (&s, &r)) in self.s.iter().zip(&self.r).enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            let f = r * C64::from_polar(1.0, x * s - 0.5 * self.t * s * s);
            let d = w / (s - z);
            up += f * d;
            down += f.conj() * d;
        }
        let k = C64::new(0.0, 2.0 * PI);
        (up * h / k, down * h / k)
    }
}

impl Frame for BornFrame {
    fn points(&self) -> &[f64] {
        &self.points
    }
    fn potential(&self) -> &[C64] {
        &self.u
    }
    fn poles(&self) -> Vec<C64> {
        vec![]
    }
    fn m(&self, z: C64) -> Result<Vec<Mat2>> {
        if z.im <= 0.0 {
            return Err(Error::InvalidArgument(format!("Born frame is evaluated in the upper half plane, got {z}")));
        }
        if self.r.iter().all(|v| *v == ZERO) {
            return Ok(vec![Mat2::IDENTITY; self.points.len()]);
        }
        Ok(self
            .points
            .par_iter()
            .map(|&x| {
                let (up, down) = self.cauchy_pair(x, z);
                Mat2::new(ONE, up, down, ONE)
            })
            .collect())
    }
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>> {
        Err(Error::NotAPole(format!("{xi}")))
    }
}

/// Born approximation of the pole-free problem at one point.
pub fn born_reconstruct(data: &ScatteringData, x: f64, t: f64) -> Result<BornFrame> {
    BornFrame::new(&data.spectral_grid, &data.r_samples, vec![x], t)
}

/// `r_f = r prod (z - conj z_k)/(z - z_k)`.
pub fn pole_free_reflection(data: &ScatteringData) -> Vec<C64> {
    data.r_samples
        .iter()
        .zip(data.spectral_grid.values())
        .map(|(&r, &s)| {
            let z = C64::new(s, 0.0);
            data.zeros.iter().fold(r, |acc, &m| acc * (z + I * m) / (z - I * m))
        })
        .collect()
}

/// Precomputed pole-free reflection and `l(z_k)` for repeated reconstruction.
pub struct Reconstructor {
    grid: SpectralGrid,
    r_free: Vec<C64>,
    zeros: Vec<f64>,
    gammas: Vec<C64>,
    l_at_zeros: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub u: Vec<C64>,
    pub u_free: Vec<C64>,
    pub regime_warning: bool,
}

impl Reconstructor {
    /// `data` is the time-zero scattering data.
    pub fn new(data: &ScatteringData) -> Result<Self> {
        if data.zeros.len() > 2 {
            return Err(Error::UnsupportedSpectrum(data.zeros.len()));
        }
        let (zeros, gammas) = sorted_poles(&data.zeros, &data.norming_constants);
        let l_at_zeros = zeros.iter().map(|&m| data.l_function(I * m)).collect();
        Ok(Self { grid: data.spectral_grid.clone(), r_free: pole_free_reflection(data), zeros, gammas, l_at_zeros })
    }

    pub fn eval_many(&self, points: &[f64], t: f64) -> Result<Reconstruction> {
        let born = BornFrame::new(&self.grid, &self.r_free, points.to_vec(), t)?;
        let regime_warning = born.regime_warning;
        let u_free = born.u.clone();
        let g = evolve_gammas(&self.zeros, &self.gammas, t);
        let frame = dress(Arc::new(born), &self.zeros, &g, &self.l_at_zeros)?;
        Ok(Reconstruction { u: frame.potential().to_vec(), u_free, regime_warning })
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<C64> {
        Ok(self.eval_many(&[x], t)?.u[0])
    }
}

/// `u(x, t)` from time-zero data, evolved to `t`.
pub fn reconstruct(data: &ScatteringData, x: f64, t: f64) -> Result<C64> {
    Reconstructor::new(data)?.eval(x, t)
}

#[derive(Debug, Clone)]
pub struct IvpOptions {
    pub spectral_grid: SpectralGrid,
    pub extension: ExtensionOptions,
    /// Largest `sup |u(x) - u(-x)|` accepted as even.
    pub even_tolerance: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            spectral_grid: SpectralGrid::uniform(12.0, 600).expect("valid default grid"),
            extension: ExtensionOptions::default(),
            even_tolerance: 1e-10,
        }
    }
}

/// Solution of NLS with the delta condition `u_x(0+) + q u(0) = 0` for even data,
/// at each requested time, on the input grid.
pub fn solve_ivp(u0: &SampledField, q: f64, times: &[f64], opts: &IvpOptions) -> Result<Vec<SampledField>> {
    if !u0.grid.is_symmetric() {
        return Err(Error::InvalidGrid("initial data must live on a grid symmetric about 0".into()));
    }
    let defect = u0.even_defect();
    if defect > opts.even_tolerance {
        return Err(Error::NotEven(defect));
    }
    let half = u0.nonnegative_half()?;
    let spectrum = extension_scattering(&half, q, &opts.spectral_grid, &opts.extension)?;
    let rec = Reconstructor::new(&spectrum.base)?;
    let points = half.grid.nodes();
    times
        .iter()
        .map(|&t| {
            let r = rec.eval_many(&points, t)?;
            SampledField::new(half.grid, r.u)?.even_extension()
        })
        .collect()
}

/// Extension of half-line data followed by reconstruction on `[-L, L]`; used to compare
/// the reconstructed extension against its Bäcklund image.
pub fn reconstruct_extension(
    u_plus: &SampledField,
    q: f64,
    t: f64,
    opts: &IvpOptions,
) -> Result<(SampledField, SampledField)> {
    let ext = backlund_extend(u_plus, q)?;
    let spectrum = extension_scattering(u_plus, q, &opts.spectral_grid, &opts.extension)?;
    let rec = Reconstructor::new(&spectrum.base)?;
    let u = rec.eval_many(&ext.grid.nodes(), t)?.u;
    let rebuilt = SampledField::new(ext.grid, u)?;
    Ok((ext, rebuilt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;

    #[test]
    fn one_soliton() {
        let gamma = C64::new((5.0f64 / 3.0).sqrt(), 0.0);
        let cfg = ReflectionlessConfig { zeros: vec![1.0], gammas: vec![gamma] };
        let c = 0.25f64.atanh();
        for &x in &[-3.0, 0.0, 0.7, 4.0] {
            let s = solve_reflectionless(&cfg, x, 0.0).unwrap();
            assert!((s.u[0].norm() - 1.0 / (x + c).cosh()).abs() < 1e-12);
        }
        let s = solve_reflectionless(&cfg, 0.0, 3.0).unwrap();
        assert!((s.u[0] - C64::from_polar(0.968_245_84, 1.5)).norm() < 1e-8);
        for m in s.frame.m(C64::new(0.3, 0.5)).unwrap() {
            assert!((m.det() - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_config() {
        let cfg = ReflectionlessConfig { zeros: vec![], gammas: vec![] };
        let s = solve_reflectionless(&cfg, 1.0, 2.0).unwrap();
        assert_eq!(s.u[0], ZERO);
        assert_eq!(s.frame.m(I).unwrap()[0], Mat2::IDENTITY);
    }

    #[test]
    fn two_soliton_mass() {
        let cfg = ReflectionlessConfig { zeros: vec![0.3, 1.0], gammas: vec![C64::new(0.8, 0.1), C64::new(1.2, -0.4)] };
        let pts: Vec<f64> = (0..=8000).map(|k| -80.0 + 0.02 * k as f64).collect();
        for t in [0.0, 10.0] {
            let s = solve_reflectionless_at(&cfg, &pts, t).unwrap();
            let mass: f64 = s.u.iter().map(|u| u.norm_sqr()).sum::<f64>() * 0.02;
            assert!((mass - 2.6).abs() < 1e-4, "t = {t}: {mass}");
        }
        let bad = ReflectionlessConfig { zeros: vec![0.3, 0.3], gammas: vec![ONE, ONE] };
        assert!(matches!(solve_reflectionless(&bad, 0.0, 0.0), Err(Error::SingularLinearSystem)));
    }

    fn gaussian_data(eps: f64) -> ScatteringData {
        let g = SpectralGrid::uniform(8.0, 400).unwrap();
        let r = g.values().iter().map(|s| C64::new(eps * (-s * s).exp(), 0.0)).collect();
        ScatteringData { spectral_grid: g, r_samples: r, zeros: vec![], norming_constants: vec![], beta: 0.0, q: 0.0 }
    }

    #[test]
    fn born_gaussian() {
        let d = gaussian_data(0.01);
        let f = born_reconstruct(&d, 0.0, 0.0).unwrap();
        assert!((f.u[0] - C64::new(0.01 * 0.282_094_79, 0.0)).norm() < 1e-10);
        // stationary phase at x = 0: |u| ~ |r(0)| / sqrt(2 pi t)
        let f = born_reconstruct(&d, 0.0, 100.0).unwrap();
        let sp = 0.01 / (2.0 * PI * 100.0f64).sqrt();
        assert!((f.u[0].norm() - sp).abs() < 0.15 * sp);
        let z = gaussian_data(0.0);
        let f = born_reconstruct(&z, 0.5, 1.0).unwrap();
        assert_eq!(f.u[0], ZERO);
        assert_eq!(f.m(I).unwrap()[0], Mat2::IDENTITY);
    }

    #[test]
    fn born_matches_fourier_inverse() {
        // u(x, 0) = (1 / 2 pi) integral eps e^{-s^2} e^{i x s} ds = eps e^{-x^2/4} / (2 sqrt(pi))
        let d = gaussian_data(1e-3);
        for &x in &[0.5, 2.0] {
            let u = born_reconstruct(&d, x, 0.0).unwrap().u[0];
            let exact = 1e-3 * (-x * x / 4.0).exp() / (2.0 * PI.sqrt());
            assert!((u - C64::new(exact, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn stationary_profile_from_soliton_data() {
        let g = SpectralGrid::uniform(8.0, 100).unwrap();
        let gamma = C64::new((5.0f64 / 3.0).sqrt(), 0.0);
        let d = ScatteringData::reflectionless(g, vec![1.0], vec![gamma], -0.25, 0.25);
        let c = 0.25f64.atanh();
        for &t in &[0.0, 2.0, 7.5] {
            for &x in &[0.0, 1.5] {
                let u = reconstruct(&d, x, t).unwrap();
                assert!((u - C64::from_polar(1.0 / (x + c).cosh(), 0.5 * t)).norm() < 1e-10);
            }
        }
        let mut many = d.clone();
        many.zeros = vec![1.0, 0.5, 0.2];
        many.norming_constants = vec![ONE; 3];
        assert!(matches!(reconstruct(&many, 0.0, 0.0), Err(Error::UnsupportedSpectrum(3))));
    }

    #[test]
    fn ivp_stationary_and_vacuum() {
        let q: f64 = 0.25;
        let c = q.atanh();
        let g = SpatialGrid::symmetric(20.0, 2001).unwrap();
        let u0 = SampledField::from_fn(g, |x| C64::new(1.0 / (x.abs() + c).cosh(), 0.0));
        let opts = IvpOptions { spectral_grid: SpectralGrid::uniform(8.0, 128).unwrap(), ..Default::default() };
        let out = solve_ivp(&u0, q, &[1.0], &opts).unwrap();
        let k = g.zero_index().unwrap();
        assert!((out[0].values[k].norm() - 0.968_245_84).abs() < 1e-4);
        assert_eq!(out[0].even_defect(), 0.0);

        let zero = SampledField::zeros(g);
        let out = solve_ivp(&zero, q, &[0.0, 3.0], &opts).unwrap();
        assert!(out.iter().all(|f| f.sup_norm() == 0.0));

        let odd = SampledField::from_fn(g, |x| C64::new(x * (-x * x).exp(), 0.0));
        assert!(matches!(solve_ivp(&odd, q, &[1.0], &opts), Err(Error::NotEven(_))));
    }
}
