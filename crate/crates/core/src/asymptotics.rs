//! Leading-order long-time and intermediate-time formulas for `u(x, t)`.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::data::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::SampledField;
use crate::linalg::{C64, I, ONE, ZERO};
use crate::quadrature::trapezoid_real;
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    /// Region split `M`: small-|x| formula on `|x| <= M`, large-|x| on `|x| >= 1/M`.
    pub region_split: f64,
    /// Exponent in the reported error scale `eps |q|^{-1/2} t^{-(1/2 + kappa)}`.
    pub kappa: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self { region_split: 4.0, kappa: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    SmallX,
    LargeX,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::SmallX => "small_x",
            Region::LargeX => "large_x",
        }
    }

    /// Both formulas hold on the overlap `[1/M, M]`; dispatch switches at its
    /// geometric centre `|x| = 1`, so `M` only bounds where each is evaluated.
    pub fn select(x: f64) -> Region {
        if x.abs() <= 1.0 {
            Region::SmallX
        } else {
            Region::LargeX
        }
    }

    pub fn in_overlap(x: f64, opts: &AsymptoticOptions) -> bool {
        let m = opts.region_split;
        x.abs() >= 1.0 / m && x.abs() <= m
    }
}

/// Local parabolic-cylinder data at the stationary point `z0 = |x| / t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalK {
    pub z0: f64,
    pub nu: f64,
    pub beta: C64,
    pub k1: C64,
    pub k2: C64,
    pub alpha0: C64,
}

impl LocalK {
    /// Parameter of the model parabolic cylinder equation, `a = i k1 k2 = -i nu`.
    pub fn a(&self) -> C64 {
        I * self.k1 * self.k2
    }
}

fn log_weight(r: C64) -> f64 {
    r.norm_sqr().ln_1p()
}

/// `integral_{-inf}^{z0} log(z0 - s) dF(s)` for piecewise-linear `F` through
/// `(s_j, F_j)` followed by `(z0, f_z0)`.
fn stieltjes_log(s: &[f64], f: &[f64], z0: f64, f_z0: f64) -> f64 {
    // integral of log(y) dy is y (log y - 1)
    let g = |y: f64| if y <= 0.0 { 0.0 } else { y * (y.ln() - 1.0) };
    let mut total = 0.0;
    let nodes: Vec<(f64, f64)> = s.iter().copied().zip(f.iter().copied()).chain(std::iter::once((z0, f_z0))).collect();
    for w in nodes.windows(2) {
        let ((sa, fa), (sb, fb)) = (w[0], w[1]);
        if sb <= sa {
            continue;
        }
        let slope = (fb - fa) / (sb - sa);
        total += slope * (g(z0 - sa) - g(z0 - sb));
    }
    total
}

/// `k1`, `k2` and `alpha0` from `r(z0)` and samples `(s, r(s))` with `s < z0`, ascending.
pub fn local_k(r_at_z0: C64, r_history: &[(f64, C64)], x: f64, t: f64) -> LocalK {
    let z0 = x.abs() / t;
    let nu = log_weight(r_at_z0) / (2.0 * PI);
    if r_at_z0 == ZERO || nu == 0.0 {
        return LocalK { z0, nu: 0.0, beta: ZERO, k1: ZERO, k2: ZERO, alpha0: ONE };
    }
    let s: Vec<f64> = r_history.iter().map(|p| p.0).filter(|&v| v < z0).collect();
    let f: Vec<f64> = r_history.iter().filter(|p| p.0 < z0).map(|p| log_weight(p.1)).collect();
    let arg_beta = FRAC_PI_4 + stieltjes_log(&s, &f, z0, log_weight(r_at_z0)) / PI + r_at_z0.arg()
        - gamma(C64::new(0.0, nu)).arg();
    let beta = C64::from_polar(nu.sqrt(), arg_beta);
    let phase = C64::from_polar(1.0, x * x / (2.0 * t) + nu * t.ln());
    let k1 = beta * phase;
    let k2 = -beta.conj() * phase.conj();
    let a = C64::new(0.0, -nu);
    let alpha0_sq =
        k1 * r_at_z0.conj() * gamma(-a) / ((2.0 * PI).sqrt() * C64::from_polar(1.0, FRAC_PI_4) * (PI * nu / 2.0).exp());
    LocalK { z0, nu, beta, k1, k2, alpha0: alpha0_sq.sqrt() }
}

/// `local_k` with `r` and its history read from scattering data.
pub fn local_k_from_data(data: &ScatteringData, x: f64, t: f64) -> LocalK {
    let z0 = x.abs() / t;
    let s = data.spectral_grid.values();
    let history: Vec<(f64, C64)> = s.iter().zip(&data.r_samples).filter(|p| *p.0 < z0).map(|(&a, &b)| (a, b)).collect();
    local_k(data.spectral_grid.interpolate(&data.r_samples, z0), &history, x, t)
}

/// `l_j = (1/pi) integral_0^inf s / (s^2 + mu^2) log(1 + |r|^2) ds`.
pub fn l_coefficient(data: &ScatteringData, mu: f64) -> f64 {
    let (s, f): (Vec<f64>, Vec<f64>) = data
        .spectral_grid
        .values()
        .iter()
        .zip(&data.r_samples)
        .filter(|p| *p.0 >= 0.0)
        .map(|(&s, &r)| (s, s / (s * s + mu * mu) * log_weight(r)))
        .unzip();
    if s.len() < 2 {
        return 0.0;
    }
    trapezoid_real(&s, &f) / PI
}

/// Number of quadrature cells on `[0, z0]` for `delta_hat`.
const DELTA_CELLS: usize = 400;

/// `delta_hat_j = exp[(1/2 pi i) integral_0^{z0} log(1 + |r|^2) / (s - i mu) ds]`.
pub fn delta_hat(data: &ScatteringData, mu: f64, z0: f64) -> C64 {
    if z0 <= 0.0 {
        return ONE;
    }
    let weights: Vec<C64> = data.log_weight();
    let h = z0 / DELTA_CELLS as f64;
    let mut acc = ZERO;
    for k in 0..=DELTA_CELLS {
        let s = k as f64 * h;
        let w = if k == 0 || k == DELTA_CELLS { 0.5 } else { 1.0 };
        let f = data.spectral_grid.interpolate(&weights, s).re;
        acc += w * f / (C64::new(s, -mu));
    }
    (acc * h / C64::new(0.0, 2.0 * PI)).exp()
}

/// `rho_j` with `gamma_j = e^{-i rho_j} sqrt(ratio_j)`, using the one- or two-zero convention.
pub fn extract_rho(data: &ScatteringData) -> Vec<f64> {
    let q = data.q;
    let one = data.zeros.len() == 1;
    data.zeros
        .iter()
        .zip(&data.norming_constants)
        .map(|(&mu, &g)| {
            let ratio = if one { (mu + q) / (mu - q) } else { (mu - q) / (mu + q) };
            let root = C64::new(ratio, 0.0).sqrt();
            -(g / root).arg()
        })
        .collect()
}

/// `v_mu(x) = mu sech(mu |x| + atanh(q / mu))`.
pub fn ground_state(mu: f64, q: f64, x: f64) -> f64 {
    mu / (mu * x.abs() + (q / mu).atanh()).cosh()
}

/// Intermediate quantities of the long-time formulas at one `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticState {
    pub x: f64,
    pub t: f64,
    pub z0: f64,
    pub nu: f64,
    pub l: Vec<f64>,
    pub delta_hat: Vec<C64>,
    pub k1: C64,
    pub k2: C64,
    pub p: [C64; 4],
    pub upsilon: Vec<C64>,
    pub upsilon_x: Vec<C64>,
    pub upsilon_hat: Vec<C64>,
    pub upsilon_hat_x: Vec<C64>,
    pub s0: C64,
    pub s: C64,
    pub s1: C64,
    pub s2: C64,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub q: f64,
}

pub fn asymptotic_state(data: &ScatteringData, rho: &[f64], x: f64, t: f64) -> Result<AsymptoticState> {
    let n = data.zeros.len();
    if n == 0 || n > 2 {
        return Err(Error::UnsupportedSpectrum(n));
    }
    if rho.len() != n {
        return Err(Error::InvalidArgument("one phase rho per zero is required".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let q = data.q;
    let lk = local_k_from_data(data, x, t);
    let z0 = lk.z0;
    let mu = data.zeros.clone();
    let l: Vec<f64> = mu.iter().map(|&m| l_coefficient(data, m)).collect();
    let delta_hat: Vec<C64> = mu.iter().map(|&m| delta_hat(data, m, z0)).collect();
    let mut upsilon = Vec::with_capacity(n);
    let mut upsilon_hat = Vec::with_capacity(n);
    let mut upsilon_x = Vec::with_capacity(n);
    let mut upsilon_hat_x = Vec::with_capacity(n);
    for j in 0..n {
        let m = mu[j];
        let v = -C64::new((m - q) / (m + q), 0.0).sqrt()
            * C64::from_polar(1.0, m * m * t / 2.0 + rho[j] + l[j])
            * delta_hat[j]
            * delta_hat[j];
        let vh = v * ((m + q) / (m - q));
        let decay = (-m * x.abs()).exp();
        upsilon.push(v);
        upsilon_hat.push(vh);
        upsilon_x.push(v * decay);
        upsilon_hat_x.push(vh * decay);
    }
    let st = t.sqrt();
    let zeta = |m: f64| st * C64::new(z0, -m);
    let mut p = [ZERO; 4];
    p[0] = I * lk.k1 / zeta(mu[0]);
    p[1] = -I * lk.k2 / zeta(mu[0]);
    let (mut s0, mut s, mut s1, mut s2) = (ZERO, ZERO, ZERO, ZERO);
    if n == 2 {
        p[2] = I * lk.k1 / zeta(mu[1]);
        p[3] = -I * lk.k2 / zeta(mu[1]);
        let (v1, v2) = (upsilon_hat_x[0], upsilon_hat_x[1]);
        let c = 2.0 * mu[0] / (mu[0] - mu[1]);
        s0 = -c * (v1 - v2) / (v1.norm_sqr() + 1.0);
        s = c * ((p[1] * v1 + 1.0) * (v2 + p[2]) - (v1 + p[0]) * (p[3] * v2 + 1.0))
            / ((v1 + p[0]).norm_sqr() + (p[1] * v1 + 1.0).norm_sqr());
        s1 = v2 + p[2] - (p[1].conj() * v1.conj() + 1.0) * s;
        s2 = p[3] * v2 + 1.0 + (v1.conj() + p[0].conj()) * s;
    }
    Ok(AsymptoticState {
        x,
        t,
        z0,
        nu: lk.nu,
        l,
        delta_hat,
        k1: lk.k1,
        k2: lk.k2,
        p,
        upsilon,
        upsilon_x,
        upsilon_hat,
        upsilon_hat_x,
        s0,
        s,
        s1,
        s2,
        mu,
        rho: rho.to_vec(),
        q,
    })
}

/// `-2 mu (v + p1)(conj(p2) conj(v) + 1) / (|v + p1|^2 + |p2 v + 1|^2)`.
fn soliton_term(mu: f64, v: C64, p1: C64, p2: C64) -> C64 {
    -2.0 * mu * (v + p1) * (p2.conj() * v.conj() + 1.0) / ((v + p1).norm_sqr() + (p2 * v + 1.0).norm_sqr())
}

impl AsymptoticState {
    fn leading_phase(&self) -> C64 {
        let m = self.mu[0];
        C64::from_polar(1.0, m * m * self.t / 2.0 + self.rho[0] + self.l[0])
    }

    pub fn small_x(&self) -> C64 {
        let m = self.mu[0];
        if self.mu.len() == 1 {
            return self.leading_phase() * ground_state(m, self.q, self.x);
        }
        let first = self.leading_phase() * m / (m * self.x.abs() - (self.q / m).atanh()).cosh();
        let (v1, v2) = (self.upsilon_hat_x[0], self.upsilon_hat_x[1]);
        let num = (v2 - self.s0) * (1.0 + v1 * self.s0.conj());
        let den = (v2 - self.s0).norm_sqr() + (1.0 + v1 * self.s0.conj()).norm_sqr();
        first - 2.0 * self.mu[1] * num / den
    }

    pub fn large_x(&self) -> C64 {
        let radiation = -self.k1 / self.t.sqrt();
        if self.mu.len() == 1 {
            return radiation + soliton_term(self.mu[0], self.upsilon_x[0], self.p[0], self.p[1]);
        }
        let second = -2.0 * self.mu[1] * self.s1 * self.s2.conj() / (self.s1.norm_sqr() + self.s2.norm_sqr());
        radiation + soliton_term(self.mu[0], self.upsilon_hat_x[0], self.p[0], self.p[1]) + second
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticValue {
    pub u_leading: C64,
    pub error_scale: f64,
    pub region: Region,
    pub small_x: C64,
    pub large_x: C64,
}

/// `eps |q|^{-1/2} t^{-(1/2 + kappa)}` with `eps = max |r|`.
pub fn error_scale(eps: f64, q: f64, t: f64, kappa: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    eps / q.abs().sqrt() * t.powf(-(0.5 + kappa))
}

pub fn theorem_main_eval(
    data: &ScatteringData,
    rho: &[f64],
    x: f64,
    t: f64,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticValue> {
    let state = asymptotic_state(data, rho, x, t)?;
    let small_x = state.small_x();
    let large_x = state.large_x();
    let region = Region::select(x);
    let u_leading = match region {
        Region::SmallX => small_x,
        Region::LargeX => large_x,
    };
    Ok(AsymptoticValue {
        u_leading,
        error_scale: error_scale(data.max_reflection(), data.q, t, opts.kappa),
        region,
        small_x,
        large_x,
    })
}

/// `w0 = integral_0^inf w`.
pub fn w0(w: &SampledField) -> f64 {
    let s = w.grid.nodes();
    let f: Vec<f64> = w.values.iter().map(|v| v.re).collect();
    trapezoid_real(&s, &f)
}

/// `w1 = integral_R Re w v_{mu0}` for `w` sampled on `[0, L]` and extended evenly.
pub fn w1(w: &SampledField, mu0: f64, q: f64) -> f64 {
    let s = w.grid.nodes();
    let f: Vec<f64> = s.iter().zip(&w.values).map(|(&x, v)| v.re * ground_state(mu0, q, x)).collect();
    2.0 * trapezoid_real(&s, &f)
}

/// `K(z) = -Re integral_0^inf e^{-isz} w(s) (z^2 - 2iz mu0 tanh(mu0 s) - mu0^2) / (z^2 + mu0^2) ds`.
pub fn k_function(w: &SampledField, mu0: f64, z: f64) -> f64 {
    let s = w.grid.nodes();
    let den = z * z + mu0 * mu0;
    let f: Vec<f64> = s
        .iter()
        .zip(&w.values)
        .map(|(&x, v)| {
            let g = C64::new(z * z - mu0 * mu0, -2.0 * z * mu0 * (mu0 * x).tanh()) / den;
            (C64::from_polar(1.0, -x * z) * v.re * g).re
        })
        .collect();
    -trapezoid_real(&s, &f)
}

/// Inputs of the intermediate-time formulas for data `v_{mu0} + q w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallQParams {
    pub mu0: f64,
    pub w0: f64,
    pub w1: f64,
    /// Overrides `mu0 + q w1` when the zero is known.
    pub mu1: Option<f64>,
    pub q: f64,
}

impl SmallQParams {
    pub fn mu1(&self) -> f64 {
        self.mu1.unwrap_or(self.mu0 + self.q * self.w1)
    }
}

/// `E0 = sqrt(2 pi) e^{-i pi/4}`.
fn e0() -> C64 {
    C64::from_polar((2.0 * PI).sqrt(), -FRAC_PI_4)
}

/// `(p1, p2)` for the intermediate-time regime.
pub fn small_q_p(params: &SmallQParams, k_at_z0: f64, x: f64, t: f64) -> (C64, C64) {
    let z0 = x.abs() / t;
    let mu1 = params.mu1();
    let den = PI * I * C64::new(z0, -mu1);
    let pre = -params.q / t.sqrt() * k_at_z0;
    let osc = C64::from_polar(1.0, t * z0 * z0 / 2.0);
    (pre * e0() * osc / den, pre * e0().conj() * osc.conj() / den)
}

pub fn small_q_small_x(params: &SmallQParams, x: f64, t: f64) -> C64 {
    let mu1 = params.mu1();
    let omega = -x * x / (2.0 * t) + mu1 * mu1 * t / 2.0 + FRAC_PI_4;
    let sech2 = 1.0 / (mu1 * x).cosh().powi(2);
    let tanh2 = (mu1 * x).tanh().powi(2);
    let corr = params.q
        * params.w0
        * (2.0 / (PI * t)).sqrt()
        * (C64::from_polar(sech2, omega) - C64::from_polar(tanh2, -omega));
    C64::from_polar(1.0, mu1 * mu1 * t / 2.0) * (ground_state(mu1, params.q, x) - corr)
}

pub fn small_q_large_x(params: &SmallQParams, k_at_z0: f64, x: f64, t: f64) -> C64 {
    let mu1 = params.mu1();
    let q = params.q;
    let z0 = x.abs() / t;
    let (p1, p2) = small_q_p(params, k_at_z0, x, t);
    let v = -((mu1 - q) / (mu1 + q)).sqrt() * C64::from_polar((-mu1 * x.abs()).exp(), mu1 * mu1 * t / 2.0);
    I * C64::new(z0, -mu1) * p1 + soliton_term(mu1, v, p1, p2)
}

/// Intermediate-time leading term, small- or large-|x| form chosen by region.
pub fn theorem_small_q_eval(params: &SmallQParams, k: impl Fn(f64) -> f64, x: f64, t: f64) -> C64 {
    if params.q.abs() > 0.3 {
        log::warn!("intermediate-time formulas used with |q| = {} above 0.3", params.q.abs());
    }
    match Region::select(x) {
        Region::SmallX => small_q_small_x(params, x, t),
        Region::LargeX => small_q_large_x(params, k(x.abs() / t), x, t),
    }
}

/// `u(0, t) = e^{i l^2 t/2}(l - sqrt(2/(pi t)) e^{i(l^2 t/2 + pi/4)} integral_0^inf w)` with `l = lambda_hat`.
pub fn breathing_formula(lambda_hat: f64, w_integral: f64, t: f64) -> C64 {
    let ph = lambda_hat * lambda_hat * t / 2.0;
    C64::from_polar(1.0, ph)
        * (lambda_hat - (2.0 / (PI * t)).sqrt() * C64::from_polar(1.0, ph + FRAC_PI_4) * w_integral)
}

/// Perturbative zero locations with the orders of their errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuEstimate {
    pub mu1_est: f64,
    pub mu1_order: f64,
    pub mu2_est: f64,
    pub mu2_order: f64,
}

/// Zeros for initial data `v_{mu0} + eps w`.
pub fn mu_perturbation(w: &SampledField, mu0: f64, q: f64, eps: f64) -> MuEstimate {
    let w1 = if eps == 0.0 { 0.0 } else { w1(w, mu0, q) };
    MuEstimate {
        mu1_est: mu0 + eps * w1,
        mu1_order: eps * q.abs() + eps * eps,
        mu2_est: -q,
        mu2_order: eps * eps * q.abs(),
    }
}
