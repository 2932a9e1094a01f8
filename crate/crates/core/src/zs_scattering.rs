//! Direct scattering for `psi_x = (i z sigma + Q) psi`, `sigma = diag(1/2, -1/2)`,
//! `Q = (0, u; -conj(u), 0)`.
//!
//! Jost columns are integrated in phase-factored form `m = psi * exp(-i x z sigma)`,
//! so for `Im z >= 0` the integration direction is always the stable one.

use rayon::prelude::*;

use crate::data::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::{SampledField, SpectralGrid};
use crate::linalg::{wronskian, Vec2, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy)]
pub struct JostOptions {
    /// Largest `|u|` allowed at the truncation points, relative to `sup |u|`.
    pub tail_threshold: f64,
    /// Cap on `Im z * halfwidth`.
    pub stiffness_cap: f64,
    /// `|a(z)|` below this on the real axis counts as a real zero.
    pub a_min: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        Self { tail_threshold: 1e-8, stiffness_cap: 700.0, a_min: 1e-6 }
    }
}

/// A potential prepared for repeated Jost integrations.
#[derive(Debug, Clone)]
pub struct Potential {
    field: SampledField,
    mid: Vec<C64>,
}

impl Potential {
    pub fn new(field: &SampledField) -> Self {
        let v = &field.values;
        let n = v.len();
        let mid = (0..n - 1)
            .map(|i| {
                if i == 0 || i + 2 >= n {
                    0.5 * (v[i] + v[i + 1])
                } else {
                    (9.0 * (v[i] + v[i + 1]) - (v[i - 1] + v[i + 2])) / 16.0
                }
            })
            .collect();
        Self { field: field.clone(), mid }
    }

    pub fn field(&self) -> &SampledField {
        &self.field
    }

    fn check(&self, z: C64, opts: &JostOptions, check_left: bool) -> Result<()> {
        if z.im < 0.0 {
            return Err(Error::InvalidArgument(format!("Jost columns need Im z >= 0, got {z}")));
        }
        let g = self.field.grid;
        let half = g.x_max.abs().max(g.x_min.abs());
        if z.im * half > opts.stiffness_cap {
            return Err(Error::Stiffness(z.im * half));
        }
        let v = &self.field.values;
        let peak = self.field.sup_norm();
        if peak > 0.0 {
            let edge = if check_left { v[0].norm().max(v[v.len() - 1].norm()) } else { v[v.len() - 1].norm() };
            if edge > opts.tail_threshold * peak {
                return Err(Error::TailTooLarge { magnitude: edge, threshold: opts.tail_threshold * peak });
            }
        }
        Ok(())
    }

    /// `m_1^+` at every node, normalized to `e_1` at `x_max`.
    pub fn right_column(&self, z: C64) -> Vec<Vec2> {
        let v = &self.field.values;
        let n = v.len();
        let h = self.field.grid.spacing();
        let rhs = |u: C64, m: Vec2| -> Vec2 { [u * m[1], -u.conj() * m[0] - I * z * m[1]] };
        let mut out = vec![[ZERO; 2]; n];
        let mut m = [ONE, ZERO];
        out[n - 1] = m;
        for i in (0..n - 1).rev() {
            m = rk4_step(&rhs, v[i + 1], self.mid[i], v[i], m, -h);
            out[i] = m;
        }
        out
    }

    /// `m_2^-` at every node, normalized to `e_2` at `x_min`.
    pub fn left_column(&self, z: C64) -> Vec<Vec2> {
        let v = &self.field.values;
        let n = v.len();
        let h = self.field.grid.spacing();
        let rhs = |u: C64, m: Vec2| -> Vec2 { [I * z * m[0] + u * m[1], -u.conj() * m[0]] };
        let mut out = vec![[ZERO; 2]; n];
        let mut m = [ZERO, ONE];
        out[0] = m;
        for i in 0..n - 1 {
            m = rk4_step(&rhs, v[i], self.mid[i], v[i + 1], m, h);
            out[i + 1] = m;
        }
        out
    }

    pub fn columns(&self, z: C64, opts: &JostOptions) -> Result<JostColumns> {
        self.check(z, opts, true)?;
        let m1_plus = self.right_column(z);
        let m2_minus = self.left_column(z);
        let k = self.field.grid.zero_index().unwrap_or(self.field.len() / 2);
        let a = wronskian(m1_plus[k], m2_minus[k]);
        Ok(JostColumns { z, m1_plus, m2_minus, a })
    }

    /// Value at node `k` of every Jost quantity for one `z`.
    pub fn solve_at(&self, z: C64, k: usize, opts: &JostOptions) -> Result<JostValue> {
        let c = self.columns(z, opts)?;
        let x = self.field.x(k);
        let b = (z.im == 0.0).then(|| b_from_columns(c.m1_plus[k], c.m2_minus[k], x, z.re));
        Ok(JostValue {
            z,
            x0: x,
            m1_plus: c.m1_plus[k],
            m2_minus: c.m2_minus[k],
            a: wronskian(c.m1_plus[k], c.m2_minus[k]),
            b,
        })
    }

    /// `g(0, z) = (A, B)` for half-line data given on `[0, L]`.
    pub fn half_line_values(&self, z: C64, opts: &JostOptions) -> Result<Vec2> {
        self.check(z, opts, false)?;
        Ok(self.right_column(z)[0])
    }
}

fn rk4_step(f: &impl Fn(C64, Vec2) -> Vec2, u0: C64, um: C64, u1: C64, m: Vec2, h: f64) -> Vec2 {
    let add = |a: Vec2, b: Vec2, s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let k1 = f(u0, m);
    let k2 = f(um, add(m, k1, 0.5 * h));
    let k3 = f(um, add(m, k2, 0.5 * h));
    let k4 = f(u1, add(m, k3, h));
    [
        m[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
        m[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
    ]
}

/// `b = det(psi_1^-, psi_1^+)` at a point `x` for real `z`,
/// using `psi_1^- = (0, 1; -1, 0) conj(psi_2^-)`.
fn b_from_columns(m1p: Vec2, m2m: Vec2, x: f64, z: f64) -> C64 {
    let psi1_minus = [m2m[1].conj(), -m2m[0].conj()];
    C64::from_polar(1.0, x * z) * wronskian(psi1_minus, m1p)
}

/// Phase-factored Jost columns on the whole grid.
#[derive(Debug, Clone)]
pub struct JostColumns {
    pub z: C64,
    pub m1_plus: Vec<Vec2>,
    pub m2_minus: Vec<Vec2>,
    pub a: C64,
}

/// Jost data for one spectral point at the node `x0`.
#[derive(Debug, Clone, Copy)]
pub struct JostValue {
    pub z: C64,
    pub x0: f64,
    pub m1_plus: Vec2,
    pub m2_minus: Vec2,
    pub a: C64,
    /// Only defined for real `z`.
    pub b: Option<C64>,
}

impl JostValue {
    /// `gamma` with `psi_1^+ = gamma psi_2^-`; meaningful only at a zero of `a`.
    pub fn norming_constant(&self) -> C64 {
        let j = if self.m2_minus[0].norm() > self.m2_minus[1].norm() { 0 } else { 1 };
        self.m1_plus[j] / self.m2_minus[j] * (2.0 * I * self.x0 * self.z).exp()
    }
}

/// Jost data at `x = 0` (which must be a node).
pub fn jost_solve(u: &SampledField, z: C64) -> Result<JostValue> {
    let k = u.grid.require_zero_node()?;
    Potential::new(u).solve_at(z, k, &JostOptions::default())
}

/// `(a, b)` on every node of a real grid.
pub fn scan_ab(u: &SampledField, grid: &SpectralGrid, opts: &JostOptions) -> Result<Vec<(C64, C64)>> {
    let pot = Potential::new(u);
    let k = u.grid.zero_index().unwrap_or(u.len() / 2);
    grid.values()
        .par_iter()
        .map(|&z| {
            let v = pot.solve_at(C64::new(z, 0.0), k, opts)?;
            Ok((v.a, v.b.unwrap_or(ZERO)))
        })
        .collect()
}

/// Reflection coefficient `r = conj(b) / conj(a)` on the grid; `q` and `beta` are left at 0.
pub fn scan_spectrum(u: &SampledField, grid: &SpectralGrid, opts: &JostOptions) -> Result<ScatteringData> {
    let ab = scan_ab(u, grid, opts)?;
    let mut r = Vec::with_capacity(ab.len());
    for (k, (a, b)) in ab.iter().enumerate() {
        if a.norm() < opts.a_min {
            return Err(Error::RealAxisZero(grid.values()[k]));
        }
        r.push(b.conj() / a.conj());
    }
    Ok(ScatteringData {
        spectral_grid: grid.clone(),
        r_samples: r,
        zeros: vec![],
        norming_constants: vec![],
        beta: 0.0,
        q: 0.0,
    })
}

/// A zero `i mu` of `a` with `a'(i mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryZero {
    pub mu: f64,
    pub a_prime: C64,
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroScanOptions {
    pub scan_points: usize,
    pub contour_nodes: usize,
    pub contour_floor: f64,
    pub derivative_tolerance: f64,
    /// `|mu_2 - |q||` below this raises the degenerate-dichotomy flag.
    pub dichotomy_window: f64,
    /// Upper bound on the contour half-width (the default is `10 * mu_max`).
    pub contour_max: f64,
}

impl Default for ZeroScanOptions {
    fn default() -> Self {
        Self {
            scan_points: 2048,
            contour_nodes: 8192,
            contour_floor: 1e-3,
            derivative_tolerance: 1e-10,
            dichotomy_window: 1e-4,
            contour_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroScan {
    pub zeros: Vec<ImaginaryZero>,
    pub winding: i64,
    /// Set when a zero sits within the dichotomy window of `|q|`.
    pub degenerate_dichotomy: bool,
}

/// Default upper end of the imaginary-axis scan.
pub fn default_mu_max(mu_estimate: f64, q: f64) -> f64 {
    2.0 * mu_estimate.max(q.abs()) + 1.0
}

/// Zeros of `a` on `(0, mu_max]`, checked against the argument principle.
pub fn find_imaginary_zeros<F>(a: F, mu_max: f64, q: f64, opts: &ZeroScanOptions) -> Result<ZeroScan>
where
    F: Fn(C64) -> C64 + Sync,
{
    let n = opts.scan_points;
    let mus: Vec<f64> = (1..=n).map(|j| mu_max * j as f64 / n as f64).collect();
    let vals: Vec<C64> = mus.par_iter().map(|&m| a(I * m)).collect();

    let mut candidates = Vec::new();
    for j in 0..n {
        let here = vals[j].norm();
        let left = if j > 0 { vals[j - 1].norm() } else { f64::INFINITY };
        let right = if j + 1 < n { vals[j + 1].norm() } else { f64::INFINITY };
        if here <= left && here <= right {
            candidates.push(j);
        }
        if j + 1 < n && vals[j].re * vals[j + 1].re <= 0.0 {
            candidates.push(j);
        }
    }
    candidates.dedup();

    let h = mu_max / n as f64;
    let mut found: Vec<f64> = Vec::new();
    for &j in &candidates {
        let z0 = I * mus[j];
        let z1 = I * (mus[j] + 0.5 * h);
        if let Some(z) = secant(&a, z0, z1) {
            let on_axis = z.re.abs() <= 1e-7 * (1.0 + z.norm());
            if on_axis && z.im > 0.0 && z.im <= mu_max * (1.0 + 1e-9) && !found.iter().any(|m| (m - z.im).abs() < 1e-7)
            {
                found.push(z.im);
            }
        }
    }
    found.sort_by(|x, y| y.total_cmp(x));

    let mut zeros = Vec::with_capacity(found.len());
    for &mu in &found {
        let d = derivative(&a, I * mu, 1e-3 * mu.min(1.0));
        if d.norm() < opts.derivative_tolerance {
            return Err(Error::DerivativeVanishes(mu));
        }
        zeros.push(ImaginaryZero { mu, a_prime: d });
    }

    let winding = winding_number(&a, (10.0 * mu_max).min(opts.contour_max), opts.contour_floor, opts.contour_nodes);
    if winding != zeros.len() as i64 {
        return Err(Error::CountMismatch { scan: zeros.len(), winding });
    }
    let degenerate_dichotomy = zeros.iter().any(|z| (z.mu - q.abs()).abs() < opts.dichotomy_window);
    if degenerate_dichotomy {
        log::warn!(
            "zero within {} of |q| = {}: one/two-zero dichotomy is numerically ambiguous",
            opts.dichotomy_window,
            q.abs()
        );
    }
    Ok(ZeroScan { zeros, winding, degenerate_dichotomy })
}

fn secant<F: Fn(C64) -> C64>(a: &F, mut z0: C64, mut z1: C64) -> Option<C64> {
    let mut f0 = a(z0);
    let mut f1 = a(z1);
    for _ in 0..80 {
        let df = f1 - f0;
        if df.norm() == 0.0 {
            break;
        }
        let z2 = z1 - f1 * (z1 - z0) / df;
        if !z2.is_finite() || z2.im <= 0.0 {
            return None;
        }
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = a(z1);
        if (z1 - z0).norm() < 1e-14 * (1.0 + z1.norm()) {
            break;
        }
    }
    let scale = a(z1 + I * 1e-3).norm().max(1e-300);
    (f1.norm() < 1e-9 * scale.max(1.0)).then_some(z1)
}

/// Five-point derivative along the real direction.
pub fn derivative<F: Fn(C64) -> C64>(a: &F, z: C64, h: f64) -> C64 {
    (-a(z + 2.0 * h) + 8.0 * a(z + h) - 8.0 * a(z - h) + a(z - 2.0 * h)) / (12.0 * h)
}

/// Winding number of `a` around the rectangle `[-Z, Z] x [floor, Z]`.
pub fn winding_number<F: Fn(C64) -> C64 + Sync>(a: &F, big: f64, floor: f64, nodes: usize) -> i64 {
    let per_side = nodes / 4;
    let corners = [C64::new(-big, floor), C64::new(big, floor), C64::new(big, big), C64::new(-big, big)];
    let mut path = Vec::with_capacity(4 * per_side);
    for s in 0..4 {
        let (p, q) = (corners[s], corners[(s + 1) % 4]);
        for k in 0..per_side {
            path.push(p + (q - p) * (k as f64 / per_side as f64));
        }
    }
    let vals: Vec<C64> = path.par_iter().map(|&z| a(z)).collect();
    let mut total = 0.0;
    for k in 0..vals.len() {
        let (v0, v1) = (vals[k], vals[(k + 1) % vals.len()]);
        total += (v1 / v0).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}
