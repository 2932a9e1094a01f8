//! Bäcklund transformation `B_q` through the linear system at `z = iq`,
//! and the extension of half-line data to a q-symmetric potential on the line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{SampledField, SpatialGrid};
use crate::linalg::{norm_sqr, ratio_functional, Mat2, Vec2, C64, ONE, ZERO};

/// `xi(x) = Psi(x, iq) e_1` along the grid, with `P = phi P_0 phi^{-1}`.
#[derive(Debug, Clone)]
pub struct PMatrixTrace {
    pub grid: SpatialGrid,
    /// Unit-norm direction of `xi`.
    pub phi1: Vec<Vec2>,
    /// `log |xi(x)|` before renormalization.
    pub log_norm: Vec<f64>,
    pub p: Vec<Mat2>,
    pub beta_plus: f64,
    pub beta_minus: f64,
}

impl PMatrixTrace {
    /// Largest violation of `tr P = 0`, `det P = q^2`, `P = -P^*`.
    pub fn invariant_defect(&self, q: f64) -> f64 {
        self.p
            .iter()
            .map(|p| {
                let anti = (*p + p.adjoint()).max_abs();
                p.trace().norm().max((p.det() - q * q).norm()).max(anti)
            })
            .fold(0.0, f64::max)
    }
}

fn p_matrix(xi: Vec2, q: f64) -> Mat2 {
    let n = norm_sqr(xi);
    let d = (xi[0].norm_sqr() - xi[1].norm_sqr()) / n;
    let off = 2.0 * xi[0] * xi[1].conj() / n;
    let s = C64::new(0.0, -q);
    Mat2::new(s * d, s * off, s * off.conj(), -s * d)
}

/// Cubic midpoint samples of `v`.
pub(crate) fn midpoints(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n.saturating_sub(1))
        .map(|i| {
            if n < 4 {
                0.5 * (v[i] + v[i + 1])
            } else if i == 0 {
                (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0
            } else if i + 2 >= n {
                (5.0 * v[n - 1] + 15.0 * v[n - 2] - 5.0 * v[n - 3] + v[n - 4]) / 16.0
            } else {
                (9.0 * (v[i] + v[i + 1]) - (v[i - 1] + v[i + 2])) / 16.0
            }
        })
        .collect()
}

fn rhs(q: f64, u: C64, m: Vec2) -> Vec2 {
    [-0.5 * q * m[0] + u * m[1], -u.conj() * m[0] + 0.5 * q * m[1]]
}

fn step(q: f64, u0: C64, um: C64, u1: C64, m: Vec2, h: f64) -> Vec2 {
    let add = |a: Vec2, b: Vec2, s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let k1 = rhs(q, u0, m);
    let k2 = rhs(q, um, add(m, k1, 0.5 * h));
    let k3 = rhs(q, um, add(m, k2, 0.5 * h));
    let k4 = rhs(q, u1, add(m, k3, h));
    [
        m[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
        m[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
    ]
}

fn renormalize(m: Vec2, x: f64) -> Result<(Vec2, f64)> {
    let n = norm_sqr(m).sqrt();
    if !(n > 1e-250) || !n.is_finite() {
        return Err(Error::ZeroVector(x));
    }
    Ok(([m[0] / n, m[1] / n], n.ln()))
}

/// Above this `|xi_2 / xi_1|` at the origin the inward solution is never adopted.
pub const SUBDOMINANT_TOLERANCE: f64 = 1e-3;

/// Integrates from `path[0]` to the last node with the given step sign; `coarse` pairs
/// every other node and uses the skipped node as midpoint.
fn inward(
    q: f64,
    v: &[C64],
    mid: &[C64],
    path: &[usize],
    h: f64,
    start: Vec2,
    grid: SpatialGrid,
) -> Result<(Vec<Vec2>, Vec<f64>)> {
    let mut m = start;
    let mut dirs = vec![m];
    let mut logs = vec![0.0];
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (um, dx) = if a.abs_diff(b) == 2 { (v[(a + b) / 2], 2.0 * h) } else { (mid[a.min(b)], h) };
        let signed = if b > a { dx } else { -dx };
        let (next, l) = renormalize(step(q, v[a], um, v[b], m, signed), grid.x(b))?;
        m = next;
        dirs.push(m);
        logs.push(logs.last().unwrap() + l);
    }
    Ok((dirs, logs))
}

fn origin_ratio(end: Vec2) -> C64 {
    end[1] / end[0]
}

/// `xi` grows away from the origin for generic data, so forward integration is stable.
/// When the solution through `e_1` is the decaying one instead, forward errors grow like
/// `e^{|q| |x|}`. The decaying solution is then recomputed inward from the far end. It
/// replaces the forward one when its offset from `e_1` at the origin is discretization
/// noise, which shows as a change of the offset comparable to itself when the step is doubled.
#[allow(clippy::too_many_arguments)]
fn refine_subdominant(
    q: f64,
    v: &[C64],
    mid: &[C64],
    h: f64,
    path: &[usize],
    decaying: Vec2,
    dir: &mut [Vec2],
    log_norm: &mut [f64],
    grid: SpatialGrid,
) -> Result<()> {
    if path.len() < 5 {
        return Ok(());
    }
    let (fine, logs) = inward(q, v, mid, path, h, decaying, grid)?;
    let end = *fine.last().unwrap();
    if end[0].norm() == 0.0 {
        return Ok(());
    }
    let r_fine = origin_ratio(end);
    if r_fine.norm() > SUBDOMINANT_TOLERANCE {
        return Ok(());
    }
    let skip = (path.len() - 1) % 2;
    let coarse_path: Vec<usize> = path[skip..].iter().step_by(2).copied().collect();
    let (coarse, _) = inward(q, v, mid, &coarse_path, h, decaying, grid)?;
    let r_coarse = origin_ratio(*coarse.last().unwrap());
    if (r_coarse - r_fine).norm() < 0.5 * r_fine.norm().max(r_coarse.norm()) {
        return Ok(());
    }
    let origin = logs[logs.len() - 1];
    let phase = end[0].conj() / end[0].norm();
    for ((&node, d), l) in path.iter().zip(&fine).zip(&logs).rev().skip(1) {
        dir[node] = [d[0] * phase, d[1] * phase];
        log_norm[node] = l - origin;
    }
    Ok(())
}

/// `(B_q u)(x) = u(x) - 2q F(xi(x))`, with `xi` started from `e_1` at `x = 0`.
pub fn backlund_transform(u: &SampledField, q: f64) -> Result<(SampledField, PMatrixTrace)> {
    let grid = u.grid;
    let k0 = grid.require_zero_node()?;
    let v = &u.values;
    let n = v.len();
    let h = grid.spacing();
    let mid = midpoints(v);

    let mut dir = vec![[ZERO; 2]; n];
    let mut log_norm = vec![0.0; n];
    dir[k0] = [ONE, ZERO];
    let mut m = dir[k0];
    let mut acc = 0.0;
    for i in k0..n - 1 {
        let (next, l) = renormalize(step(q, v[i], mid[i], v[i + 1], m, h), grid.x(i + 1))?;
        acc += l;
        m = next;
        dir[i + 1] = m;
        log_norm[i + 1] = acc;
    }
    m = dir[k0];
    acc = 0.0;
    for i in (0..k0).rev() {
        let (next, l) = renormalize(step(q, v[i + 1], mid[i], v[i], m, -h), grid.x(i))?;
        acc += l;
        m = next;
        dir[i] = m;
        log_norm[i] = acc;
    }
    if q != 0.0 {
        // e_1 ~ e^{-qx/2}, e_2 ~ e^{qx/2} where u vanishes
        let (right_decaying, left_decaying) =
            if q > 0.0 { ([ONE, ZERO], [ZERO, ONE]) } else { ([ZERO, ONE], [ONE, ZERO]) };
        let right: Vec<usize> = (k0..n).rev().collect();
        refine_subdominant(q, v, &mid, h, &right, right_decaying, &mut dir, &mut log_norm, grid)?;
        let left: Vec<usize> = (0..=k0).collect();
        refine_subdominant(q, v, &mid, h, &left, left_decaying, &mut dir, &mut log_norm, grid)?;
    }

    let values: Vec<C64> = if q == 0.0 {
        v.clone()
    } else {
        v.iter().zip(&dir).map(|(&u, &xi)| u - 2.0 * q * ratio_functional(xi)).collect()
    };
    let p: Vec<Mat2> = dir.iter().map(|&xi| p_matrix(xi, q)).collect();
    let beta_of = |xi: Vec2| q * (xi[0].norm_sqr() - xi[1].norm_sqr()) / norm_sqr(xi);
    let trace =
        PMatrixTrace { grid, beta_plus: beta_of(dir[n - 1]), beta_minus: beta_of(dir[0]), phi1: dir, log_norm, p };
    Ok((SampledField::new(grid, values)?, trace))
}

/// Extension of data on `[0, L]` (x = 0 first node) to `[-L, L]` by
/// `u^e(x) = (B_q u)(-x)` for `x < 0`.
pub fn backlund_extend(u_plus: &SampledField, q: f64) -> Result<SampledField> {
    let g = u_plus.grid;
    if g.x_min != 0.0 {
        return Err(Error::InvalidGrid(format!("half-line data must start at x = 0, got {}", g.x_min)));
    }
    let (tilde, _) = backlund_transform(u_plus, q)?;
    let n = u_plus.len();
    let full = SpatialGrid::symmetric(g.x_max, 2 * n - 1)?;
    let mut values = Vec::with_capacity(2 * n - 1);
    values.extend(tilde.values[1..].iter().rev());
    values.extend(&u_plus.values);
    SampledField::new(full, values)
}

/// Extension of data on `[-L, 0]` (x = 0 last node) to `[-L, L]`.
pub fn backlund_extend_minus(u_minus: &SampledField, q: f64) -> Result<SampledField> {
    let g = u_minus.grid;
    if g.x_max != 0.0 {
        return Err(Error::InvalidGrid(format!("left half-line data must end at x = 0, got {}", g.x_max)));
    }
    let (tilde, _) = backlund_transform(u_minus, q)?;
    let n = u_minus.len();
    let full = SpatialGrid::symmetric(-g.x_min, 2 * n - 1)?;
    let mut values = Vec::with_capacity(2 * n - 1);
    values.extend(&u_minus.values);
    values.extend(tilde.values[..n - 1].iter().rev());
    SampledField::new(full, values)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryCheck {
    /// `sup |u - R B_q u|`.
    pub sup_deviation: f64,
    pub beta: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
}

/// How far `u` is from being q-symmetric, `u = R B_q u`.
pub fn check_q_symmetry(u: &SampledField, q: f64) -> Result<SymmetryCheck> {
    if !u.grid.is_symmetric() {
        return Err(Error::InvalidGrid("q-symmetry needs a grid symmetric about 0".into()));
    }
    let (tilde, trace) = backlund_transform(u, q)?;
    let sup_deviation = u.sup_distance(&tilde.reflected());
    Ok(SymmetryCheck {
        sup_deviation,
        beta: 0.5 * (trace.beta_plus + trace.beta_minus),
        beta_plus: trace.beta_plus,
        beta_minus: trace.beta_minus,
    })
}

/// Fourth-order one-sided derivatives `(u_x(0-), u_x(0+))` at the origin node.
pub fn one_sided_derivatives(u: &SampledField) -> Result<(C64, C64)> {
    let k = u.grid.require_zero_node()?;
    if k < 4 || k + 4 >= u.len() {
        return Err(Error::InvalidGrid("need four nodes on each side of 0".into()));
    }
    let h = u.grid.spacing();
    let v = &u.values;
    let w = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
    let right: C64 = (0..5).map(|j| v[k + j] * w[j]).sum::<C64>() / h;
    let left: C64 = -(0..5).map(|j| v[k - j] * w[j]).sum::<C64>() / h;
    Ok((left, right))
}
