//! Adding and removing pole pairs `(xi, conj xi)` by Darboux transformation.
//!
//! A [`Frame`] is the normalized eigenfunction `m(x, z)` (with `psi = m e^{i x z sigma}`)
//! on a set of points `x`, evaluable for `Im z > 0` away from its poles.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledField, SpectralGrid};
use crate::linalg::{conj_partner, norm_sqr, normalized, ratio_functional, Mat2, Vec2, C64, I, ONE, ZERO};
use crate::zs_scattering::{JostOptions, Potential};

const COLLISION: f64 = 1e-8;
const REMOVAL_RADIUS: f64 = 1e-3;

pub trait Frame: Send + Sync {
    fn points(&self) -> &[f64];
    fn potential(&self) -> &[C64];
    /// Poles in the upper half plane.
    fn poles(&self) -> Vec<C64>;
    /// `m(x, z)` at every point.
    fn m(&self, z: C64) -> Result<Vec<Mat2>>;
    /// Unit bound-state direction at the pole `xi`, i.e. the ray of `Res_{z = xi} m e_1`.
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>>;
}

fn pole_index(poles: &[C64], xi: C64) -> Option<usize> {
    poles.iter().position(|p| (p - xi).norm() < COLLISION)
}

fn mu(z: C64, xi: C64) -> Mat2 {
    Mat2::diag(z - xi, z - xi.conj())
}

/// `b b^* + partner` frame matrix for a unit vector `b`.
fn frame_matrix(b: Vec2) -> Mat2 {
    Mat2::from_columns(b, conj_partner(b))
}

/// `m = I`, `u = 0`.
#[derive(Debug, Clone)]
pub struct FreeFrame {
    points: Vec<f64>,
    zeros: Vec<C64>,
}

impl FreeFrame {
    pub fn new(points: Vec<f64>) -> Self {
        let zeros = vec![ZERO; points.len()];
        Self { points, zeros }
    }
}

impl Frame for FreeFrame {
    fn points(&self) -> &[f64] {
        &self.points
    }
    fn potential(&self) -> &[C64] {
        &self.zeros
    }
    fn poles(&self) -> Vec<C64> {
        vec![]
    }
    fn m(&self, _z: C64) -> Result<Vec<Mat2>> {
        Ok(vec![Mat2::IDENTITY; self.points.len()])
    }
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>> {
        Err(Error::NotAPole(format!("{xi}")))
    }
}

/// Frame of a sampled potential from its Jost columns: `m = (m_1^+ / a, m_2^-)` for `Im z > 0`.
#[derive(Debug, Clone)]
pub struct JostFrame {
    potential: Arc<Potential>,
    points: Vec<f64>,
    zeros: Vec<C64>,
    opts: JostOptions,
}

impl JostFrame {
    /// `zeros` are the known zeros of `a(z; u)` in the upper half plane.
    pub fn new(u: &SampledField, zeros: Vec<C64>) -> Self {
        Self { potential: Arc::new(Potential::new(u)), points: u.grid.nodes(), zeros, opts: JostOptions::default() }
    }

    pub fn with_options(mut self, opts: JostOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn a(&self, z: C64) -> Result<C64> {
        Ok(self.potential.columns(z, &self.opts)?.a)
    }
}

impl Frame for JostFrame {
    fn points(&self) -> &[f64] {
        &self.points
    }
    fn potential(&self) -> &[C64] {
        &self.potential.field().values
    }
    fn poles(&self) -> Vec<C64> {
        self.zeros.clone()
    }
    fn m(&self, z: C64) -> Result<Vec<Mat2>> {
        if pole_index(&self.zeros, z).is_some() {
            return Err(Error::PoleCollision(format!("frame evaluated at its pole {z}")));
        }
        let c = self.potential.columns(z, &self.opts)?;
        Ok(c.m1_plus.iter().zip(&c.m2_minus).map(|(p, m)| Mat2::from_columns([p[0] / c.a, p[1] / c.a], *m)).collect())
    }
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>> {
        if pole_index(&self.zeros, xi).is_none() {
            return Err(Error::NotAPole(format!("{xi}")));
        }
        let c = self.potential.columns(xi, &self.opts)?;
        Ok(self
            .points
            .iter()
            .enumerate()
            .map(|(k, &x)| normalized(if x >= 0.0 { c.m1_plus[k] } else { c.m2_minus[k] }))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Direction {
    Add,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxStep {
    pub xi: C64,
    /// Coupling `c~(xi)` in the residue condition; unused for removal.
    pub c_tilde: C64,
    pub direction: Direction,
}

impl DarbouxStep {
    pub fn add(xi: C64, c_tilde: C64) -> Self {
        Self { xi, c_tilde, direction: Direction::Add }
    }
    pub fn remove(xi: C64) -> Self {
        Self { xi, c_tilde: ZERO, direction: Direction::Remove }
    }
}

/// Frame after adding the pole pair at `xi`: `m~ = B mu B^{-1} m mu^{-1}`.
pub struct DressedFrame {
    inner: Arc<dyn Frame>,
    xi: C64,
    b: Vec<Vec2>,
    u: Vec<C64>,
}

impl DressedFrame {
    /// Unit vectors `b_1(x)` defining the transformation.
    pub fn b(&self) -> &[Vec2] {
        &self.b
    }
    pub fn xi(&self) -> C64 {
        self.xi
    }
}

impl Frame for DressedFrame {
    fn points(&self) -> &[f64] {
        self.inner.points()
    }
    fn potential(&self) -> &[C64] {
        &self.u
    }
    fn poles(&self) -> Vec<C64> {
        let mut p = self.inner.poles();
        p.push(self.xi);
        p
    }
    fn m(&self, z: C64) -> Result<Vec<Mat2>> {
        if (z - self.xi).norm() < COLLISION {
            return Err(Error::PoleCollision(format!("frame evaluated at its pole {z}")));
        }
        let inner = self.inner.m(z)?;
        let mz = mu(z, self.xi);
        let mz_inv = Mat2::diag(ONE / (z - self.xi), ONE / (z - self.xi.conj()));
        Ok(inner
            .iter()
            .zip(&self.b)
            .map(|(m, &b)| {
                let f = frame_matrix(b);
                // unit b makes f unitary
                f * mz * f.adjoint() * *m * mz_inv
            })
            .collect())
    }
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>> {
        if (xi - self.xi).norm() < COLLISION {
            return Ok(self.b.iter().map(|&b| conj_partner(b)).collect());
        }
        let h = self.inner.bound_state(xi)?;
        let mz = mu(xi, self.xi);
        Ok(h.iter()
            .zip(&self.b)
            .map(|(&h, &b)| {
                let f = frame_matrix(b);
                normalized((f * mz * f.adjoint()).mul_vec(h))
            })
            .collect())
    }
}

/// Frame after removing the pole pair at `xi`: `m = B mu^{-1} B^{-1} m~ mu`.
pub struct ReducedFrame {
    inner: Arc<dyn Frame>,
    xi: C64,
    b: Vec<Vec2>,
    u: Vec<C64>,
}

impl ReducedFrame {
    fn m_regular(&self, z: C64) -> Result<Vec<Mat2>> {
        let inner = self.inner.m(z)?;
        let mz = mu(z, self.xi);
        let mz_inv = Mat2::diag(ONE / (z - self.xi), ONE / (z - self.xi.conj()));
        Ok(inner
            .iter()
            .zip(&self.b)
            .map(|(m, &b)| {
                let f = frame_matrix(b);
                f * mz_inv * f.adjoint() * *m * mz
            })
            .collect())
    }
}

impl Frame for ReducedFrame {
    fn points(&self) -> &[f64] {
        self.inner.points()
    }
    fn potential(&self) -> &[C64] {
        &self.u
    }
    fn poles(&self) -> Vec<C64> {
        self.inner.poles().into_iter().filter(|p| (p - self.xi).norm() >= COLLISION).collect()
    }
    fn m(&self, z: C64) -> Result<Vec<Mat2>> {
        if (z - self.xi).norm() > 10.0 * REMOVAL_RADIUS {
            return self.m_regular(z);
        }
        // the removed pole is a removable singularity: use the mean value on a small circle
        let mut acc: Option<Vec<Mat2>> = None;
        for k in 0..4 {
            let w = z + C64::from_polar(
                REMOVAL_RADIUS,
                std::f64::consts::FRAC_PI_4 + k as f64 * std::f64::consts::FRAC_PI_2,
            );
            let v = self.m_regular(w)?;
            acc = Some(match acc {
                None => v,
                Some(a) => a.iter().zip(&v).map(|(a, b)| *a + *b).collect(),
            });
        }
        Ok(acc.unwrap_or_default().iter().map(|m| m.scale(C64::new(0.25, 0.0))).collect())
    }
    fn bound_state(&self, xi: C64) -> Result<Vec<Vec2>> {
        if (xi - self.xi).norm() < COLLISION {
            return Err(Error::NotAPole(format!("{xi} was removed")));
        }
        let h = self.inner.bound_state(xi)?;
        let mz_inv = Mat2::diag(ONE / (xi - self.xi), ONE / (xi - self.xi.conj()));
        Ok(h.iter()
            .zip(&self.b)
            .map(|(&h, &b)| {
                let f = frame_matrix(b);
                normalized((f * mz_inv * f.adjoint()).mul_vec(h))
            })
            .collect())
    }
}

/// `b_1(x) ∝ m(x, xi) (1, -c e^{-i x xi} / (xi - conj xi))`, scaled to avoid overflow.
fn dressing_vector(m: &Mat2, x: f64, xi: C64, c: C64) -> Result<Vec2> {
    let d = xi - xi.conj();
    let log_w = (-c / d).ln() - I * x * xi;
    let v = if log_w.re > 0.0 { m.mul_vec([(-log_w).exp(), ONE]) } else { m.mul_vec([ONE, log_w.exp()]) };
    let n = norm_sqr(v);
    if !(n > 1e-300) || !n.is_finite() {
        return Err(Error::SingularFrame(x));
    }
    Ok(normalized(v))
}

/// Adds the pole pair `(xi, conj xi)` with coupling `c_tilde`.
pub fn darboux_add(frame: Arc<dyn Frame>, xi: C64, c_tilde: C64) -> Result<DressedFrame> {
    if xi.im <= 0.0 {
        return Err(Error::InvalidArgument(format!("pole must lie in the upper half plane, got {xi}")));
    }
    if c_tilde == ZERO {
        return Err(Error::InvalidArgument("coupling must be nonzero".into()));
    }
    if let Some(k) = pole_index(&frame.poles(), xi) {
        return Err(Error::PoleCollision(format!("{xi} coincides with existing pole {}", frame.poles()[k])));
    }
    let m = frame.m(xi)?;
    let b: Vec<Vec2> =
        m.par_iter().zip(frame.points()).map(|(m, &x)| dressing_vector(m, x, xi, c_tilde)).collect::<Result<_>>()?;
    let d = xi - xi.conj();
    let u = frame.potential().iter().zip(&b).map(|(&u, &b)| u + I * d * ratio_functional(b)).collect();
    Ok(DressedFrame { inner: frame, xi, b, u })
}

/// Removes the pole pair at `xi`.
pub fn darboux_remove(frame: Arc<dyn Frame>, xi: C64) -> Result<ReducedFrame> {
    if pole_index(&frame.poles(), xi).is_none() {
        return Err(Error::NotAPole(format!("{xi}")));
    }
    let h = frame.bound_state(xi)?;
    // the removed frame's b is the partner of the bound state
    let b: Vec<Vec2> = h.iter().map(|&h| conj_partner(h)).collect();
    let d = xi - xi.conj();
    let u = frame.potential().iter().zip(&h).map(|(&u, &h)| u + I * d * ratio_functional(h)).collect();
    Ok(ReducedFrame { inner: frame, xi, b, u })
}

/// Applies a step to a frame.
pub fn apply_step(frame: Arc<dyn Frame>, step: &DarbouxStep) -> Result<Arc<dyn Frame>> {
    Ok(match step.direction {
        Direction::Add => Arc::new(darboux_add(frame, step.xi, step.c_tilde)?),
        Direction::Remove => Arc::new(darboux_remove(frame, step.xi)?),
    })
}

/// Discrete data `{(z_k, c_k)}` plus reflection samples, updated alongside the frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleConfig {
    pub poles: Vec<C64>,
    pub couplings: Vec<C64>,
    pub grid: SpectralGrid,
    pub r_samples: Vec<C64>,
}

impl PoleConfig {
    /// `r~ = r (z - xi)/(z - conj xi)`, `c~_k = c_k (z_k - conj xi)/(z_k - xi)`.
    pub fn add(&self, xi: C64, c_tilde: C64) -> Result<PoleConfig> {
        if pole_index(&self.poles, xi).is_some() {
            return Err(Error::PoleCollision(format!("{xi}")));
        }
        let mut out = self.clone();
        for (zk, ck) in out.poles.iter().zip(out.couplings.iter_mut()) {
            *ck *= (zk - xi.conj()) / (zk - xi);
        }
        out.poles.push(xi);
        out.couplings.push(c_tilde);
        for (r, &z) in out.r_samples.iter_mut().zip(self.grid.values()) {
            let z = C64::new(z, 0.0);
            *r *= (z - xi) / (z - xi.conj());
        }
        Ok(out)
    }

    /// Inverse of [`PoleConfig::add`].
    pub fn remove(&self, xi: C64) -> Result<PoleConfig> {
        let k = pole_index(&self.poles, xi).ok_or_else(|| Error::NotAPole(format!("{xi}")))?;
        let mut out = self.clone();
        out.poles.remove(k);
        out.couplings.remove(k);
        for (zk, ck) in out.poles.iter().zip(out.couplings.iter_mut()) {
            *ck *= (zk - xi) / (zk - xi.conj());
        }
        for (r, &z) in out.r_samples.iter_mut().zip(self.grid.values()) {
            let z = C64::new(z, 0.0);
            *r *= (z - xi.conj()) / (z - xi);
        }
        Ok(out)
    }
}

/// Field form of [`darboux_add`] starting from the Jost frame of `u`.
pub fn darboux_add_field(
    u: &SampledField,
    zeros: Vec<C64>,
    step: &DarbouxStep,
) -> Result<(SampledField, Arc<dyn Frame>)> {
    let frame: Arc<dyn Frame> = Arc::new(JostFrame::new(u, zeros));
    let out = apply_step(frame, step)?;
    let field = SampledField::new(u.grid, out.potential().to_vec())?;
    Ok((field, out))
}
