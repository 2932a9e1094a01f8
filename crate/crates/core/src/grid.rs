use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid on `[-half_width, half_width]`; an odd node count puts 0 on a node.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        // Computed from both ends so mirrored nodes agree bitwise on symmetric grids.
        let n = (self.n_points - 1) as f64;
        let i = i as f64;
        (self.x_min * (n - i) + self.x_max * i) / n
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the node sitting at x = 0, if there is one.
    pub fn zero_index(&self) -> Option<usize> {
        let h = self.spacing();
        let k = (-self.x_min / h).round();
        if k < 0.0 || k > (self.n_points - 1) as f64 {
            return None;
        }
        let k = k as usize;
        (self.x(k).abs() <= 1e-9 * h).then_some(k)
    }

    pub fn require_zero_node(&self) -> Result<usize> {
        self.zero_index().ok_or_else(|| Error::InvalidGrid("x = 0 must be a grid node".into()))
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.x_max.abs().max(1.0) && self.n_points % 2 == 1
    }
}

/// A complex function sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::InvalidGrid(format!("{} values for {} nodes", values.len(), grid.n_points)));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_points] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.grid.x(i)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &SampledField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest modulus at the two grid ends.
    pub fn edge_magnitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.len() - 1].norm())
    }

    /// Trapezoid rule for the integral of `|u|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.len();
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        h * (s - 0.5 * (self.values[0].norm_sqr() + self.values[n - 1].norm_sqr()))
    }

    /// The part of the field on `x >= 0` (0 must be a node).
    pub fn nonnegative_half(&self) -> Result<SampledField> {
        let k = self.grid.require_zero_node()?;
        let grid = SpatialGrid::new(0.0, self.grid.x_max, self.len() - k)?;
        Ok(SampledField { grid, values: self.values[k..].to_vec() })
    }

    /// The part of the field on `x <= 0` (0 must be a node).
    pub fn nonpositive_half(&self) -> Result<SampledField> {
        let k = self.grid.require_zero_node()?;
        let grid = SpatialGrid::new(self.grid.x_min, 0.0, k + 1)?;
        Ok(SampledField { grid, values: self.values[..=k].to_vec() })
    }

    /// `f(x) -> f(-x)`.
    pub fn reflected(&self) -> SampledField {
        let grid = SpatialGrid { x_min: -self.grid.x_max, x_max: -self.grid.x_min, n_points: self.grid.n_points };
        let mut values = self.values.clone();
        values.reverse();
        SampledField { grid, values }
    }

    /// Even extension of data given on `[0, L]` to `[-L, L]`.
    pub fn even_extension(&self) -> Result<SampledField> {
        if self.grid.x_min.abs() > 1e-12 {
            return Err(Error::InvalidGrid("even extension needs a grid starting at 0".into()));
        }
        let n = self.len();
        let grid = SpatialGrid::new(-self.grid.x_max, self.grid.x_max, 2 * n - 1)?;
        let mut values = Vec::with_capacity(2 * n - 1);
        values.extend(self.values[1..].iter().rev());
        values.extend(self.values.iter());
        Ok(SampledField { grid, values })
    }

    /// Largest `|u(x) - u(-x)|` on a symmetric grid.
    pub fn even_defect(&self) -> f64 {
        let n = self.len();
        (0..n / 2).map(|i| (self.values[i] - self.values[n - 1 - i]).norm()).fold(0.0, f64::max)
    }

    /// Cubic (4-point Lagrange) interpolation; linear near the ends.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        interpolate_uniform(&self.values, self.grid.x_min, self.grid.spacing(), x)
    }
}

pub(crate) fn interpolate_uniform(v: &[Complex64], x0: f64, h: f64, x: f64) -> Complex64 {
    let n = v.len();
    let s = (x - x0) / h;
    if s <= 0.0 {
        return v[0];
    }
    if s >= (n - 1) as f64 {
        return v[n - 1];
    }
    let i = s.floor() as usize;
    let f = s - i as f64;
    if i == 0 || i + 2 >= n {
        return v[i] * (1.0 - f) + v[(i + 1).min(n - 1)] * f;
    }
    let (a, b, c, d) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
    let w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    let w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    let w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
    a * w0 + b * w1 + c * w2 + d * w3
}

/// Real spectral grid, symmetric under `z -> -z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    z_values: Vec<f64>,
}

impl SpectralGrid {
    /// Uniform grid on `[-z_max, z_max]` with `2 * n_half + 1` points.
    pub fn uniform(z_max: f64, n_half: usize) -> Result<Self> {
        if !(z_max > 0.0) || n_half == 0 {
            return Err(Error::InvalidGrid("spectral grid needs z_max > 0 and n_half > 0".into()));
        }
        let pos: Vec<f64> = (1..=n_half).map(|k| z_max * k as f64 / n_half as f64).collect();
        let mut z: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
        z.push(0.0);
        z.extend(pos);
        Ok(Self { z_values: z })
    }

    pub fn from_values(z_values: Vec<f64>) -> Result<Self> {
        let n = z_values.len();
        if n < 3 {
            return Err(Error::InvalidGrid("spectral grid needs at least 3 points".into()));
        }
        if z_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("spectral grid must be strictly increasing".into()));
        }
        if (0..n).any(|i| z_values[i] != -z_values[n - 1 - i]) {
            return Err(Error::InvalidGrid("spectral grid must be symmetric about 0".into()));
        }
        Ok(Self { z_values })
    }

    pub fn values(&self) -> &[f64] {
        &self.z_values
    }

    pub fn len(&self) -> usize {
        self.z_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_values.is_empty()
    }

    /// Index of `-z` for the node at index `i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    pub fn zero_index(&self) -> Option<usize> {
        let n = self.len();
        (n % 2 == 1).then_some(n / 2)
    }

    pub fn z_max(&self) -> f64 {
        self.z_values[self.len() - 1]
    }

    /// Piecewise-linear interpolation of samples on this grid; zero outside.
    pub fn interpolate(&self, samples: &[Complex64], z: f64) -> Complex64 {
        let zs = &self.z_values;
        let n = zs.len();
        if z < zs[0] || z > zs[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let j = zs.partition_point(|&v| v <= z);
        if j == 0 {
            return samples[0];
        }
        if j >= n {
            return samples[n - 1];
        }
        let (z0, z1) = (zs[j - 1], zs[j]);
        let f = (z - z0) / (z1 - z0);
        samples[j - 1] * (1.0 - f) + samples[j] * f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_has_zero_node() {
        let g = SpatialGrid::symmetric(20.0, 2049).unwrap();
        let k = g.zero_index().unwrap();
        assert_eq!(k, 1024);
        assert_eq!(g.x(k), 0.0);
        assert_eq!(g.x(3), -g.x(2045));
    }

    #[test]
    fn even_grid_count_misses_zero() {
        let g = SpatialGrid::symmetric(1.0, 4).unwrap();
        assert!(g.zero_index().is_none());
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(SpatialGrid::new(1.0, 1.0, 10).is_err());
        assert!(SpatialGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn spectral_grid_is_exactly_symmetric() {
        let s = SpectralGrid::uniform(7.3, 1001).unwrap();
        let z = s.values();
        for i in 0..z.len() {
            assert_eq!(z[i], -z[s.mirror(i)]);
        }
        assert!(SpectralGrid::from_values(vec![-1.0, 0.0, 1.1]).is_err());
    }

    #[test]
    fn even_extension_round_trip() {
        let g = SpatialGrid::new(0.0, 3.0, 31).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new((-x * x).exp(), x));
        let e = f.even_extension().unwrap();
        assert_eq!(e.len(), 61);
        assert_eq!(e.nonnegative_half().unwrap().values, f.values);
        assert_eq!(e.values[0], f.values[30]);
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = SpatialGrid::new(-1.0, 2.0, 31).unwrap();
        let p = |x: f64| Complex64::new(x * x * x - 2.0 * x, 0.5 * x * x);
        let f = SampledField::from_fn(g, p);
        for &x in &[-0.33, 0.51, 1.234] {
            assert!((f.interpolate(x) - p(x)).norm() < 1e-12);
        }
    }
}
