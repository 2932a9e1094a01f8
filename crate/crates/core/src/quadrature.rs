//! Composite trapezoid quadrature and the Cauchy operator on a real grid.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, Copy)]
pub struct CauchyOptions {
    /// Endpoint magnitude allowed relative to `max |f|`.
    pub tail_threshold: f64,
    /// Minimum distance of `z` from the real axis.
    pub axis_epsilon: f64,
}

impl Default for CauchyOptions {
    fn default() -> Self {
        Self { tail_threshold: 1e-8, axis_epsilon: 1e-12 }
    }
}

/// Trapezoid rule for samples `f` at strictly increasing abscissae `s`.
pub fn trapezoid(s: &[f64], f: &[C64]) -> C64 {
    s.windows(2).zip(f.windows(2)).map(|(w, v)| (v[0] + v[1]) * (0.5 * (w[1] - w[0]))).fold(ZERO, |a, b| a + b)
}

/// Trapezoid rule for real samples.
pub fn trapezoid_real(s: &[f64], f: &[f64]) -> f64 {
    s.windows(2).zip(f.windows(2)).map(|(w, v)| 0.5 * (v[0] + v[1]) * (w[1] - w[0])).sum()
}

pub fn check_tails(f: &[C64], threshold: f64) -> Result<()> {
    let peak = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(());
    }
    let edge = f[0].norm().max(f[f.len() - 1].norm());
    if edge > threshold * peak {
        return Err(Error::TailTooLarge { magnitude: edge, threshold: threshold * peak });
    }
    Ok(())
}

/// `(1 / 2 pi i) * integral f(s) / (s - z) ds`, treating `f` as zero off the grid.
pub fn cauchy_integral(f: &[C64], grid: &SpectralGrid, z: C64, opts: CauchyOptions) -> Result<C64> {
    if f.len() != grid.len() {
        return Err(Error::InvalidArgument("sample count does not match the spectral grid".into()));
    }
    if z.im.abs() < opts.axis_epsilon {
        return Err(Error::NonRealGrid(format!("{z}")));
    }
    check_tails(f, opts.tail_threshold)?;
    Ok(cauchy_unchecked(f, grid.values(), z))
}

pub(crate) fn cauchy_unchecked(f: &[C64], s: &[f64], z: C64) -> C64 {
    let g: Vec<C64> = f.iter().zip(s).map(|(v, &si)| v / (C64::new(si, 0.0) - z)).collect();
    trapezoid(s, &g) / C64::new(0.0, 2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentzian(grid: &SpectralGrid) -> Vec<C64> {
        grid.values().iter().map(|s| C64::new(1.0 / (s * s + 1.0), 0.0)).collect()
    }

    #[test]
    fn zero_integrand() {
        let g = SpectralGrid::uniform(10.0, 100).unwrap();
        let f = vec![ZERO; g.len()];
        let v = cauchy_integral(&f, &g, C64::new(0.3, 1.0), CauchyOptions::default()).unwrap();
        assert_eq!(v, ZERO);
    }

    #[test]
    fn matches_tenfold_refinement() {
        let coarse = SpectralGrid::uniform(2.0e4, 80_000).unwrap();
        let fine = SpectralGrid::uniform(2.0e4, 800_000).unwrap();
        let z = C64::new(0.0, 2.0);
        let a = cauchy_integral(&lorentzian(&coarse), &coarse, z, CauchyOptions::default()).unwrap();
        let b = cauchy_integral(&lorentzian(&fine), &fine, z, CauchyOptions::default()).unwrap();
        assert!((a - b).norm() <= 1e-8, "{a} vs {b}");
        // Residue value for the full line: -1 / (2i (z + i)) = 1/6 at z = 2i.
        let exact = C64::new(1.0 / 6.0, 0.0);
        assert!((a - exact).norm() < 1e-6);
    }

    #[test]
    fn reflected_evaluation_symmetry() {
        let g = SpectralGrid::uniform(30.0, 3000).unwrap();
        let f: Vec<C64> = g.values().iter().map(|s| C64::new((-s * s).exp(), 0.0)).collect();
        for &y in &[0.2, 1.0, 3.5] {
            let up = cauchy_integral(&f, &g, C64::new(0.0, y), CauchyOptions::default()).unwrap();
            let down = cauchy_integral(&f, &g, C64::new(0.0, -y), CauchyOptions::default()).unwrap();
            assert!((up.conj() + down).norm() < 1e-14);
            assert!(up.im.abs() < 1e-14);
        }
    }

    #[test]
    fn errors() {
        let g = SpectralGrid::uniform(5.0, 50).unwrap();
        let f = lorentzian(&g);
        assert!(matches!(
            cauchy_integral(&f, &g, C64::new(0.0, 1.0), CauchyOptions::default()),
            Err(Error::TailTooLarge { .. })
        ));
        let relaxed = CauchyOptions { tail_threshold: 1.0, ..Default::default() };
        assert!(matches!(cauchy_integral(&f, &g, C64::new(0.5, 0.0), relaxed), Err(Error::NonRealGrid(_))));
    }

    #[test]
    fn second_order_convergence_with_truncated_tails() {
        // Truncation at |s| = 5 leaves endpoint terms, which expose the h^2 rate.
        let opts = CauchyOptions { tail_threshold: 0.1, ..Default::default() };
        let z = C64::new(0.4, 1.5);
        let vals: Vec<C64> = [10usize, 20, 40, 80]
            .iter()
            .map(|&n| {
                let g = SpectralGrid::uniform(5.0, n).unwrap();
                cauchy_integral(&lorentzian(&g), &g, z, opts).unwrap()
            })
            .collect();
        for k in 0..2 {
            let r = (vals[k] - vals[k + 1]).norm() / (vals[k + 1] - vals[k + 2]).norm();
            assert!((3.0..=5.0).contains(&r), "ratio {r}");
        }
    }
}
