//! Scattering data of the Bäcklund extension in closed form from half-line
//! Jost values `g(0, z) = (A(z), B(z))`, and their time evolution.

use rayon::prelude::*;
use serde::Serialize;

use crate::backlund::backlund_transform;
use crate::data::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::{SampledField, SpectralGrid};
use crate::linalg::{Vec2, C64, I};
use crate::zs_scattering::{find_imaginary_zeros, JostOptions, Potential, ZeroScan, ZeroScanOptions};

/// `|B(iq)|` (q > 0) or `|A(-iq)|` (q < 0) below this is reported as a near-degenerate `beta`.
pub const BETA_DEGENERACY: f64 = 1e-5;
const BRANCH_THRESHOLD: f64 = 1e-8;
const NORMING_FLOOR: f64 = 1e-6;

/// Evaluates `g(0, z)` and the closed-form scattering functions of the extension.
#[derive(Debug, Clone)]
pub struct ExtensionEvaluator {
    potential: Potential,
    opts: JostOptions,
    pub q: f64,
    pub beta: f64,
}

impl ExtensionEvaluator {
    pub fn g(&self, z: C64) -> Result<Vec2> {
        self.potential.half_line_values(z, &self.opts)
    }

    /// `a(z)` for `Im z >= 0`.
    pub fn a(&self, z: C64) -> Result<C64> {
        let ab = self.g(z)?;
        let mirror = -z.conj();
        let ab_m = if mirror == z { ab } else { self.g(mirror)? };
        Ok(closed_form_a(z, ab, ab_m, self.q, self.beta))
    }
}

/// `a(z)` from `(A, B)` at `z` and at `-conj(z)`, using the singularity-free
/// rearrangement when `beta = |q|`.
pub fn closed_form_a(z: C64, ab: Vec2, ab_mirror: Vec2, q: f64, beta: f64) -> C64 {
    let aa = ab[0] * ab_mirror[0].conj();
    let bb = ab[1] * ab_mirror[1].conj();
    let iq = I * q;
    if q == 0.0 {
        aa - bb
    } else if beta == q.abs() && q > 0.0 {
        aa - (z + iq) / (z - iq) * bb
    } else if beta == q.abs() {
        (z - iq) / (z + iq) * aa - bb
    } else {
        ((z - iq) * aa - (z + iq) * bb) / (z - I * beta)
    }
}

/// `b(z)` for real `z` from `(A, B)` at `z` and `-z`.
pub fn closed_form_b(z: f64, ab: Vec2, ab_mirror: Vec2, q: f64, beta: f64) -> C64 {
    let z = C64::new(z, 0.0);
    let iq = I * q;
    ((z + iq) * ab_mirror[0] * ab[1] + (z - iq) * ab[0] * ab_mirror[1]) / (z + I * beta)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaBranch {
    pub beta: f64,
    /// The deciding value, `|B(iq)|` or `|A(-iq)|`.
    pub discriminant: f64,
    pub near_degenerate: bool,
    /// Set when a near-degenerate branch was decided by the growth of the Bäcklund
    /// eigenvector instead of the discriminant.
    pub resolved_by_tail: bool,
}

/// Tail sign of the extension from `g(0, i|q|)`.
pub fn beta_branch(g_iq: Vec2, q: f64) -> BetaBranch {
    if q == 0.0 {
        return BetaBranch { beta: 0.0, discriminant: 0.0, near_degenerate: false, resolved_by_tail: false };
    }
    let (discriminant, vanishing, otherwise) = if q > 0.0 { (g_iq[1].norm(), q, -q) } else { (g_iq[0].norm(), -q, q) };
    let beta = if discriminant == 0.0 { vanishing } else { otherwise };
    let near_degenerate = discriminant < BETA_DEGENERACY;
    if near_degenerate {
        log::warn!("beta branch near-degenerate: discriminant {discriminant:.3e}; alternative beta = {}", -beta);
    }
    BetaBranch { beta, discriminant, near_degenerate, resolved_by_tail: false }
}

/// Norming constant at `i mu` from `g(0, i mu) = (A, B)`.
pub fn norming_constant(mu: f64, ab: Vec2, q: f64, beta: f64) -> Result<C64> {
    let z = I * mu;
    let (a, b) = (ab[0], ab[1]);
    let first =
        (a.norm() > BRANCH_THRESHOLD && b.norm() > NORMING_FLOOR).then(|| (z - I * beta) / (z + I * q) * a / b.conj());
    // on the imaginary axis A(-conj z) = A(z), so this branch needs A away from 0 as well
    let second =
        (a.norm() > NORMING_FLOOR && b.norm() > BRANCH_THRESHOLD).then(|| (z - I * beta) / (z - I * q) * b / a.conj());
    match (first, second) {
        (Some(g1), Some(g2)) if (g1 - g2).norm() <= 1e-6 * g1.norm().max(1.0) => Ok(0.5 * (g1 + g2)),
        (Some(g1), _) => Ok(g1),
        (None, Some(g2)) => Ok(g2),
        (None, None) => Err(Error::InstableNorming(mu)),
    }
}

#[derive(Debug, Clone)]
pub struct ExtensionSpectrum {
    pub base: ScatteringData,
    pub upper_samples: Vec<C64>,
    pub lower_samples: Vec<C64>,
    pub a_samples: Vec<C64>,
    pub b_samples: Vec<C64>,
    /// `a'(i mu_k)` from the closed form.
    pub a_prime: Vec<C64>,
    pub zero_scan: ZeroScan,
    pub beta_branch: BetaBranch,
    pub evaluator: ExtensionEvaluator,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtensionOptions {
    pub jost: JostOptions,
    pub zeros: ZeroScanOptions,
    /// Upper end of the imaginary-axis scan; chosen from the data when `None`.
    pub mu_max: Option<f64>,
}

/// Scattering data of the Bäcklund extension of `u_plus` (given on `[0, L]`).
pub fn extension_scattering(
    u_plus: &SampledField,
    q: f64,
    grid: &SpectralGrid,
    opts: &ExtensionOptions,
) -> Result<ExtensionSpectrum> {
    let g = u_plus.grid;
    if g.x_min != 0.0 {
        return Err(Error::InvalidGrid("half-line data must start at x = 0".into()));
    }
    let potential = Potential::new(u_plus);
    let mut evaluator = ExtensionEvaluator { potential, opts: opts.jost, q, beta: 0.0 };
    let mut branch = beta_branch(evaluator.g(C64::new(0.0, q.abs()))?, q);
    if branch.near_degenerate {
        let (_, trace) = backlund_transform(u_plus, q)?;
        let tail = trace.beta_plus;
        if (tail.abs() - q.abs()).abs() > 1e-3 * q.abs() {
            return Err(Error::BranchAmbiguous(branch.discriminant));
        }
        branch.beta = q.abs().copysign(tail);
        branch.resolved_by_tail = true;
    }
    evaluator.beta = branch.beta;
    let beta = branch.beta;

    let z = grid.values();
    let ab: Vec<Vec2> = z.par_iter().map(|&s| evaluator.g(C64::new(s, 0.0))).collect::<Result<_>>()?;
    let n = z.len();
    let mut a_samples = Vec::with_capacity(n);
    let mut b_samples = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for k in 0..n {
        let m = grid.mirror(k);
        let a = closed_form_a(C64::new(z[k], 0.0), ab[k], ab[m], q, beta);
        let b = closed_form_b(z[k], ab[k], ab[m], q, beta);
        if a.norm() < opts.jost.a_min {
            return Err(Error::RealAxisZero(z[k]));
        }
        a_samples.push(a);
        b_samples.push(b);
        r.push(b.conj() / a.conj());
    }

    let mass: f64 = u_plus.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.spacing();
    let mu_max = opts.mu_max.unwrap_or(2.0 * mass + q.abs() + 1.0);
    let mut zopts = opts.zeros;
    zopts.contour_max = zopts.contour_max.min(0.9 * opts.jost.stiffness_cap / g.x_max);
    let eval = &evaluator;
    let a_fn = move |z: C64| eval.a(z).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let zero_scan = find_imaginary_zeros(a_fn, mu_max, q, &zopts)?;

    let mut zeros = Vec::new();
    let mut gammas = Vec::new();
    let mut a_prime = Vec::new();
    for zk in &zero_scan.zeros {
        let ab = evaluator.g(I * zk.mu)?;
        zeros.push(zk.mu);
        gammas.push(norming_constant(zk.mu, ab, q, beta)?);
        a_prime.push(zk.a_prime);
    }
    let base = ScatteringData { spectral_grid: grid.clone(), r_samples: r, zeros, norming_constants: gammas, beta, q };
    Ok(ExtensionSpectrum {
        base,
        upper_samples: ab.iter().map(|v| v[0]).collect(),
        lower_samples: ab.iter().map(|v| v[1]).collect(),
        a_samples,
        b_samples,
        a_prime,
        zero_scan,
        beta_branch: branch,
        evaluator,
    })
}

/// `r(z) e^{-i z^2 t / 2}` and `gamma_k e^{-i mu_k^2 t / 2}`.
pub fn evolve_data(data: &ScatteringData, t: f64) -> ScatteringData {
    let mut out = data.clone();
    for (r, &z) in out.r_samples.iter_mut().zip(data.spectral_grid.values()) {
        *r *= C64::from_polar(1.0, -0.5 * z * z * t);
    }
    for (g, &mu) in out.norming_constants.iter_mut().zip(&data.zeros) {
        *g *= C64::from_polar(1.0, -0.5 * mu * mu * t);
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryDeviations {
    pub a_sym: f64,
    pub b_sym: f64,
    pub gamma_sym: f64,
}

/// Deviations from the symmetries of q-symmetric scattering data, with `a` rebuilt
/// from `(r, zeros)`.
pub fn symmetry_report(data: &ScatteringData) -> SymmetryDeviations {
    let z = data.spectral_grid.values();
    let a: Vec<C64> = (0..z.len()).into_par_iter().map(|k| data.a_at_node(k)).collect();
    let b: Vec<C64> = a.iter().zip(&data.r_samples).map(|(a, r)| a * r.conj()).collect();
    symmetry_deviations(data, &a, &b)
}

impl ExtensionSpectrum {
    /// Same identities checked on the closed-form samples of `a` and `b`.
    pub fn symmetry_deviations(&self) -> SymmetryDeviations {
        symmetry_deviations(&self.base, &self.a_samples, &self.b_samples)
    }

    /// `max | |a|^2 + |b|^2 - 1 |` on the real grid.
    pub fn unitarity_defect(&self) -> f64 {
        self.a_samples
            .iter()
            .zip(&self.b_samples)
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn symmetry_deviations(data: &ScatteringData, a: &[C64], b: &[C64]) -> SymmetryDeviations {
    let grid = &data.spectral_grid;
    let z = grid.values();
    let ib = I * data.beta;
    let mut a_sym: f64 = 0.0;
    let mut b_sym: f64 = 0.0;
    for k in 0..z.len() {
        let m = grid.mirror(k);
        a_sym = a_sym.max((a[m].conj() - a[k]).norm());
        let zk = C64::new(z[k], 0.0);
        if (zk - ib).norm() > 0.0 {
            b_sym = b_sym.max((b[m] - b[k] * (zk + ib) / (zk - ib)).norm());
        }
    }
    let gamma_sym = data
        .zeros
        .iter()
        .zip(&data.norming_constants)
        .map(|(&mu, g)| (g.norm_sqr() - (mu - data.beta) / (mu + data.beta)).abs())
        .fold(0.0, f64::max);
    SymmetryDeviations { a_sym, b_sym, gamma_sym }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use crate::linalg::{ONE, ZERO};

    fn v_half(lambda: f64, q: f64, l: f64, n: usize) -> SampledField {
        let c = (q / lambda).atanh();
        SampledField::from_fn(SpatialGrid::new(0.0, l, n).unwrap(), |x| C64::new(lambda / (lambda * x + c).cosh(), 0.0))
    }

    #[test]
    fn soliton_data() {
        let q = 0.25;
        let u = v_half(1.0, q, 20.0, 2049);
        let grid = SpectralGrid::uniform(8.0, 64).unwrap();
        let s = extension_scattering(&u, q, &grid, &ExtensionOptions::default()).unwrap();
        assert_eq!(s.base.beta, -0.25);
        assert_eq!(s.base.zeros.len(), 1);
        assert!((s.base.zeros[0] - 1.0).abs() < 1e-6);
        assert!((s.base.norming_constants[0] - C64::new(1.290_994_45, 0.0)).norm() < 1e-6);
        assert!(s.b_samples.iter().all(|b| b.norm() < 1e-6));
        for (k, &z) in grid.values().iter().enumerate() {
            let z = C64::new(z, 0.0);
            assert!((s.a_samples[k] - (z - I) / (z + I)).norm() < 1e-6);
            let (a, b) = (s.upper_samples[k], s.lower_samples[k]);
            assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-8);
        }
        assert!((s.a_prime[0] - C64::new(0.0, -0.5)).norm() < 1e-5);
        let a_iq = s.evaluator.a(C64::new(0.0, q)).unwrap();
        assert!(a_iq.norm() > 1e-8);
    }

    #[test]
    fn free_data() {
        let u = SampledField::zeros(SpatialGrid::new(0.0, 10.0, 501).unwrap());
        let grid = SpectralGrid::uniform(4.0, 16).unwrap();
        for q in [-0.3, 0.3] {
            let s = extension_scattering(&u, q, &grid, &ExtensionOptions::default()).unwrap();
            assert_eq!(s.base.beta, q);
            assert_eq!(s.beta_branch.near_degenerate, q > 0.0);
            assert!(s.base.zeros.is_empty());
            assert!(s.a_samples.iter().all(|a| (a - ONE).norm() < 1e-14));
            assert!(s.base.r_samples.iter().all(|r| *r == ZERO));
        }
    }

    #[test]
    fn beta_and_norming_branches() {
        assert_eq!(beta_branch([ONE, ZERO], 0.5).beta, 0.5);
        assert_eq!(beta_branch([ONE, C64::new(0.1, 0.0)], 0.5).beta, -0.5);
        assert_eq!(beta_branch([ZERO, ONE], -0.5).beta, 0.5);
        assert_eq!(beta_branch([C64::new(0.2, 0.0), ONE], -0.5).beta, -0.5);
        assert!(matches!(
            norming_constant(1.0, [ZERO, C64::new(1e-9, 0.0)], 0.2, -0.2),
            Err(Error::InstableNorming(_))
        ));
        // at a zero (mu - q)|A|^2 = (mu + q)|B|^2 and both branches agree
        let a = C64::from_polar(1.5f64.sqrt(), 0.3);
        let g = norming_constant(1.0, [a, C64::from_polar(1.0, 0.1)], 0.2, -0.2).unwrap();
        assert!((g - C64::from_polar(1.5f64.sqrt(), 0.4)).norm() < 1e-14);
    }

    #[test]
    fn evolution_phases() {
        let grid = SpectralGrid::from_values(vec![-2.0, 0.0, 2.0]).unwrap();
        let mut d = ScatteringData::reflectionless(grid, vec![1.0], vec![C64::new(1.3, 0.0)], -0.25, 0.25);
        d.r_samples = vec![ONE; 3];
        assert_eq!(evolve_data(&d, 0.0), d);
        let e = evolve_data(&d, std::f64::consts::PI / 4.0);
        assert!((e.r_samples[2] + I).norm() < 1e-15);
        assert_eq!(e.r_samples[2].norm(), 1.0);
        let e = evolve_data(&d, 2.0 * std::f64::consts::PI);
        assert!((e.norming_constants[0] + 1.3).norm() < 1e-14);
    }

    #[test]
    fn symmetry_of_soliton_data() {
        let grid = SpectralGrid::uniform(10.0, 50).unwrap();
        let gamma = C64::new((1.25f64 / 0.75).sqrt(), 0.0);
        let d = ScatteringData::reflectionless(grid.clone(), vec![1.0], vec![gamma], -0.25, 0.25);
        let s = symmetry_report(&d);
        assert!(s.a_sym < 1e-12 && s.b_sym == 0.0 && s.gamma_sym < 1e-12);
        let mut c = d.clone();
        c.norming_constants[0] *= 1.1;
        let s = symmetry_report(&c);
        assert!((s.gamma_sym - 0.21 * 1.25 / 0.75).abs() < 1e-12);
        let v = ScatteringData::reflectionless(grid, vec![], vec![], -0.25, 0.25);
        let s = symmetry_report(&v);
        assert_eq!((s.a_sym, s.b_sym, s.gamma_sym), (0.0, 0.0, 0.0));
    }
}
