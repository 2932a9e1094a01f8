//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bnls_core::asymptotics::{
    breathing_formula, ground_state, local_k_from_data, mu_perturbation, small_q_small_x, theorem_main_eval, w0, w1,
    AsymptoticOptions, SmallQParams,
};
use bnls_core::backlund::backlund_extend;
use bnls_core::darboux::{darboux_add, darboux_add_field, darboux_remove, DarbouxStep, Frame, FreeFrame};
use bnls_core::initial::{ground_state_field, perturbed_ground_state, Perturbation};
use bnls_core::inverse::Reconstructor;
use bnls_core::parabolic::{parabolic_cylinder, switch_consistency, CHECK_RAYS};
use bnls_core::pde_oracle::{conserved_quantities, discrete_energy, simulate, simulate_traced, SimConfig};
use bnls_core::spectral_data::{extension_scattering, ExtensionOptions, ExtensionSpectrum};
use bnls_core::zs_scattering::jost_solve;
use bnls_core::{Mat2, Result, SampledField, ScatteringData, SpatialGrid, SpectralGrid, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failed(e: bnls_core::Error) -> Outcome {
    outcome(false, format!("error: {e}"))
}

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn half_grid(l: f64, h: f64) -> SpatialGrid {
    SpatialGrid::new(0.0, l, (l / h).round() as usize + 1).unwrap()
}

fn symmetric_grid(l: f64, h: f64) -> SpatialGrid {
    SpatialGrid::symmetric(l, (2.0 * l / h).round() as usize + 1).unwrap()
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// Random perturbed ground state: `eps <= 0.05`, `|q|` in `{0.05, ..., 0.3}`.
#[derive(Debug, Clone, Copy)]
struct Case {
    q: f64,
    eps: f64,
    w: Perturbation,
}

fn random_cases(seed: u64, n: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mag = 0.05 * rng.gen_range(1..=6) as f64;
            let q = if rng.gen_bool(0.5) { mag } else { -mag };
            let eps = rng.gen_range(0.005..=0.05);
            let w = Perturbation { amplitude: 1.0, sigma: rng.gen_range(0.5..2.0), omega: rng.gen_range(0.0..2.0) };
            Case { q, eps, w }
        })
        .collect()
}

fn extension_of(case: &Case, spectral: &SpectralGrid) -> Result<(SampledField, ExtensionSpectrum)> {
    let u_plus = perturbed_ground_state(half_grid(25.0, 0.01), 1.0, case.q, case.eps, &case.w);
    let spec = extension_scattering(&u_plus, case.q, spectral, &ExtensionOptions::default())?;
    Ok((u_plus, spec))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let spectral = SpectralGrid::uniform(4.0, 160).unwrap();
    let mut worst_field: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    for q in [0.25, -0.25] {
        let u_plus = ground_state_field(SpatialGrid::new(0.0, 20.0, 1025).unwrap(), 1.0, q);
        let ext = match backlund_extend(&u_plus, q) {
            Ok(e) => e,
            Err(e) => return failed(e),
        };
        let c = q.atanh();
        worst_field = worst_field.max(max_of(
            ext.values.iter().enumerate().map(|(i, v)| (v - C64::new(1.0 / (ext.x(i) + c).cosh(), 0.0)).norm()),
        ));
        let spec = match extension_scattering(&u_plus, q, &spectral, &ExtensionOptions::default()) {
            Ok(s) => s,
            Err(e) => return failed(e),
        };
        let a_err = max_of(spectral.values().iter().zip(&spec.a_samples).map(|(&z, a)| {
            let z = C64::new(z, 0.0);
            (a - (z - I) / (z + I)).norm()
        }));
        worst_a = worst_a.max(a_err);
        worst_b = worst_b.max(max_of(spec.b_samples.iter().map(|b| b.norm())));
        let data = &spec.base;
        if data.zeros.len() != 1 {
            return outcome(false, format!("q = {q}: {} zeros", data.zeros.len()));
        }
        let gamma = ((1.0 + q) / (1.0 - q)).sqrt();
        worst_gamma = worst_gamma.max((data.zeros[0] - 1.0).abs()).max((data.norming_constants[0] - gamma).norm());
    }
    let elapsed = start.elapsed();
    let pass = worst_field < 1e-6
        && worst_a < 1e-5
        && worst_b < 1e-5
        && worst_gamma < 1e-5
        && elapsed < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "field {worst_field:.2e} (< 1e-6), a {worst_a:.2e}, b {worst_b:.2e}, zero/gamma {worst_gamma:.2e} (< 1e-5), {:.2}s (< 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let spectral = SpectralGrid::uniform(4.0, 200).unwrap();
    let zero = spectral.zero_index().unwrap();
    let (mut unit, mut sym, mut r0): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for case in random_cases(2, 10) {
        let spec = match extension_of(&case, &spectral) {
            Ok((_, s)) => s,
            Err(e) => return outcome(false, format!("{case:?}: {e}")),
        };
        unit = unit.max(spec.unitarity_defect());
        let d = spec.symmetry_deviations();
        sym = sym.max(d.a_sym).max(d.b_sym).max(d.gamma_sym);
        r0 = r0.max(spec.base.r_samples[zero].norm());
    }
    let elapsed = start.elapsed();
    let pass = unit < 1e-5 && sym < 1e-4 && r0 < 1e-5 && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "unitarity {unit:.2e} (< 1e-5), symmetries {sym:.2e} (< 1e-4), |r(0)| {r0:.2e} (< 1e-5), {:.1}s (< 120s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let spectral = SpectralGrid::uniform(4.0, 100).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    let (mut two, mut worst1, mut worst2): (usize, f64, f64) = (0, 0.0, 0.0);
    for case in random_cases(3, 20) {
        let (_, spec) = match extension_of(&case, &spectral) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("{case:?}: {e}")),
        };
        let zeros = &spec.base.zeros;
        let w = case.w.sample(half_grid(25.0, 0.01));
        let est = mu_perturbation(&w, 1.0, case.q, case.eps);
        let count_ok = if case.q > 0.0 { zeros.len() == 1 } else { zeros.len() == 1 || zeros.len() == 2 };
        let tol1 = 5.0 * (case.eps * case.eps + case.eps * case.q.abs()) + 1e-4;
        let d1 = zeros.first().map_or(f64::INFINITY, |m| (m - est.mu1_est).abs());
        worst1 = worst1.max(d1 / tol1);
        let mut ok = count_ok && d1 < tol1;
        if zeros.len() == 2 {
            two += 1;
            let tol2 = 5.0 * case.eps * case.eps * case.q.abs() + 1e-4;
            let d2 = (zeros[1] - est.mu2_est).abs();
            worst2 = worst2.max(d2 / tol2);
            ok &= d2 < tol2;
        }
        if !ok {
            lines.push(format!(
                "q = {}, eps = {:.3}: zeros {zeros:?}, mu1 estimate {:.6}",
                case.q, case.eps, est.mu1_est
            ));
        }
        pass &= ok;
    }
    outcome(
        pass,
        format!(
            "20 cases, {two} with two zeros; worst |mu1 - est|/tol {worst1:.2}, |mu2 + q|/tol {worst2:.2}{}",
            if lines.is_empty() { String::new() } else { format!("; {}", lines.join("; ")) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let points: Vec<f64> = (0..601).map(|k| -30.0 + 0.1 * k as f64).collect();
    let free: Arc<dyn Frame> = Arc::new(FreeFrame::new(points.clone()));
    let run = || -> Result<(f64, f64, f64)> {
        let added = darboux_add(free.clone(), I, C64::new(2.0, 0.0))?;
        let sech = max_of(added.potential().iter().zip(&points).map(|(u, &x)| (u - I / x.cosh()).norm()));
        let added: Arc<dyn Frame> = Arc::new(added);
        let removed = darboux_remove(added, I)?;
        let mut identity = max_of(removed.potential().iter().map(|u| u.norm()));
        for z in [C64::new(0.4, 0.7), C64::new(-1.0, 0.2)] {
            identity = identity.max(max_of(removed.m(z)?.iter().map(|m| (*m - Mat2::IDENTITY).max_abs())));
        }

        let grid = symmetric_grid(50.0, 0.02);
        let c = 0.25f64.atanh();
        let u = SampledField::from_fn(grid, |x| C64::new(1.0 / (x + c).cosh(), 0.0));
        let before = jost_solve(&u, I)?.norming_constant();
        let (dressed, _) = darboux_add_field(&u, vec![I], &DarbouxStep::add(C64::new(0.0, 0.5), C64::new(0.7, 0.2)))?;
        let after = jost_solve(&dressed, I)?.norming_constant();
        Ok((sech, identity, (after - before).norm()))
    };
    match run() {
        Ok((sech, identity, gamma)) => outcome(
            sech < 1e-8 && identity < 1e-8 && gamma < 1e-5,
            format!(
                "i sech {sech:.2e} (< 1e-8), add/remove {identity:.2e} (< 1e-8), gamma preserved {gamma:.2e} (< 1e-5)"
            ),
        ),
        Err(e) => failed(e),
    }
}

/// Worst stationarity error, mass drift, FD energy drift and scheme energy drift over `[0, 1]`.
fn soliton_run(dt: f64) -> Result<(f64, f64, f64, f64)> {
    let q = 0.25;
    let grid = symmetric_grid(20.0, 0.02);
    let u0 = ground_state_field(grid, 1.0, q);
    let cfg = SimConfig::new(grid, dt, 1.0, q)?;
    let times: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let snaps = simulate(&u0, &cfg, &times)?;
    let c0 = conserved_quantities(&u0, q)?;
    let e0 = discrete_energy(&u0, q)?;
    let (mut shape, mut mass, mut energy, mut scheme): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for s in &snaps {
        shape = shape.max(max_of(s.values.iter().zip(&u0.values).map(|(a, b)| (a.norm() - b.norm()).abs())));
        let c = conserved_quantities(s, q)?;
        mass = mass.max((c.mass - c0.mass).abs() / c0.mass);
        energy = energy.max((c.energy - c0.energy).abs());
        scheme = scheme.max((discrete_energy(s, q)? - e0).abs());
    }
    Ok((shape, mass, energy, scheme))
}

fn criterion_5() -> Outcome {
    let run = || -> Result<Outcome> {
        let (shape, mass, energy, scheme) = soliton_run(0.005)?;
        let (_, _, energy_half, scheme_half) = soliton_run(0.0025)?;
        let reduction = scheme / scheme_half;
        Ok(outcome(
            shape < 5e-4 && mass < 1e-6 && energy < 1e-5 && reduction >= 3.5,
            format!(
                "shape {shape:.2e} (< 5e-4), mass {mass:.2e} (< 1e-6), energy {energy:.2e} (< 1e-5), \
                 scheme-energy drift reduction {reduction:.2}x (>= 3.5; FD energy {:.2}x)",
                energy / energy_half
            ),
        ))
    };
    run().unwrap_or_else(failed)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (mu0, q, eps) = (1.0, -0.1, 0.03);
    let w = Perturbation::default();
    let run = || -> Result<Outcome> {
        let u_plus = perturbed_ground_state(half_grid(30.0, 0.01), mu0, q, eps, &w);
        let spec = extension_scattering(&u_plus, q, &SpectralGrid::uniform(12.0, 600)?, &ExtensionOptions::default())?;
        let rec = Reconstructor::new(&spec.base)?;

        let grid = symmetric_grid(600.0, 0.02);
        let u0 = perturbed_ground_state(grid, mu0, q, eps, &w);
        let times = [5.0, 10.0, 20.0];
        let cfg = SimConfig::new(grid, 0.005, 20.0, q)?;
        let snaps = simulate(&u0, &cfg, &times)?;
        let mut worst: f64 = 0.0;
        for (t, snap) in times.iter().zip(&snaps) {
            for x in [0.0, 1.0, 2.0] {
                let ist = rec.eval(x, *t)?;
                worst = worst.max((ist - snap.interpolate(x)).norm());
            }
        }
        let elapsed = start.elapsed();
        Ok(outcome(
            worst < 0.02 && elapsed < Duration::from_secs(600),
            format!(
                "{} zeros, max |u_ist - u_pde| {worst:.2e} (< 0.02), {:.1}s (< 600s)",
                spec.base.zeros.len(),
                elapsed.as_secs_f64()
            ),
        ))
    };
    run().unwrap_or_else(failed)
}

fn reflectionless(q: f64) -> ScatteringData {
    let gamma = C64::new(((1.0 + q) / (1.0 - q)).sqrt(), 0.0);
    ScatteringData::reflectionless(SpectralGrid::uniform(8.0, 100).unwrap(), vec![1.0], vec![gamma], -q, q)
}

fn criterion_7() -> Outcome {
    let opts = AsymptoticOptions::default();
    let run = || -> Result<Outcome> {
        // (a) exact soliton from the reflectionless formulas
        let mut exact: f64 = 0.0;
        for q in [0.25, 0.1] {
            let d = reflectionless(q);
            for i in 0..100 {
                let x = -10.0 + 20.0 * i as f64 / 99.0;
                for j in 0..20 {
                    let t = 1.0 + 99.0 * j as f64 / 19.0;
                    let v = theorem_main_eval(&d, &[0.0], x, t, &opts)?;
                    let u = C64::from_polar(ground_state(1.0, q, x), t / 2.0);
                    exact = exact.max((v.small_x - u).norm()).max((v.large_x - u).norm()).max((v.u_leading - u).norm());
                }
            }
        }

        // (b), (c) on data of an actual extension
        let q = 0.25;
        let case = Case { q, eps: 0.03, w: Perturbation::default() };
        let (_, spec) = extension_of(&case, &SpectralGrid::uniform(12.0, 600)?)?;
        let data = &spec.base;
        let rho = bnls_core::asymptotics::extract_rho(data);
        let mut k_err: f64 = 0.0;
        for i in 0..50 {
            for t in [1.0, 3.0, 10.0, 100.0] {
                let lk = local_k_from_data(data, -20.0 + 0.8 * i as f64, t);
                k_err = k_err.max((lk.k1.norm_sqr() - lk.nu).abs());
            }
        }
        let t = 1.0e3;
        let scale = data.max_reflection() / q.abs().sqrt() / t;
        let mut overlap: f64 = 0.0;
        for x in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let v = theorem_main_eval(data, &rho, x, t, &opts)?;
            overlap = overlap.max((v.small_x - v.large_x).norm() / scale);
        }

        // (d) intermediate-time formula against the ground-state stability result
        let q = 0.05;
        let wf = Perturbation::default().sample(half_grid(12.0, 0.005));
        let p = SmallQParams { mu0: 1.0, w0: w0(&wf), w1: w1(&wf, 1.0, q), mu1: None, q };
        let mut breathing: f64 = 0.0;
        for t in [10.0, 50.0] {
            let a = small_q_small_x(&p, 0.0, t);
            let b = breathing_formula(p.mu1(), q * p.w0, t);
            breathing = breathing.max((a - b).norm() / b.norm() / (3.0 * q * q * t));
        }

        // (e) dispersive tail at the origin from the direct solver
        let q = 0.1;
        let grid = symmetric_grid(1200.0, 0.025);
        let u0 = perturbed_ground_state(grid, 1.0, q, q, &Perturbation::default());
        let cfg = SimConfig::new(grid, 0.0125, 85.0, q)?;
        let sim = simulate_traced(&u0, &cfg, &[85.0])?;
        let mu1 = 1.0 + q * w1(&wf, 1.0, q);
        let period = 4.0 * PI / (mu1 * mu1);
        let mut ratio_lo = f64::INFINITY;
        let mut ratio_hi: f64 = 0.0;
        let mut tc = 20.0;
        while tc <= 80.0 {
            let window = sim.origin.iter().filter(|(s, _)| (s - tc).abs() <= period / 2.0).map(|(_, v)| v.norm());
            let (lo, hi) = window.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let measured = 0.5 * (hi - lo);
            let predicted = (q * p.w0).abs() * (2.0 / (PI * tc)).sqrt();
            ratio_lo = ratio_lo.min(measured / predicted);
            ratio_hi = ratio_hi.max(measured / predicted);
            tc += 5.0;
        }

        let pass =
            exact < 1e-12 && k_err < 1e-12 && overlap < 1.0 && breathing < 1.0 && ratio_lo >= 0.5 && ratio_hi <= 2.0;
        Ok(outcome(
            pass,
            format!(
                "(a) {exact:.2e} (< 1e-12), (b) {k_err:.2e} (< 1e-12), (c) gap/scale {overlap:.2e} (< 1), \
                 (d) diff/(3q^2 t) {breathing:.2e} (< 1), (e) tail ratio in [{ratio_lo:.2}, {ratio_hi:.2}] (within [0.5, 2])"
            ),
        ))
    };
    run().unwrap_or_else(failed)
}

fn criterion_8() -> Outcome {
    let run = || -> Result<Outcome> {
        let mut rays: f64 = 0.0;
        for a in [C64::new(0.0, 0.3), C64::new(0.0, -0.15), C64::new(0.4, 0.2), C64::new(-1.0, 0.5), C64::new(2.0, 0.0)]
        {
            for arg in CHECK_RAYS {
                rays = rays.max(switch_consistency(a, arg));
            }
        }
        let mut closed: f64 = 0.0;
        for eta in
            [C64::new(1.0, 0.0), C64::new(0.3, -2.0), C64::new(5.0, 1.0), C64::new(-7.0, 3.0), C64::new(12.0, 0.0)]
        {
            let d = parabolic_cylinder(C64::new(0.0, 0.0), eta)?;
            closed = closed.max((d - (-eta * eta / 4.0).exp()).norm() / d.norm().max(1.0));
        }
        let mut rec: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
            let eta = C64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(-0.7..0.7));
            let d = |b: C64| parabolic_cylinder(b, eta);
            let scale = d(a)?.norm().max(1e-300) * (1.0 + eta.norm());
            rec = rec.max((d(a + 1.0)? - eta * d(a)? + a * d(a - 1.0)?).norm() / scale);
        }
        Ok(outcome(
            rays < 1e-6 && closed < 1e-12 && rec < 1e-9,
            format!("rays {rays:.2e} (< 1e-6), D_0 closed form {closed:.2e} (< 1e-12), recurrence {rec:.2e} (< 1e-9)"),
        ))
    };
    run().unwrap_or_else(failed)
}

#[test]
fn acceptance_suite() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("soliton round trip", criterion_1),
        ("unitarity and symmetry", criterion_2),
        ("zero dichotomy", criterion_3),
        ("Darboux algebra", criterion_4),
        ("PDE oracle stationarity and conservation", criterion_5),
        ("IST vs PDE", criterion_6),
        ("asymptotic formulas", criterion_7),
        ("parabolic cylinder", criterion_8),
    ];
    let results: Vec<Outcome> = criteria
        .iter()
        .map(|(_, f)| std::panic::catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked".into())))
        .collect();
    let mut all = true;
    for (k, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        println!("criterion {} ({name}): {} : {}", k + 1, if r.pass { "PASS" } else { "FAIL" }, r.detail);
        all &= r.pass;
    }
    assert!(all, "acceptance criteria failed");
}
