use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bnls_core::asymptotics::{extract_rho, ground_state, theorem_main_eval, AsymptoticOptions, AsymptoticValue};
use bnls_core::backlund::backlund_extend;
use bnls_core::initial::perturbed_ground_state;
use bnls_core::inverse::{solve_ivp, IvpOptions, Reconstructor};
use bnls_core::io::{load_field, load_scattering, save_field, save_scattering};
use bnls_core::pde_oracle::{conserved_quantities, simulate_traced, SimConfig};
use bnls_core::spectral_data::{evolve_data, extension_scattering, ExtensionOptions, ExtensionSpectrum};
use bnls_core::{SampledField, ScatteringData, SpatialGrid, SpectralGrid, C64};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Initial, RunConfig};
use crate::CliError;

type Outcome = Result<(), CliError>;

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(out: &Path, name: &str, text: &str) -> Outcome {
    fs::write(out.join(name), text).map_err(|e| CliError::Output(format!("{name}: {e}")))
}

fn write_json(out: &Path, name: &str, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    write(out, name, &text)
}

fn field_at(cfg: &RunConfig, grid: SpatialGrid) -> SampledField {
    match cfg.initial {
        Initial::GroundState => perturbed_ground_state(grid, cfg.mu0, cfg.q, cfg.eps, &cfg.perturbation()),
        Initial::Sech { amplitude } => SampledField::from_fn(grid, |x| C64::new(amplitude / x.cosh(), 0.0)),
    }
}

/// Half-line initial data, from `input` or the configured family.
fn half_line(cfg: &RunConfig) -> Result<SampledField, CliError> {
    if let Some(path) = &cfg.input {
        let u = load_field(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return if u.grid.x_min == 0.0 { Ok(u) } else { Ok(u.nonnegative_half()?) };
    }
    let grid = SpatialGrid::new(0.0, cfg.half_width, cfg.nodes(cfg.half_width))?;
    Ok(field_at(cfg, grid))
}

/// Even initial data on `[-L, L]`.
fn full_line(cfg: &RunConfig, half_width: f64) -> Result<SampledField, CliError> {
    if let Some(path) = &cfg.input {
        return load_field(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let grid = SpatialGrid::symmetric(half_width, 2 * cfg.nodes(half_width) - 1)?;
    Ok(field_at(cfg, grid))
}

fn spectral_grid(cfg: &RunConfig) -> Result<SpectralGrid, CliError> {
    Ok(SpectralGrid::uniform(cfg.spectral.z_max, cfg.spectral.n_half)?)
}

fn spectrum(cfg: &RunConfig) -> Result<ExtensionSpectrum, CliError> {
    let u = half_line(cfg)?;
    let grid = spectral_grid(cfg)?;
    let spec = extension_scattering(&u, cfg.q, &grid, &ExtensionOptions::default())?;
    info!("extension spectrum: zeros {:?}, beta {}", spec.base.zeros, spec.base.beta);
    Ok(spec)
}

/// Time-zero scattering data, from `input` or computed from the initial data.
fn scattering(cfg: &RunConfig) -> Result<ScatteringData, CliError> {
    match &cfg.input {
        Some(path) => load_scattering(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => Ok(spectrum(cfg)?.base),
    }
}

#[derive(Serialize)]
struct ScatterSummary {
    q: f64,
    beta: f64,
    zeros: Vec<f64>,
    norming_constants: Vec<[f64; 2]>,
    beta_near_degenerate: bool,
    beta_resolved_by_tail: bool,
    winding: i64,
    unitarity_defect: f64,
    a_sym: f64,
    b_sym: f64,
    gamma_sym: f64,
    max_reflection: f64,
}

fn lattice_csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn field_rows(fields: &[(f64, SampledField)]) -> String {
    lattice_csv(
        "x,t,re_u,im_u",
        fields.iter().flat_map(|(t, f)| {
            (0..f.len())
                .map(move |i| format!("{},{},{},{}", num(f.x(i)), num(*t), num(f.values[i].re), num(f.values[i].im)))
        }),
    )
}

fn asymptotic_lattice(data: &ScatteringData, cfg: &RunConfig) -> Result<Vec<(f64, f64, AsymptoticValue)>, CliError> {
    let rho = extract_rho(data);
    let opts = AsymptoticOptions::default();
    let jobs: Vec<(f64, f64)> = cfg.times.iter().flat_map(|&t| cfg.points.iter().map(move |&x| (x, t))).collect();
    let values = jobs
        .par_iter()
        .map(|&(x, t)| theorem_main_eval(data, &rho, x, t, &opts).map(|v| (x, t, v)))
        .collect::<bnls_core::Result<Vec<_>>>()?;
    Ok(values)
}

fn ist_lattice(data: &ScatteringData, cfg: &RunConfig) -> Result<Vec<Vec<C64>>, CliError> {
    let rec = Reconstructor::new(data)?;
    let mut out = Vec::with_capacity(cfg.times.len());
    for &t in &cfg.times {
        let r = rec.eval_many(&cfg.points, t)?;
        if r.regime_warning {
            log::warn!("reconstruction at t = {t} is outside the small-reflection regime");
        }
        out.push(r.u);
    }
    Ok(out)
}

fn simulation(cfg: &RunConfig) -> Result<(SampledField, bnls_core::pde_oracle::Simulation), CliError> {
    let l = cfg.pde_half_width.unwrap_or(cfg.half_width);
    let u0 = full_line(cfg, l)?;
    let t_end = cfg.times.last().copied().unwrap_or(0.0);
    let mut sim_cfg = SimConfig::new(u0.grid, cfg.dt, t_end, cfg.q)?;
    if let Some(v) = cfg.tail_threshold {
        sim_cfg.tail_threshold = v;
    }
    if let Some(v) = cfg.blowup_factor {
        sim_cfg.blowup_factor = v;
    }
    let sim = simulate_traced(&u0, &sim_cfg, &cfg.times)?;
    Ok((u0, sim))
}

pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Outcome {
    match command {
        Command::Extend => {
            let ext = backlund_extend(&half_line(cfg)?, cfg.q)?;
            save_field(&ext, out.join("extension.csv"))?;
        }
        Command::Scatter => {
            let spec = spectrum(cfg)?;
            let dev = spec.symmetry_deviations();
            let d = &spec.base;
            save_scattering(d, out.join("scattering.json"))?;
            write_json(
                out,
                "summary.json",
                &ScatterSummary {
                    q: d.q,
                    beta: d.beta,
                    zeros: d.zeros.clone(),
                    norming_constants: d.norming_constants.iter().map(|g| [g.re, g.im]).collect(),
                    beta_near_degenerate: spec.beta_branch.near_degenerate,
                    beta_resolved_by_tail: spec.beta_branch.resolved_by_tail,
                    winding: spec.zero_scan.winding,
                    unitarity_defect: spec.unitarity_defect(),
                    a_sym: dev.a_sym,
                    b_sym: dev.b_sym,
                    gamma_sym: dev.gamma_sym,
                    max_reflection: d.max_reflection(),
                },
            )?;
        }
        Command::Evolve => {
            let data = scattering(cfg)?;
            for (k, &t) in cfg.times.iter().enumerate() {
                save_scattering(&evolve_data(&data, t), out.join(format!("scattering_t{k}.json")))?;
            }
            write_json(out, "times.json", &cfg.times)?;
        }
        Command::Reconstruct => {
            let data = scattering(cfg)?;
            let u = ist_lattice(&data, cfg)?;
            let rows = cfg.times.iter().zip(&u).flat_map(|(&t, row)| {
                cfg.points
                    .iter()
                    .zip(row)
                    .map(move |(&x, v)| format!("{},{},{},{}", num(x), num(t), num(v.re), num(v.im)))
            });
            write(out, "reconstruct.csv", &lattice_csv("x,t,re_u,im_u", rows))?;
        }
        Command::Solve => {
            let u0 = full_line(cfg, cfg.half_width)?;
            let opts = IvpOptions { spectral_grid: spectral_grid(cfg)?, ..IvpOptions::default() };
            let sols = solve_ivp(&u0, cfg.q, &cfg.times, &opts)?;
            let fields: Vec<(f64, SampledField)> = cfg.times.iter().copied().zip(sols).collect();
            write(out, "solve.csv", &field_rows(&fields))?;
        }
        Command::Asymptote => {
            let data = scattering(cfg)?;
            let values = asymptotic_lattice(&data, cfg)?;
            let rows = values.iter().map(|(x, t, v)| {
                format!(
                    "{},{},{},{},{},{}",
                    num(*x),
                    num(*t),
                    num(v.u_leading.re),
                    num(v.u_leading.im),
                    num(v.error_scale),
                    v.region.as_str()
                )
            });
            write(out, "asymptote.csv", &lattice_csv("x,t,re_u,im_u,error_scale,regime", rows))?;
        }
        Command::Simulate => {
            let (_, sim) = simulation(cfg)?;
            let fields: Vec<(f64, SampledField)> =
                sim.times.iter().copied().zip(sim.snapshots.iter().cloned()).collect();
            write(out, "simulate.csv", &field_rows(&fields))?;
            let mut log = String::from("t,mass,energy\n");
            for (t, s) in &fields {
                let c = conserved_quantities(s, cfg.q)?;
                writeln!(log, "{},{},{}", num(*t), num(c.mass), num(c.energy)).expect("string write");
            }
            write(out, "conserved.csv", &log)?;
        }
        Command::Compare => compare(cfg, out)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareSummary {
    sup_ist_asym: f64,
    sup_ist_pde: f64,
    sup_asym_pde: f64,
    /// Largest deviation of the initial field from the stationary profile.
    stationary_defect: f64,
}

fn compare(cfg: &RunConfig, out: &Path) -> Outcome {
    let spec = spectrum(cfg)?;
    let data = &spec.base;
    let ist = ist_lattice(data, cfg)?;
    let asym = asymptotic_lattice(data, cfg)?;
    let (u0, sim) = simulation(cfg)?;
    let mut rows = Vec::new();
    let mut summary = CompareSummary { sup_ist_asym: 0.0, sup_ist_pde: 0.0, sup_asym_pde: 0.0, stationary_defect: 0.0 };
    if cfg.initial == Initial::GroundState {
        summary.stationary_defect = (0..u0.len())
            .map(|i| (u0.values[i] - C64::new(ground_state(cfg.mu0, cfg.q, u0.x(i)), 0.0)).norm())
            .fold(0.0, f64::max);
    }
    let n = cfg.points.len();
    for (k, (&t, snap)) in cfg.times.iter().zip(&sim.snapshots).enumerate() {
        for (j, &x) in cfg.points.iter().enumerate() {
            let a = ist[k][j];
            let b = asym[k * n + j].2.u_leading;
            let c = snap.interpolate(x);
            let (ab, ac, bc) = ((a - b).norm(), (a - c).norm(), (b - c).norm());
            summary.sup_ist_asym = summary.sup_ist_asym.max(ab);
            summary.sup_ist_pde = summary.sup_ist_pde.max(ac);
            summary.sup_asym_pde = summary.sup_asym_pde.max(bc);
            rows.push(
                [x, t, a.norm(), b.norm(), c.norm(), ab, ac, bc].iter().map(|&v| num(v)).collect::<Vec<_>>().join(","),
            );
        }
    }
    write(
        out,
        "compare.csv",
        &lattice_csv("x,t,abs_ist,abs_asym,abs_pde,diff_ist_asym,diff_ist_pde,diff_asym_pde", rows.into_iter()),
    )?;
    info!(
        "sup diffs: ist/asym {:e}, ist/pde {:e}, asym/pde {:e}",
        summary.sup_ist_asym, summary.sup_ist_pde, summary.sup_asym_pde
    );
    write_json(out, "compare_summary.json", &summary)
}
