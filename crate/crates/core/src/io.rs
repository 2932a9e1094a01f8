//! CSV and JSON formats for fields and scattering data.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::ScatteringData;
use crate::error::{Error, Result};
use crate::grid::{SampledField, SpatialGrid, SpectralGrid};
use crate::linalg::C64;

const FIELD_HEADER: &str = "# x,re,im";
const SPECTRUM_HEADER: &str = "# z,re_r,im_r";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_rows(text: &str, header: &str) -> Result<Vec<[f64; 3]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => return Err(Error::Format(format!("expected header `{header}`, got {other:?}"))),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Format(format!("row {}: expected 3 columns, got {}", n + 2, cols.len())));
        }
        let mut row = [0.0; 3];
        for (slot, c) in row.iter_mut().zip(&cols) {
            let v: f64 = c.parse().map_err(|_| Error::Format(format!("row {}: bad number `{c}`", n + 2)))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("row {}: non-finite value `{c}`", n + 2)));
            }
            *slot = v;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = (f64, C64)>) -> Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (x, v) in rows {
        out.push_str(&format!("{},{},{}\n", fmt(x), fmt(v.re), fmt(v.im)));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn save_field(field: &SampledField, path: impl AsRef<Path>) -> Result<()> {
    write_rows(path.as_ref(), FIELD_HEADER, (0..field.len()).map(|i| (field.x(i), field.values[i])))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<SampledField> {
    let rows = parse_rows(&fs::read_to_string(path)?, FIELD_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::Format("a field needs at least two rows".into()));
    }
    let grid = SpatialGrid::new(rows[0][0], rows[rows.len() - 1][0], rows.len())?;
    let h = grid.spacing();
    for (i, r) in rows.iter().enumerate() {
        if (r[0] - grid.x(i)).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Format(format!("row {}: grid is not uniform", i + 2)));
        }
    }
    SampledField::new(grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
}

pub fn save_spectrum(grid: &SpectralGrid, r: &[C64], path: impl AsRef<Path>) -> Result<()> {
    write_rows(path.as_ref(), SPECTRUM_HEADER, grid.values().iter().copied().zip(r.iter().copied()))
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<(SpectralGrid, Vec<C64>)> {
    let rows = parse_rows(&fs::read_to_string(path)?, SPECTRUM_HEADER)?;
    let grid = SpectralGrid::from_values(rows.iter().map(|r| r[0]).collect())?;
    Ok((grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect()))
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    q: f64,
    beta: f64,
    zeros: Vec<f64>,
    gammas: Vec<[f64; 2]>,
    r_file: String,
}

/// Writes `<stem>.json` and the spectrum CSV it points at (`<stem>_r.csv`).
pub fn save_scattering(data: &ScatteringData, json_path: impl AsRef<Path>) -> Result<()> {
    let json_path = json_path.as_ref();
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("scattering");
    let r_name = format!("{stem}_r.csv");
    let r_path = json_path.with_file_name(&r_name);
    save_spectrum(&data.spectral_grid, &data.r_samples, &r_path)?;
    let side = Sidecar {
        q: data.q,
        beta: data.beta,
        zeros: data.zeros.clone(),
        gammas: data.norming_constants.iter().map(|g| [g.re, g.im]).collect(),
        r_file: r_name,
    };
    let text = serde_json::to_string_pretty(&side).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(json_path, text)?;
    Ok(())
}

pub fn load_scattering(json_path: impl AsRef<Path>) -> Result<ScatteringData> {
    let json_path = json_path.as_ref();
    let side: Sidecar =
        serde_json::from_str(&fs::read_to_string(json_path)?).map_err(|e| Error::Format(e.to_string()))?;
    let r_path = json_path.with_file_name(&side.r_file);
    let (grid, r) = load_spectrum(r_path)?;
    let mut data = ScatteringData {
        spectral_grid: grid,
        r_samples: r,
        zeros: side.zeros,
        norming_constants: side.gammas.iter().map(|g| C64::new(g[0], g[1])).collect(),
        beta: side.beta,
        q: side.q,
    };
    data.sort_zeros();
    data.validate()?;
    Ok(data)
}
