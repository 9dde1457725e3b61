//! Flat-file outputs: the sweep report in CSV or JSON, and the solution CSV.
//!
//! Floats print through Rust's shortest round-trip formatting, so identical
//! results give byte-identical files.

use std::io::Write;
use std::path::Path;

use lubrigap::{Error, PressureSolution, Result};

use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn render_csv(result: &SweepResult) -> String {
    let mut out = String::from("h,quantity,value,iterations,residual,wall_time_s\n");
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.h, row.quantity, row.value, row.iterations, row.residual, row.wall_time_s
        ));
    }
    out
}

pub fn render_json(result: &SweepResult) -> Result<String> {
    let mut text = serde_json::to_string_pretty(result)
        .map_err(|e| Error::InvalidParameter(format!("serialize report: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_report(result: &SweepResult, path: &Path, format: Format) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::InvalidParameter("refusing to write an empty report".into()));
    }
    let text = match format {
        Format::Csv => render_csv(result),
        Format::Json => render_json(result)?,
    };
    write_file(path, &text)
}

pub fn read_report(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("parse stored result: {e}")))
}

/// Solution samples as `r,theta,x,y,value` rows.
pub fn render_solution_csv(sol: &PressureSolution) -> String {
    let grid = sol.pressure.grid;
    let mut out = String::from("r,theta,x,y,value\n");
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            let r = grid.r_center(i);
            let theta = grid.theta(j);
            let (x, y) = grid.center_xy(i, j);
            out.push_str(&format!("{},{},{},{},{}\n", r, theta, x, y, sol.pressure.at(i, j)));
        }
    }
    out
}

/// Velocity samples as `x,y,z,vx,vy,vz` rows on a coarse sub-lattice of the
/// aperture.
pub fn render_velocity_csv(field: &lubrigap::ApertureField, geom: &lubrigap::GapGeometry) -> String {
    let grid = *field.grid();
    let mut out = String::from("x,y,z,vx,vy,vz\n");
    let step_i = (grid.n_r / 16).max(1);
    let step_j = (grid.n_theta / 16).max(1);
    let mut i = step_i / 2;
    while i < grid.n_r {
        let mut j = 0;
        while j < grid.n_theta {
            let (x, y) = grid.center_xy(i, j);
            let bottom = geom.gamma_b.value(x, y);
            let gamma = geom.gamma(x, y);
            for k in 0..5 {
                let z = bottom + gamma * (k as f64 + 0.5) / 5.0;
                if let Ok(v) = field.eval_velocity(x, y, z) {
                    out.push_str(&format!("{},{},{},{},{},{}\n", x, y, z, v[0], v[1], v[2]));
                }
            }
            j += step_j;
        }
        i += step_i;
    }
    out
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::InvalidParameter(format!("create {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidParameter(format!("write {}: {e}", path.display())))?;
    Ok(())
}
