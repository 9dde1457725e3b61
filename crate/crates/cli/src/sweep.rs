//! Sweep orchestration: one pipeline run per gap width, dispatched to a
//! worker pool, results collected in h-order and optionally fitted.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use lubrigap::{
    assemble_source, fit_scaling, solve_reynolds, stokes_energy_expansion, validate_contact,
    weighted_seminorm, ApertureField, Error, GapEnergyTerm, MixingSign, PolarGrid,
    Result, ScalingFit, SourceVariant,
};

use crate::config::{OutputSpec, SweepConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub quantity: String,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub h: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    pub fits: BTreeMap<String, ScalingFit>,
    pub provenance: Provenance,
}

pub fn quantity_name(out: &OutputSpec) -> Option<String> {
    match out {
        OutputSpec::Seminorm { n, k } => Some(format!("seminorm(n={n};k={k})")),
        OutputSpec::GapEnergy => Some("gap_energy".into()),
        OutputSpec::ClosedForms => Some("closed_form_expansion".into()),
        OutputSpec::Fit => None,
    }
}

/// FNV-1a over the canonical JSON encoding of the config.
pub fn config_hash(config: &SweepConfig) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x1_0000_01b3);
    }
    format!("{hash:016x}")
}

fn run_one_h(config: &SweepConfig, h: f64, tol: f64) -> Result<Vec<SweepRow>> {
    let started = Instant::now();
    let spec = config.geometry.with_h(h);
    let geom = spec.build()?;
    let grid = PolarGrid::new(geom.l, config.grid.n_r, config.grid.n_theta)?;
    validate_contact(&geom, &grid, 1)?;
    let data = config.boundary_data();

    let mut plain = None;
    let mut rows = Vec::new();
    for out in &config.outputs {
        let name = match quantity_name(out) {
            Some(n) => n,
            None => continue,
        };
        let (value, iterations, residual) = match out {
            OutputSpec::Seminorm { n, k } => {
                if plain.is_none() {
                    let f = assemble_source(&geom, &data, grid, SourceVariant::Plain)?;
                    plain = Some(solve_reynolds(&geom, grid, &f, tol)?);
                }
                let sol = plain.as_ref().unwrap();
                (weighted_seminorm(sol, &geom, *n, *k)?, sol.iterations, sol.residual)
            }
            OutputSpec::GapEnergy => {
                let f = assemble_source(&geom, &data, grid, SourceVariant::Interior)?;
                let sol = solve_reynolds(&geom, grid, &f, tol)?;
                let field = ApertureField::new(&geom, &sol, &data, config.cutoff_active)?;
                (
                    field.gap_energy(&[GapEnergyTerm::All])?,
                    sol.iterations,
                    sol.residual,
                )
            }
            OutputSpec::ClosedForms => {
                let gap = spec.sphere().ok_or_else(|| {
                    Error::InvalidParameter(
                        "closed forms require a sphere geometry".into(),
                    )
                })??;
                let ex = stokes_energy_expansion(
                    gap.container_radius,
                    gap.body_radius,
                    data.w0,
                    data.v0,
                    data.grad_w0,
                    h,
                    MixingSign::BodyMinusContainer,
                )?;
                (ex.evaluate(h)?, 0, 0.0)
            }
            OutputSpec::Fit => unreachable!(),
        };
        rows.push(SweepRow {
            h,
            quantity: name,
            value,
            iterations,
            residual,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// Runs the whole sweep; one failed h is recorded and skipped, a sweep with
/// no successful h at all is an error.
pub fn run_sweep(config: &SweepConfig, tol: f64, threads: usize) -> Result<SweepResult> {
    config.validate()?;
    let n = config.h_list.len();
    let workers = threads.clamp(1, n.max(1));
    let mut slots: Vec<Option<Result<Vec<SweepRow>>>> = Vec::new();
    slots.resize_with(n, || None);

    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let config = &*config;
            handles.push(scope.spawn(move || {
                let mut acc = Vec::new();
                let mut idx = w;
                while idx < n {
                    acc.push((idx, run_one_h(config, config.h_list[idx], tol)));
                    idx += workers;
                }
                acc
            }));
        }
        for handle in handles {
            for (idx, outcome) in handle.join().expect("sweep worker panicked") {
                slots[idx] = Some(outcome);
            }
        }
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (idx, slot) in slots.into_iter().enumerate() {
        match slot.expect("all h slots filled") {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => failures.push(SweepFailure {
                h: config.h_list[idx],
                status: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(Error::SolverFailure {
            residual: f64::NAN,
            iterations: 0,
        });
    }

    let mut fits = BTreeMap::new();
    if config.outputs.iter().any(|o| matches!(o, OutputSpec::Fit)) {
        for out in &config.outputs {
            let name = match quantity_name(out) {
                Some(n) => n,
                None => continue,
            };
            let pairs: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.quantity == name)
                .map(|r| (r.h, r.value))
                .collect();
            if pairs.len() >= 4 {
                let hs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let vals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
                if let Ok(fit) = fit_scaling(&hs, &vals) {
                    fits.insert(name, fit);
                }
            }
        }
    }

    Ok(SweepResult {
        rows,
        failures,
        fits,
        provenance: Provenance {
            config_hash: config_hash(config),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Re-fits every quantity of a stored result; deterministic given the rows.
pub fn refit(result: &SweepResult) -> Result<BTreeMap<String, ScalingFit>> {
    let mut names: Vec<String> = result.rows.iter().map(|r| r.quantity.clone()).collect();
    names.sort();
    names.dedup();
    let mut fits = BTreeMap::new();
    for name in names {
        let pairs: Vec<(f64, f64)> = result
            .rows
            .iter()
            .filter(|r| r.quantity == name)
            .map(|r| (r.h, r.value))
            .collect();
        if pairs.len() >= 4 {
            let hs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let vals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            fits.insert(name, fit_scaling(&hs, &vals)?);
        }
    }
    if fits.is_empty() {
        return Err(Error::Fit("no quantity has enough rows to fit".into()));
    }
    Ok(fits)
}
