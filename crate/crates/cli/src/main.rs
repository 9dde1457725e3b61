//! `lubrigap` command line: geometry checks, single solves, h-sweeps with
//! CSV/JSON reports, the two radial ODE reductions and the closed-form
//! expansion table.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lubrigap_cli::config::{ExpandConfig, OdeConfig, SweepConfig, ValidateConfig};
use lubrigap_cli::{report, sweep};
use lubrigap::{
    assemble_source, solve_costheta_ode, solve_profile_ode, solve_reynolds,
    stokes_energy_expansion, validate_contact, Error, PolarGrid, SourceVariant,
};
use report::Format;

#[derive(Parser)]
#[command(name = "lubrigap", version, about = "narrow-gap Stokes asymptotics toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file path
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Relative solver tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Worker threads for sweeps (default: all cores); the LUBRIGAP_THREADS
    /// environment variable overrides this flag
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the contact assumptions and print the constants report
    Validate,
    /// Run a single pressure solve and export the solution samples
    Solve,
    /// Run an h-sweep and write the report
    Sweep,
    /// Solve the far-field profile ODE or the radial cos-theta mode
    Ode,
    /// Print the closed-form energy expansion table
    Expand,
    /// Re-fit the scaling laws of a stored JSON sweep result
    Fit,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::SolverFailure { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn read_config(cli: &Cli) -> Result<String, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("--config is required".into()))?;
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("read {}: {e}", path.display())))
}

fn threads(cli: &Cli) -> usize {
    if let Ok(text) = std::env::var("LUBRIGAP_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    cli.threads.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    })
}

fn emit(cli: &Cli, text: &str) -> Result<(), Error> {
    match &cli.out {
        Some(path) => report::write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_line<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("serialize: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate => {
            let cfg = ValidateConfig::from_json(&read_config(cli)?)?;
            let geom = cfg.geometry.build()?;
            let grid = PolarGrid::new(geom.l, cfg.grid.n_r, cfg.grid.n_theta)?;
            let report = validate_contact(&geom, &grid, cfg.k_max)?;
            emit(cli, &to_json_line(&report)?)
        }
        Command::Solve => {
            let cfg = SweepConfig::from_json(&read_config(cli)?)?;
            let h = cfg.h_list[0];
            let geom = cfg.geometry.with_h(h).build()?;
            let grid = PolarGrid::new(geom.l, cfg.grid.n_r, cfg.grid.n_theta)?;
            validate_contact(&geom, &grid, 1)?;
            let data = cfg.boundary_data();
            let f = assemble_source(&geom, &data, grid, SourceVariant::Interior)?;
            let sol = solve_reynolds(&geom, grid, &f, cli.tol)?;
            let field = lubrigap::ApertureField::new(&geom, &sol, &data, true)?;
            let top = field.boundary_trace_error(lubrigap::Surface::Top);
            let bottom = field.boundary_trace_error(lubrigap::Surface::Bottom);

            #[derive(Serialize)]
            struct Diagnostics {
                iterations: usize,
                residual: f64,
                n_r: usize,
                n_theta: usize,
                h: f64,
                trace_top: f64,
                trace_bottom_tangential: f64,
                trace_bottom_normal: f64,
                divergence_residual: f64,
            }
            let diag = to_json_line(&Diagnostics {
                iterations: sol.iterations,
                residual: sol.residual,
                n_r: grid.n_r,
                n_theta: grid.n_theta,
                h,
                trace_top: top.max(),
                trace_bottom_tangential: bottom.tangential,
                trace_bottom_normal: bottom.normal,
                divergence_residual: field
                    .divergence_residual((grid.n_r / 4, grid.n_theta, 16))
                    .unwrap_or(f64::NAN),
            })?;
            let csv = report::render_solution_csv(&sol);
            match &cli.out {
                Some(path) => {
                    report::write_file(path, &csv)?;
                    let vel_path = path.with_extension("velocity.csv");
                    report::write_file(&vel_path, &report::render_velocity_csv(&field, &geom))?;
                    print!("{diag}");
                }
                None => {
                    print!("{csv}");
                    eprint!("{diag}");
                }
            }
            Ok(())
        }
        Command::Sweep => {
            let cfg = SweepConfig::from_json(&read_config(cli)?)?;
            let result = sweep::run_sweep(&cfg, cli.tol, threads(cli))?;
            match &cli.out {
                Some(path) => report::write_report(&result, path, cli.format.into()),
                None => {
                    let text = match cli.format.into() {
                        Format::Csv => report::render_csv(&result),
                        Format::Json => report::render_json(&result)?,
                    };
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Ode => {
            let cfg = OdeConfig::from_json(&read_config(cli)?)?;
            match cfg {
                OdeConfig::Profile { r1, s_max, n } => {
                    let sol = solve_profile_ode(r1, s_max, n)?;
                    let last = sol.s_grid.len() - 1;

                    #[derive(Serialize)]
                    struct DecayReport {
                        r1: f64,
                        s_max: f64,
                        n: usize,
                        far_field_coeff: f64,
                        far_field_fit_residual: f64,
                        s3_q_at_s_max: f64,
                        s4_dq_at_s_max: f64,
                    }
                    emit(
                        cli,
                        &to_json_line(&DecayReport {
                            r1,
                            s_max,
                            n,
                            far_field_coeff: sol.far_field_coeff,
                            far_field_fit_residual: sol.far_field_fit_residual,
                            s3_q_at_s_max: sol.s_grid[last].powi(3) * sol.q_values[last],
                            s4_dq_at_s_max: sol.s_grid[last].powi(4) * sol.dq_values[last],
                        })?,
                    )
                }
                OdeConfig::Costheta { geometry, grid_n } => {
                    let gap = geometry
                        .sphere()
                        .ok_or_else(|| {
                            Error::InvalidParameter(
                                "the cos-theta ode needs a sphere geometry".into(),
                            )
                        })??;
                    let profile = solve_costheta_ode(&gap, grid_n)?;

                    #[derive(Serialize)]
                    struct ModeReport {
                        h: f64,
                        grid_n: usize,
                        energy: f64,
                        q_max: f64,
                    }
                    emit(
                        cli,
                        &to_json_line(&ModeReport {
                            h: gap.h,
                            grid_n,
                            energy: profile.energy,
                            q_max: profile
                                .q_values
                                .iter()
                                .fold(0.0_f64, |a, q| a.max(q.abs())),
                        })?,
                    )
                }
            }
        }
        Command::Expand => {
            let cfg = ExpandConfig::from_json(&read_config(cli)?)?;
            let gap = cfg
                .geometry
                .sphere()
                .ok_or_else(|| {
                    Error::InvalidParameter("the expansion needs a sphere geometry".into())
                })??;
            let ex = stokes_energy_expansion(
                gap.container_radius,
                gap.body_radius,
                cfg.u_perp0,
                cfg.u_par0,
                cfg.grad_u_perp0,
                gap.h,
                cfg.sign,
            )?;
            match cli.format.into() {
                Format::Json => {
                    #[derive(Serialize)]
                    struct ExpandReport {
                        h: f64,
                        r1: f64,
                        r3: f64,
                        expansion: lubrigap::EnergyExpansion,
                        value_at_h: f64,
                    }
                    emit(
                        cli,
                        &to_json_line(&ExpandReport {
                            h: gap.h,
                            r1: gap.r1,
                            r3: gap.r3,
                            expansion: ex,
                            value_at_h: ex.evaluate(gap.h)?,
                        })?,
                    )
                }
                Format::Csv => {
                    let mut text = String::from("part,coefficient\n");
                    text.push_str(&format!("const_mode_1_over_h,{}\n", ex.parts.const_mode_1_over_h));
                    text.push_str(&format!("const_mode_log,{}\n", ex.parts.const_mode_log));
                    text.push_str(&format!("couette_log,{}\n", ex.parts.couette_log));
                    text.push_str(&format!("gradient_log,{}\n", ex.parts.gradient_log));
                    text.push_str(&format!("total_at_h,{}\n", ex.evaluate(gap.h)?));
                    emit(cli, &text)
                }
            }
        }
        Command::Fit => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--config is required".into()))?;
            let stored = report::read_report(path)?;
            let fits = sweep::refit(&stored)?;
            emit(cli, &to_json_line(&fits)?)
        }
    }
}
