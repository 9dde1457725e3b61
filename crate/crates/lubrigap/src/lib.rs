//! Lubrication approximation of the Stokes problem in a narrow gap.
//!
//! The crate solves the degenerate Reynolds pressure equation
//! `-(1/12) div(gamma^3 grad p) = f` on the contact patch of two nearly
//! touching smooth bodies, reconstructs the asymptotic velocity field in the
//! aperture, and provides the closed-form `1/h` and `ln(1/h)` energy
//! expansions for the sphere-sphere case together with the scaling-law
//! regression used to compare them against numerical sweeps.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
mod pcg;
pub mod quadrature;
pub mod reynolds;
mod stencil;

pub use error::{Error, Result};
pub use geometry::{
    eval_gap, from_lub_coordinates, make_sphere_gap, to_lub_coordinates, validate_contact,
    ConstantsReport, GapGeometry, GapSample, GeometryKind, GeometrySpec, Profile, SphereGap,
};
pub use grid::{PolarGrid, ScalarField};
pub use reynolds::{
    assemble_source, solve_reynolds, weighted_seminorm, BoundaryData, PressureSolution,
    SourceVariant,
};
pub use field::{cutoff, ApertureField, GapEnergyTerm, Surface, TraceError};
pub use asymptotics::{
    energy_const_mode, energy_costheta_mode, fit_scaling, log_linear_fit, radial_pressure_const,
    solve_costheta_ode, solve_profile_ode, stokes_energy_expansion, CosThetaProfile,
    EnergyExpansion, ExpansionParts, MixingSign, OdeSolution, ScalingFit,
};
