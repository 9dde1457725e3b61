//! The weighted elliptic pressure problem on the patch disk:
//! `-(1/12) div(gamma^3 grad p) = f` with zero trace on the boundary circle,
//! plus the weighted seminorms `int gamma^{3+n} |grad^k p|^2` used to track
//! its behaviour as the gap closes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GapGeometry;
use crate::grid::{PolarGrid, ScalarField};
use crate::pcg::{jacobi_pcg, StencilMatrix};
use crate::stencil::{face_gradients, grad_xy_2nd};

type DataFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type VecFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

/// Boundary data on the lower surface: normal component `w*` and tangential
/// vector `v*`, together with their origin values used by the closed forms.
#[derive(Clone)]
pub struct BoundaryData {
    w_star: DataFn,
    v_star: VecFn,
    pub w0: f64,
    pub grad_w0: [f64; 2],
    pub v0: [f64; 2],
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryData")
            .field("w0", &self.w0)
            .field("grad_w0", &self.grad_w0)
            .field("v0", &self.v0)
            .finish()
    }
}

const ORIGIN_PROBE: f64 = 1e-6;

impl BoundaryData {
    /// Origin values are derived from the callables themselves.
    pub fn new(
        w_star: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        v_star: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        let w = Arc::new(w_star) as DataFn;
        let v = Arc::new(v_star) as VecFn;
        let s = ORIGIN_PROBE;
        let grad_w0 = [
            (w(s, 0.0) - w(-s, 0.0)) / (2.0 * s),
            (w(0.0, s) - w(0.0, -s)) / (2.0 * s),
        ];
        BoundaryData {
            w0: w(0.0, 0.0),
            grad_w0,
            v0: v(0.0, 0.0),
            w_star: w,
            v_star: v,
        }
    }

    /// Explicit origin values, validated against the callables.
    pub fn from_parts(
        w_star: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        v_star: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        w0: f64,
        grad_w0: [f64; 2],
        v0: [f64; 2],
    ) -> Result<Self> {
        let auto = BoundaryData::new(w_star, v_star);
        let tol = 1e-4;
        let close = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        if !close(auto.w0, w0)
            || !close(auto.grad_w0[0], grad_w0[0])
            || !close(auto.grad_w0[1], grad_w0[1])
            || !close(auto.v0[0], v0[0])
            || !close(auto.v0[1], v0[1])
        {
            return Err(Error::InvalidParameter(
                "declared origin values disagree with the supplied data functions".into(),
            ));
        }
        Ok(BoundaryData { w0, grad_w0, v0, ..auto })
    }

    pub fn w(&self, x: f64, y: f64) -> f64 {
        (self.w_star)(x, y)
    }

    pub fn v(&self, x: f64, y: f64) -> [f64; 2] {
        (self.v_star)(x, y)
    }
}

/// Which right-hand side to assemble.
///
/// `Plain` is `w* - (1/2) div((gamma_t + gamma_b) v*)`; `Interior` subtracts
/// the extra `(1/2)(h - 2 gamma_b) div v*` term so the reconstructed normal
/// velocity matches `w*` on the lower boundary. The two coincide whenever
/// `v*` is divergence free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceVariant {
    Plain,
    Interior,
}

/// Samples the source at cell centers; divergence terms use centered
/// differences of the product fields.
pub fn assemble_source(
    geom: &GapGeometry,
    data: &BoundaryData,
    grid: PolarGrid,
    variant: SourceVariant,
) -> Result<ScalarField> {
    let n = grid.cell_count();
    let mut w = vec![0.0; n];
    let mut prod1 = vec![0.0; n];
    let mut prod2 = vec![0.0; n];
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            let (x, y) = grid.center_xy(i, j);
            let m = grid.idx(i, j);
            let tb = geom.gamma_t.value(x, y) + geom.gamma_b.value(x, y);
            let v = data.v(x, y);
            w[m] = data.w(x, y);
            v1[m] = v[0];
            v2[m] = v[1];
            prod1[m] = tb * v[0];
            prod2[m] = tb * v[1];
        }
    }
    let (p1x, _) = grad_xy_2nd(&grid, &prod1);
    let (_, p2y) = grad_xy_2nd(&grid, &prod2);
    let mut values: Vec<f64> = (0..n).map(|m| w[m] - 0.5 * (p1x[m] + p2y[m])).collect();

    if variant == SourceVariant::Interior {
        let (v1x, _) = grad_xy_2nd(&grid, &v1);
        let (_, v2y) = grad_xy_2nd(&grid, &v2);
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                let (x, y) = grid.center_xy(i, j);
                let m = grid.idx(i, j);
                let gb = geom.gamma_b.value(x, y);
                values[m] -= 0.5 * (geom.h - 2.0 * gb) * (v1x[m] + v2y[m]);
            }
        }
    }

    let field = ScalarField {
        grid,
        values,
        name: "source".into(),
    };
    if let Some((x, y)) = field.first_non_finite() {
        return Err(Error::DataEvaluation { x, y });
    }
    Ok(field)
}

/// A converged pressure with its solver diagnostics.
#[derive(Debug, Clone)]
pub struct PressureSolution {
    pub pressure: ScalarField,
    /// Relative algebraic residual reached by the solver.
    pub residual: f64,
    pub iterations: usize,
    pub source: ScalarField,
}

/// Default iteration cap: `50 * n_r * n_theta`.
pub fn default_iteration_cap(grid: &PolarGrid) -> usize {
    50 * grid.n_r * grid.n_theta
}

/// Solves the pressure problem by Jacobi-preconditioned conjugate gradients
/// on the conservative flux-form discretization.
///
/// Callers are expected to have run [`crate::validate_contact`] on the
/// geometry first; a degenerate weight makes the system lose definiteness.
pub fn solve_reynolds(
    geom: &GapGeometry,
    grid: PolarGrid,
    source: &ScalarField,
    tol: f64,
) -> Result<PressureSolution> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidParameter(format!(
            "solver tolerance must lie in (0, 1e-4], got {tol}"
        )));
    }
    if source.grid != grid {
        return Err(Error::InvalidParameter(
            "source field was sampled on a different grid".into(),
        ));
    }
    let a = StencilMatrix::assemble(geom, grid);
    let b: Vec<f64> = (0..grid.n_r)
        .flat_map(|i| {
            let meas = grid.cell_measure(i);
            (0..grid.n_theta).map(move |j| (i, j, meas))
        })
        .map(|(i, j, meas)| source.at(i, j) * meas)
        .collect();
    let outcome = jacobi_pcg(&a, &b, tol, default_iteration_cap(&grid))?;
    Ok(PressureSolution {
        pressure: ScalarField {
            grid,
            values: outcome.x,
            name: "pressure".into(),
        },
        residual: outcome.rel_residual,
        iterations: outcome.iterations,
        source: source.clone(),
    })
}

/// Midpoint-rule value of `int gamma^{3+n} |grad^k p|^2` with polar-gradient
/// stencils.
///
/// For `k = 1` the gradient lives on the staggered faces where the flux-form
/// scheme is most accurate; for `k = 2, 3` successive centered differences
/// build the Cartesian derivative tensors and the outermost `k` rings are
/// excluded from the integral.
pub fn weighted_seminorm(
    sol: &PressureSolution,
    geom: &GapGeometry,
    n: f64,
    k: usize,
) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!("k must be 1, 2 or 3, got {k}")));
    }
    let grid = sol.pressure.grid;
    if grid.n_r < 32 * k {
        return Err(Error::Resolution(format!(
            "n_r = {} is too coarse for k = {k} derivatives (need >= {})",
            grid.n_r,
            32 * k
        )));
    }
    if 3.0 + n <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "weight exponent 3 + n must be positive, got n = {n}"
        )));
    }
    let expo = 3.0 + n;
    let u = &sol.pressure.values;
    let nt = grid.n_theta;

    if k == 1 {
        let f = face_gradients(&grid, u);
        let mut total = 0.0;
        for i in 1..=grid.n_r {
            let rf = grid.r_face(i);
            let meas = rf * grid.dr * grid.dtheta;
            for j in 0..nt {
                let th = grid.theta(j);
                let g = geom.gamma(rf * th.cos(), rf * th.sin());
                total += g.powf(expo) * f.g[i * nt + j] * f.g[i * nt + j] * meas;
            }
        }
        for i in 0..grid.n_r {
            let rc = grid.r_center(i);
            let meas = grid.cell_measure(i);
            for j in 0..nt {
                let th_f = grid.theta(j) + 0.5 * grid.dtheta;
                let g = geom.gamma(rc * th_f.cos(), rc * th_f.sin());
                let gt = (u[grid.idx(i, (j + 1) % nt)] - u[grid.idx(i, j)]) / (rc * grid.dtheta);
                total += g.powf(expo) * gt * gt * meas;
            }
        }
        return Ok(total);
    }

    // successive centered differences for k = 2, 3
    let (ux, uy) = grad_xy_2nd(&grid, u);
    let mut tensor: Vec<Vec<f64>> = Vec::new();
    for comp in [&ux, &uy] {
        let (dx, dy) = grad_xy_2nd(&grid, comp);
        tensor.push(dx);
        tensor.push(dy);
    }
    if k == 3 {
        let mut next = Vec::new();
        for comp in &tensor {
            let (dx, dy) = grad_xy_2nd(&grid, comp);
            next.push(dx);
            next.push(dy);
        }
        tensor = next;
    }
    let mut total = 0.0;
    for i in 0..grid.n_r - k {
        let meas = grid.cell_measure(i);
        for j in 0..nt {
            let m = grid.idx(i, j);
            let (x, y) = grid.center_xy(i, j);
            let g = geom.gamma(x, y);
            let sq: f64 = tensor.iter().map(|t| t[m] * t[m]).sum();
            total += g.powf(expo) * sq * meas;
        }
    }
    Ok(total)
}
