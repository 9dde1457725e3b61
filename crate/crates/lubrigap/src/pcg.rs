//! Conservative five-point operator for the weighted disk problem and a
//! Jacobi-preconditioned conjugate gradient solver.
//!
//! The matrix represents `-(1/12) div(gamma^3 grad u)` in flux form, scaled by
//! the cell measure so it is symmetric positive definite. Face weights are the
//! exact `gamma^3` at face midpoints; the Dirichlet circle is enforced through
//! a reflected ghost ring, the pole face carries no flux.

use crate::error::{Error, Result};
use crate::geometry::GapGeometry;
use crate::grid::PolarGrid;

pub struct StencilMatrix {
    grid: PolarGrid,
    /// transmissibility through radial face `(i+1, j)`, i.e. between cells i and i+1;
    /// index `i = n_r - 1` is the boundary face on the Dirichlet circle
    t_r: Vec<f64>,
    /// transmissibility through the theta face between cells (i, j) and (i, j+1)
    t_theta: Vec<f64>,
    diag: Vec<f64>,
}

impl StencilMatrix {
    pub fn assemble(geom: &GapGeometry, grid: PolarGrid) -> Self {
        let nt = grid.n_theta;
        let mut t_r = vec![0.0; grid.cell_count()];
        let mut t_theta = vec![0.0; grid.cell_count()];
        for i in 0..grid.n_r {
            let rf = grid.r_face(i + 1);
            let rc = grid.r_center(i);
            for j in 0..nt {
                let th = grid.theta(j);
                let g_face = geom.gamma(rf * th.cos(), rf * th.sin());
                t_r[grid.idx(i, j)] = g_face.powi(3) * rf * grid.dtheta / grid.dr;

                let th_f = th + 0.5 * grid.dtheta;
                let g_tf = geom.gamma(rc * th_f.cos(), rc * th_f.sin());
                t_theta[grid.idx(i, j)] = g_tf.powi(3) * grid.dr / (rc * grid.dtheta);
            }
        }
        let mut diag = vec![0.0; grid.cell_count()];
        for i in 0..grid.n_r {
            for j in 0..nt {
                let m = grid.idx(i, j);
                let mut d = t_theta[m] + t_theta[grid.idx(i, (j + nt - 1) % nt)];
                if i + 1 < grid.n_r {
                    d += t_r[m];
                } else {
                    d += 2.0 * t_r[m]; // ghost reflection, second-order zero trace
                }
                if i > 0 {
                    d += t_r[grid.idx(i - 1, j)];
                }
                diag[m] = d;
            }
        }
        StencilMatrix {
            grid,
            t_r,
            t_theta,
            diag,
        }
    }

    /// `out = A x`, including the global 1/12 factor.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let grid = &self.grid;
        let nt = grid.n_theta;
        for i in 0..grid.n_r {
            for j in 0..nt {
                let m = grid.idx(i, j);
                let mut acc = self.diag[m] * x[m];
                if i + 1 < grid.n_r {
                    acc -= self.t_r[m] * x[grid.idx(i + 1, j)];
                }
                if i > 0 {
                    acc -= self.t_r[grid.idx(i - 1, j)] * x[grid.idx(i - 1, j)];
                }
                acc -= self.t_theta[m] * x[grid.idx(i, (j + 1) % nt)];
                let jm = (j + nt - 1) % nt;
                acc -= self.t_theta[grid.idx(i, jm)] * x[grid.idx(i, jm)];
                out[m] = acc / 12.0;
            }
        }
    }

    pub fn jacobi_inverse(&self) -> Vec<f64> {
        self.diag.iter().map(|d| 12.0 / d).collect()
    }
}

pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Jacobi-preconditioned CG on `A x = b`, converging when
/// `||b - Ax||_2 <= tol * ||b||_2`. All reductions run in a fixed sequential
/// order so repeated solves are bit-identical.
pub fn jacobi_pcg(a: &StencilMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<PcgOutcome> {
    let n = b.len();
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return Ok(PcgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let minv = a.jacobi_inverse();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&minv).map(|(ri, mi)| ri * mi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    loop {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Discretization(format!(
                "conjugate gradient lost positive definiteness (p'Ap = {pap:.3e})"
            )));
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        iterations += 1;
        let rel = norm2(&r) / norm_b;
        if rel <= tol {
            return Ok(PcgOutcome {
                x,
                iterations,
                rel_residual: rel,
            });
        }
        if iterations >= max_iter {
            return Err(Error::SolverFailure {
                residual: rel,
                iterations,
            });
        }
        for k in 0..n {
            z[k] = r[k] * minv[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        rz = rz_new;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
