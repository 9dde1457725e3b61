//! Finite-difference machinery on the polar grid: radial face gradients with
//! their superconvergent center interpolants, periodic theta derivatives and
//! the polar-to-Cartesian chain rules.
//!
//! Stencils that reach inward past the pole use the antipodal ring: for any
//! single-valued field, `F(-r, theta) = F(r, theta + pi)`.

use crate::grid::PolarGrid;

/// Radial face gradients of a Dirichlet field (zero trace at r = L).
///
/// `g` holds rings `0..=n_r`: ring 0 is the pole face, ring `n_r` the
/// boundary face where the reflected ghost gives `-2 u / dr`. `gm1` is the
/// virtual face one spacing inside the pole.
pub(crate) struct FaceGradients {
    pub g: Vec<f64>,
    pub gm1: Vec<f64>,
}

pub(crate) fn face_gradients(grid: &PolarGrid, u: &[f64]) -> FaceGradients {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let dr = grid.dr;
    let mut g = vec![0.0; (nr + 1) * nt];
    let mut gm1 = vec![0.0; nt];
    for j in 0..nt {
        let ja = grid.across_pole(j);
        g[j] = (u[grid.idx(0, j)] - u[grid.idx(0, ja)]) / dr;
        gm1[j] = (u[grid.idx(0, ja)] - u[grid.idx(1, ja)]) / dr;
        for i in 1..nr {
            g[i * nt + j] = (u[grid.idx(i, j)] - u[grid.idx(i - 1, j)]) / dr;
        }
        g[nr * nt + j] = -2.0 * u[grid.idx(nr - 1, j)] / dr;
    }
    FaceGradients { g, gm1 }
}

/// Fourth-order interpolation of face values to cell centers.
pub(crate) fn faces_to_centers(grid: &PolarGrid, f: &FaceGradients) -> Vec<f64> {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let mut out = vec![0.0; nr * nt];
    for j in 0..nt {
        for i in 0..nr {
            let gm = if i == 0 { f.gm1[j] } else { f.g[(i - 1) * nt + j] };
            out[i * nt + j] = if i + 2 <= nr {
                (9.0 * (f.g[i * nt + j] + f.g[(i + 1) * nt + j])
                    - (gm + f.g[(i + 2) * nt + j]))
                    / 16.0
            } else {
                (-f.g[(i - 1) * nt + j] + 6.0 * f.g[i * nt + j] + 3.0 * f.g[(i + 1) * nt + j]) / 8.0
            };
        }
    }
    out
}

/// Fourth-order radial derivative of the underlying field's face values,
/// evaluated at cell centers (one more derivative than [`faces_to_centers`]).
pub(crate) fn faces_to_center_derivative(grid: &PolarGrid, f: &FaceGradients) -> Vec<f64> {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let dr = grid.dr;
    let mut out = vec![0.0; nr * nt];
    for j in 0..nt {
        for i in 0..nr {
            let gm = if i == 0 { f.gm1[j] } else { f.g[(i - 1) * nt + j] };
            out[i * nt + j] = if i + 2 <= nr {
                (27.0 * (f.g[(i + 1) * nt + j] - f.g[i * nt + j])
                    - (f.g[(i + 2) * nt + j] - gm))
                    / (24.0 * dr)
            } else {
                (f.g[(i + 1) * nt + j] - f.g[i * nt + j]) / dr
            };
        }
    }
    out
}

/// Fourth-order periodic d/dtheta of a center field (per ring).
pub(crate) fn dtheta4(grid: &PolarGrid, field: &[f64]) -> Vec<f64> {
    let nt = grid.n_theta;
    let rows = field.len() / nt;
    let mut out = vec![0.0; field.len()];
    for row in 0..rows {
        let base = row * nt;
        for j in 0..nt {
            let jp1 = base + (j + 1) % nt;
            let jm1 = base + (j + nt - 1) % nt;
            let jp2 = base + (j + 2) % nt;
            let jm2 = base + (j + nt - 2) % nt;
            out[base + j] =
                (8.0 * (field[jp1] - field[jm1]) - (field[jp2] - field[jm2])) / (12.0 * grid.dtheta);
        }
    }
    out
}

/// Fourth-order radial derivative of a smooth center field, reaching across
/// the pole; downgraded near the outer edge where the wide stencil runs out.
pub(crate) fn dr_center4(grid: &PolarGrid, field: &[f64]) -> Vec<f64> {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let dr = grid.dr;
    let mut out = vec![0.0; nr * nt];
    let at = |i: usize, j: usize| field[i * nt + j];
    for j in 0..nt {
        let ja = grid.across_pole(j);
        for i in 0..nr {
            let v = if i >= 2 && i + 3 <= nr {
                (8.0 * (at(i + 1, j) - at(i - 1, j)) - (at(i + 2, j) - at(i - 2, j))) / (12.0 * dr)
            } else if i == 0 {
                (8.0 * (at(1, j) - at(0, ja)) - (at(2, j) - at(1, ja))) / (12.0 * dr)
            } else if i == 1 {
                (8.0 * (at(2, j) - at(0, j)) - (at(3, j) - at(0, ja))) / (12.0 * dr)
            } else if i + 2 == nr {
                (at(i + 1, j) - at(i - 1, j)) / (2.0 * dr)
            } else {
                (3.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j)) / (2.0 * dr)
            };
            out[i * nt + j] = v;
        }
    }
    out
}

/// Second-order centered radial derivative (pole-reflected, one-sided at the rim).
pub(crate) fn dr_center2(grid: &PolarGrid, field: &[f64]) -> Vec<f64> {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let dr = grid.dr;
    let mut out = vec![0.0; nr * nt];
    let at = |i: usize, j: usize| field[i * nt + j];
    for j in 0..nt {
        let ja = grid.across_pole(j);
        for i in 0..nr {
            let v = if i == 0 {
                (at(1, j) - at(0, ja)) / (2.0 * dr)
            } else if i + 1 < nr {
                (at(i + 1, j) - at(i - 1, j)) / (2.0 * dr)
            } else {
                (3.0 * at(i, j) - 4.0 * at(i - 1, j) + at(i - 2, j)) / (2.0 * dr)
            };
            out[i * nt + j] = v;
        }
    }
    out
}

/// Second-order periodic d/dtheta.
pub(crate) fn dtheta2(grid: &PolarGrid, field: &[f64]) -> Vec<f64> {
    let nt = grid.n_theta;
    let rows = field.len() / nt;
    let mut out = vec![0.0; field.len()];
    for row in 0..rows {
        let base = row * nt;
        for j in 0..nt {
            out[base + j] = (field[base + (j + 1) % nt] - field[base + (j + nt - 1) % nt])
                / (2.0 * grid.dtheta);
        }
    }
    out
}

/// Cartesian components from polar derivatives: `(d/dr, d/dtheta) -> (d/dx, d/dy)`.
pub(crate) fn cart_from_polar(grid: &PolarGrid, f_r: &[f64], f_t: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nt = grid.n_theta;
    let nr = grid.n_r;
    let mut fx = vec![0.0; nr * nt];
    let mut fy = vec![0.0; nr * nt];
    for i in 0..nr {
        let r = grid.r_center(i);
        for j in 0..nt {
            let th = grid.theta(j);
            let (c, s) = (th.cos(), th.sin());
            let m = i * nt + j;
            let angular = f_t[m] / r;
            fx[m] = c * f_r[m] - s * angular;
            fy[m] = s * f_r[m] + c * angular;
        }
    }
    (fx, fy)
}

/// Second-order Cartesian gradient of a smooth center field.
pub(crate) fn grad_xy_2nd(grid: &PolarGrid, field: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let f_r = dr_center2(grid, field);
    let f_t = dtheta2(grid, field);
    cart_from_polar(grid, &f_r, &f_t)
}

/// Fourth-order Cartesian gradient of a smooth center field.
pub(crate) fn grad_xy_4th(grid: &PolarGrid, field: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let f_r = dr_center4(grid, field);
    let f_t = dtheta4(grid, field);
    cart_from_polar(grid, &f_r, &f_t)
}
