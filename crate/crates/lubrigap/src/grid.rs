//! Cell-centered polar discretization of the patch disk and grid-sampled
//! scalar fields.
//!
//! Radial cell centers sit at `(i + 1/2) dr`, so no node lands on the
//! coordinate singularity at r = 0; faces sit at integer multiples of `dr`
//! with the outermost face on the Dirichlet circle r = L.

use crate::error::{Error, Result};

/// Tensor-product `(r, theta)` grid on the disk of radius `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub l: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub dr: f64,
    pub dtheta: f64,
}

impl PolarGrid {
    pub fn new(l: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("patch radius must be positive, got {l}")));
        }
        if n_r < 8 {
            return Err(Error::InvalidParameter(format!("n_r must be >= 8, got {n_r}")));
        }
        if n_theta < 8 || !n_theta.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "n_theta must be >= 8 and a multiple of 4, got {n_theta}"
            )));
        }
        Ok(PolarGrid {
            l,
            n_r,
            n_theta,
            dr: l / n_r as f64,
            dtheta: std::f64::consts::TAU / n_theta as f64,
        })
    }

    #[inline]
    pub fn r_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    /// Radial face ring `i` sits at `i * dr`; ring 0 is the pole, ring `n_r` the boundary.
    #[inline]
    pub fn r_face(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.dtheta
    }

    #[inline]
    pub fn cell_measure(&self, i: usize) -> f64 {
        self.r_center(i) * self.dr * self.dtheta
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn r_centers(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| self.r_center(i)).collect()
    }

    pub fn theta_centers(&self) -> Vec<f64> {
        (0..self.n_theta).map(|j| self.theta(j)).collect()
    }

    /// Cartesian position of a cell center.
    #[inline]
    pub fn center_xy(&self, i: usize, j: usize) -> (f64, f64) {
        let r = self.r_center(i);
        let th = self.theta(j);
        (r * th.cos(), r * th.sin())
    }

    /// Antipodal theta index, used when a stencil reaches across the pole.
    #[inline]
    pub fn across_pole(&self, j: usize) -> usize {
        (j + self.n_theta / 2) % self.n_theta
    }
}

/// A scalar sampled at every cell center of a [`PolarGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
    pub name: String,
}

impl ScalarField {
    pub fn zeros(grid: PolarGrid, name: impl Into<String>) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.cell_count()],
            name: name.into(),
        }
    }

    pub fn from_fn(grid: PolarGrid, name: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.cell_count());
        for i in 0..grid.n_r {
            for j in 0..grid.n_theta {
                let (x, y) = grid.center_xy(i, j);
                values.push(f(x, y));
            }
        }
        ScalarField {
            grid,
            values,
            name: name.into(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// First non-finite sample position, if any.
    pub fn first_non_finite(&self) -> Option<(f64, f64)> {
        for i in 0..self.grid.n_r {
            for j in 0..self.grid.n_theta {
                if !self.at(i, j).is_finite() {
                    return Some(self.grid.center_xy(i, j));
                }
            }
        }
        None
    }
}
