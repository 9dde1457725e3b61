//! JSON configuration schemas for the batch front-end.

use serde::{Deserialize, Serialize};

use lubrigap::{BoundaryData, Error, GeometrySpec, MixingSign, Result};

/// Polynomial in (x, y): a list of `[coefficient, i, j]` monomials
/// `c x^i y^j`, total degree at most six.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Poly2(pub Vec<(f64, u32, u32)>);

impl Poly2 {
    pub fn validate(&self) -> Result<()> {
        for &(c, i, j) in &self.0 {
            if i + j > 6 {
                return Err(Error::InvalidParameter(format!(
                    "monomial x^{i} y^{j} exceeds degree 6"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0
            .iter()
            .map(|&(c, i, j)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }
}

/// Custom data functions: a normal polynomial and two tangential components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomData {
    #[serde(default)]
    pub w: Poly2,
    #[serde(default)]
    pub v: [Poly2; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataCase {
    /// `w* = 1`, no tangential data.
    NormalConst,
    /// `w* = x`, the pure `r cos(theta)` source.
    Costheta,
    /// `v* = (1, 0)`, no normal data.
    TangentialConst,
    /// `w* = x^2 + y^2`, `v* = (x, y)`: data vanishing to first order.
    Favorable,
    Custom,
}

/// Requested quantity per sweep step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputSpec {
    Seminorm { n: f64, k: usize },
    GapEnergy,
    ClosedForms,
    Fit,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub geometry: GeometrySpec,
    pub h_list: Vec<f64>,
    pub grid: GridSpec,
    pub data_case: DataCase,
    #[serde(default)]
    pub custom_data: Option<CustomData>,
    pub outputs: Vec<OutputSpec>,
    /// Whether the truncation multiplies the pressure in energy evaluations;
    /// the expansion comparisons use the bare pressure, hence the default.
    #[serde(default)]
    pub cutoff_active: bool,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("sweep config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_list.is_empty() {
            return Err(Error::InvalidParameter("h_list must not be empty".into()));
        }
        for w in self.h_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidParameter(
                    "h_list must be strictly decreasing".into(),
                ));
            }
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return Err(Error::InvalidParameter("all h must lie in (0, 1)".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParameter("no outputs requested".into()));
        }
        for out in &self.outputs {
            if let OutputSpec::Seminorm { n, k } = out {
                if !(1..=3).contains(k) {
                    return Err(Error::InvalidParameter(format!("seminorm k = {k} not in 1..=3")));
                }
                if self.grid.n_r < 32 * k {
                    return Err(Error::InvalidParameter(format!(
                        "grid n_r = {} too coarse for seminorm k = {k}",
                        self.grid.n_r
                    )));
                }
                if 3.0 + n <= 0.0 {
                    return Err(Error::InvalidParameter(format!("seminorm n = {n} out of range")));
                }
            }
        }
        if self
            .outputs
            .iter()
            .any(|o| matches!(o, OutputSpec::ClosedForms))
            && !matches!(self.geometry, GeometrySpec::Sphere { .. })
        {
            return Err(Error::InvalidParameter(
                "closed forms require a sphere geometry".into(),
            ));
        }
        if self.data_case == DataCase::Custom {
            match &self.custom_data {
                None => {
                    return Err(Error::InvalidParameter(
                        "data_case = custom requires custom_data".into(),
                    ))
                }
                Some(c) => {
                    c.w.validate()?;
                    c.v[0].validate()?;
                    c.v[1].validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn boundary_data(&self) -> BoundaryData {
        match self.data_case {
            DataCase::NormalConst => BoundaryData::new(|_, _| 1.0, |_, _| [0.0, 0.0]),
            DataCase::Costheta => BoundaryData::new(|x, _| x, |_, _| [0.0, 0.0]),
            DataCase::TangentialConst => BoundaryData::new(|_, _| 0.0, |_, _| [1.0, 0.0]),
            DataCase::Favorable => BoundaryData::new(|x, y| x * x + y * y, |x, y| [x, y]),
            DataCase::Custom => {
                let c = self.custom_data.clone().unwrap_or(CustomData {
                    w: Poly2::default(),
                    v: [Poly2::default(), Poly2::default()],
                });
                let w = c.w.clone();
                let v = c.v.clone();
                BoundaryData::new(
                    move |x, y| w.eval(x, y),
                    move |x, y| [v[0].eval(x, y), v[1].eval(x, y)],
                )
            }
        }
    }
}

/// Configuration for the `ode` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OdeConfig {
    /// Rescaled far-field profile problem.
    Profile { r1: f64, s_max: f64, n: usize },
    /// Radial cos(theta) mode on the physical patch.
    Costheta { geometry: GeometrySpec, grid_n: usize },
}

impl OdeConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("ode config: {e}")))
    }
}

/// Configuration for the `expand` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpandConfig {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub u_perp0: f64,
    #[serde(default)]
    pub u_par0: [f64; 2],
    #[serde(default)]
    pub grad_u_perp0: [f64; 2],
    #[serde(default)]
    pub sign: MixingSign,
}

impl ExpandConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("expand config: {e}")))
    }
}

/// Configuration for `validate` and `solve`: a geometry, optionally with a
/// grid (validate) or reusing the sweep schema (solve handles that itself).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateConfig {
    pub geometry: GeometrySpec,
    #[serde(default = "default_validate_grid")]
    pub grid: GridSpec,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_validate_grid() -> GridSpec {
    GridSpec { n_r: 256, n_theta: 64 }
}

fn default_k_max() -> usize {
    2
}

impl ValidateConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("validate config: {e}")))
    }
}
