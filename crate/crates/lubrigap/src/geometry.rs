//! Gap geometries: general profile pairs, the sphere-sphere specialization,
//! contact-assumption validation and the lubrication coordinate rescaling.
//!
//! The gap width is always `gamma(x,y) = h + gamma_t(x,y) - gamma_b(x,y)`,
//! positive on the closed disk of radius `l`. Both profiles must be flat at
//! the origin and their Hessian difference positive definite on the patch.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PolarGrid;

type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
type HessFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

/// One boundary profile: a callable plus optional analytic derivatives.
/// Missing derivatives fall back to centered finite differences.
#[derive(Clone)]
pub struct Profile {
    f: ScalarFn,
    grad: Option<GradFn>,
    hess: Option<HessFn>,
    fd_step: f64,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("analytic_grad", &self.grad.is_some())
            .field("analytic_hess", &self.hess.is_some())
            .finish()
    }
}

impl Profile {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, patch_radius: f64) -> Self {
        Profile {
            f: Arc::new(f),
            grad: None,
            hess: None,
            fd_step: fd_step(patch_radius),
        }
    }

    pub fn with_derivatives(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        hess: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
        patch_radius: f64,
    ) -> Self {
        Profile {
            f: Arc::new(f),
            grad: Some(Arc::new(grad)),
            hess: Some(Arc::new(hess)),
            fd_step: fd_step(patch_radius),
        }
    }

    /// Profile depending on r^2 only: `value(x,y) = psi(x^2 + y^2)`, with
    /// analytic derivatives from `psi` and its u-derivatives.
    pub fn radial(
        psi: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        dpsi: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        d2psi: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static,
        patch_radius: f64,
    ) -> Self {
        let dpsi_h = dpsi.clone();
        Profile {
            f: Arc::new(move |x, y| psi(x * x + y * y)),
            grad: Some(Arc::new(move |x, y| {
                let d = dpsi(x * x + y * y);
                [2.0 * d * x, 2.0 * d * y]
            })),
            hess: Some(Arc::new(move |x, y| {
                let u = x * x + y * y;
                let d1 = dpsi_h(u);
                let d2 = d2psi(u);
                [
                    2.0 * d1 + 4.0 * d2 * x * x,
                    4.0 * d2 * x * y,
                    2.0 * d1 + 4.0 * d2 * y * y,
                ]
            })),
            fd_step: fd_step(patch_radius),
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        match &self.grad {
            Some(g) => g(x, y),
            None => {
                let s = self.fd_step;
                [
                    (self.value(x + s, y) - self.value(x - s, y)) / (2.0 * s),
                    (self.value(x, y + s) - self.value(x, y - s)) / (2.0 * s),
                ]
            }
        }
    }

    /// Hessian as `[d_xx, d_xy, d_yy]`.
    pub fn hess(&self, x: f64, y: f64) -> [f64; 3] {
        match &self.hess {
            Some(h) => h(x, y),
            None => {
                let s = self.fd_step;
                let f = |x, y| self.value(x, y);
                let fxx = (f(x + s, y) - 2.0 * f(x, y) + f(x - s, y)) / (s * s);
                let fyy = (f(x, y + s) - 2.0 * f(x, y) + f(x, y - s)) / (s * s);
                let fxy = (f(x + s, y + s) - f(x + s, y - s) - f(x - s, y + s)
                    + f(x - s, y - s))
                    / (4.0 * s * s);
                [fxx, fxy, fyy]
            }
        }
    }
}

fn fd_step(patch_radius: f64) -> f64 {
    (1e-6 * patch_radius).max(f64::EPSILON.sqrt() * patch_radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    General,
    SphereSphere,
    Radial,
}

/// A gap configuration: two profiles, minimal gap `h` and patch radius `l`.
#[derive(Debug, Clone)]
pub struct GapGeometry {
    pub gamma_t: Profile,
    pub gamma_b: Profile,
    pub h: f64,
    pub l: f64,
    pub kind: GeometryKind,
}

/// Pointwise profile sample returned by [`eval_gap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSample {
    pub gamma_t: f64,
    pub gamma_b: f64,
    pub gamma: f64,
}

impl GapGeometry {
    pub fn new(gamma_t: Profile, gamma_b: Profile, h: f64, l: f64, kind: GeometryKind) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGeometry(format!("h must be positive, got {h}")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidGeometry(format!("patch radius must be positive, got {l}")));
        }
        Ok(GapGeometry { gamma_t, gamma_b, h, l, kind })
    }

    /// Gap width without the domain check; callers that stay on the grid use this.
    pub fn gamma(&self, x: f64, y: f64) -> f64 {
        self.h + self.gamma_t.value(x, y) - self.gamma_b.value(x, y)
    }

    pub fn grad_gamma(&self, x: f64, y: f64) -> [f64; 2] {
        let gt = self.gamma_t.grad(x, y);
        let gb = self.gamma_b.grad(x, y);
        [gt[0] - gb[0], gt[1] - gb[1]]
    }
}

/// Evaluates both profiles and the gap width at a point of the patch.
pub fn eval_gap(geom: &GapGeometry, x: f64, y: f64) -> Result<GapSample> {
    let r2 = x * x + y * y;
    if r2 > geom.l * geom.l * (1.0 + 1e-12) {
        return Err(Error::OutOfDomain(format!(
            "({x}, {y}) lies outside the disk of radius {}",
            geom.l
        )));
    }
    let gamma_t = geom.gamma_t.value(x, y);
    let gamma_b = geom.gamma_b.value(x, y);
    Ok(GapSample {
        gamma_t,
        gamma_b,
        gamma: geom.h + gamma_t - gamma_b,
    })
}

/// Sphere-sphere gap: body sphere of radius `s` above a container sphere of
/// radius `r`, separated by `h` over a patch of radius `l`.
///
/// The derived radii satisfy `1/r1 = 1/r + 1/s` and `1/r3^3 = 1/r^3 + 1/s^3`.
#[derive(Debug, Clone, Copy)]
pub struct SphereGap {
    pub container_radius: f64,
    pub body_radius: f64,
    pub h: f64,
    pub patch_radius: f64,
    pub r1: f64,
    pub r3: f64,
}

/// Builds a sphere-sphere gap, checking positivity and the patch bound.
pub fn make_sphere_gap(r: f64, s: f64, h: f64, l: f64) -> Result<SphereGap> {
    for (name, v) in [("R", r), ("S", s), ("h", h), ("L", l)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "{name} must be finite and positive, got {v}"
            )));
        }
    }
    if l >= r.min(s) {
        return Err(Error::ProfileDomain(format!(
            "patch radius {l} must be smaller than min(R, S) = {}",
            r.min(s)
        )));
    }
    let r1 = 1.0 / (1.0 / r + 1.0 / s);
    let r3 = (1.0 / (1.0 / (r * r * r) + 1.0 / (s * s * s))).cbrt();
    Ok(SphereGap {
        container_radius: r,
        body_radius: s,
        h,
        patch_radius: l,
        r1,
        r3,
    })
}

impl SphereGap {
    /// Exact profiles (never their Taylor truncations):
    /// `gamma_t(r) = S - sqrt(S^2 - r^2)` and `gamma_b(r) = -R + sqrt(R^2 - r^2)`.
    pub fn geometry(&self) -> GapGeometry {
        let s = self.body_radius;
        let r = self.container_radius;
        let top = Profile::radial(
            move |u| s - (s * s - u).sqrt(),
            move |u| 0.5 / (s * s - u).sqrt(),
            move |u| 0.25 / (s * s - u).powf(1.5),
            self.patch_radius,
        );
        let bottom = Profile::radial(
            move |u| -r + (r * r - u).sqrt(),
            move |u| -0.5 / (r * r - u).sqrt(),
            move |u| -0.25 / (r * r - u).powf(1.5),
            self.patch_radius,
        );
        GapGeometry {
            gamma_t: top,
            gamma_b: bottom,
            h: self.h,
            l: self.patch_radius,
            kind: GeometryKind::SphereSphere,
        }
    }

    pub fn gamma(&self, radius: f64) -> f64 {
        let s = self.body_radius;
        let r = self.container_radius;
        self.h + (s - (s * s - radius * radius).sqrt()) + (r - (r * r - radius * radius).sqrt())
    }

    /// Same gap at a different separation.
    pub fn with_h(&self, h: f64) -> Result<SphereGap> {
        make_sphere_gap(self.container_radius, self.body_radius, h, self.patch_radius)
    }
}

/// Grid-sampled estimates of the contact constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    /// Lower bound of the gap Laplacian over the grid.
    pub c_cvx: f64,
    /// Smallest sampled `(gamma - h) / r^2`; cells with `r < l/100` excluded.
    pub c_ell: f64,
    /// `c_reg[k]` bounds the k-th derivatives of both profiles, k = 0..=k_max.
    pub c_reg: Vec<f64>,
    /// `|grad gamma_t(0)| + |grad gamma_b(0)|`, should vanish.
    pub a1_residual: f64,
    /// Smallest eigenvalue of `Hess(gamma_t - gamma_b)` over the grid.
    pub a2_min_eigenvalue: f64,
}

/// Samples the contact assumptions over a grid and reports the constants.
///
/// Fails with a degenerate-contact error when the Hessian difference loses
/// positivity anywhere on the patch.
pub fn validate_contact(geom: &GapGeometry, grid: &PolarGrid, k_max: usize) -> Result<ConstantsReport> {
    if k_max > 3 {
        return Err(Error::InvalidParameter(format!("k_max must be <= 3, got {k_max}")));
    }
    if grid.l < geom.l * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(
            "grid must cover the full patch disk".into(),
        ));
    }

    let g0t = geom.gamma_t.grad(0.0, 0.0);
    let g0b = geom.gamma_b.grad(0.0, 0.0);
    let a1_residual = g0t[0].hypot(g0t[1]) + g0b[0].hypot(g0b[1]);

    let mut c_cvx = f64::INFINITY;
    let mut c_ell = f64::INFINITY;
    let mut a2_min = f64::INFINITY;
    let mut bad_gamma_at = None;
    let mut c_reg = vec![0.0_f64; k_max + 1];
    let ell_cut = geom.l / 100.0;

    for i in 0..grid.n_r {
        let r = grid.r_center(i);
        for j in 0..grid.n_theta {
            let th = grid.theta(j);
            let (x, y) = (r * th.cos(), r * th.sin());
            let ht = geom.gamma_t.hess(x, y);
            let hb = geom.gamma_b.hess(x, y);
            let d = [ht[0] - hb[0], ht[1] - hb[1], ht[2] - hb[2]];
            // eigenvalues of the symmetric 2x2 [d0 d1; d1 d2]
            let tr = d[0] + d[2];
            let det = d[0] * d[2] - d[1] * d[1];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            a2_min = a2_min.min(tr / 2.0 - disc);
            c_cvx = c_cvx.min(tr); // Laplacian of gamma = trace of the Hessian difference

            let gamma = geom.gamma(x, y);
            if (!gamma.is_finite() || gamma <= 0.0) && bad_gamma_at.is_none() {
                bad_gamma_at = Some((x, y, gamma));
            }

            if r > ell_cut {
                c_ell = c_ell.min((gamma - geom.h) / (r * r));
            }

            let gt = geom.gamma_t.grad(x, y);
            let gb = geom.gamma_b.grad(x, y);
            for (k, slot) in c_reg.iter_mut().enumerate() {
                let bound = match k {
                    0 => geom.gamma_t.value(x, y).abs() + geom.gamma_b.value(x, y).abs(),
                    1 => gt[0].hypot(gt[1]) + gb[0].hypot(gb[1]),
                    2 => frob3(ht) + frob3(hb),
                    _ => third_deriv_bound(geom, x, y),
                };
                *slot = slot.max(bound);
            }
        }
    }

    if a2_min <= 0.0 {
        return Err(Error::DegenerateContact(format!(
            "Hessian difference is not positive definite (min eigenvalue {a2_min:.3e})"
        )));
    }
    if c_cvx <= 0.0 || c_ell <= 0.0 {
        return Err(Error::DegenerateContact(format!(
            "contact constants not positive (C_cvx = {c_cvx:.3e}, C_ell = {c_ell:.3e})"
        )));
    }
    if let Some((x, y, gamma)) = bad_gamma_at {
        return Err(Error::InvalidGeometry(format!(
            "gap width is not positive at ({x}, {y}): {gamma}"
        )));
    }
    Ok(ConstantsReport {
        c_cvx,
        c_ell,
        c_reg,
        a1_residual,
        a2_min_eigenvalue: a2_min,
    })
}

fn frob3(h: [f64; 3]) -> f64 {
    (h[0] * h[0] + 2.0 * h[1] * h[1] + h[2] * h[2]).sqrt()
}

fn third_deriv_bound(geom: &GapGeometry, x: f64, y: f64) -> f64 {
    // crude bound by differencing the Hessians; only used for reporting
    let s = fd_step(geom.l) * 100.0;
    let mut bound: f64 = 0.0;
    for p in [&geom.gamma_t, &geom.gamma_b] {
        let hx_p = p.hess(x + s, y);
        let hx_m = p.hess(x - s, y);
        let hy_p = p.hess(x, y + s);
        let hy_m = p.hess(x, y - s);
        let dx = [
            (hx_p[0] - hx_m[0]) / (2.0 * s),
            (hx_p[1] - hx_m[1]) / (2.0 * s),
            (hx_p[2] - hx_m[2]) / (2.0 * s),
        ];
        let dy = [
            (hy_p[0] - hy_m[0]) / (2.0 * s),
            (hy_p[1] - hy_m[1]) / (2.0 * s),
            (hy_p[2] - hy_m[2]) / (2.0 * s),
        ];
        bound += (frob3(dx) * frob3(dx) + frob3(dy) * frob3(dy)).sqrt();
    }
    bound
}

/// Lubrication rescaling `(x, y, z) -> (x / sqrt(h), y / sqrt(h), z / h)`.
pub fn to_lub_coordinates(x: f64, y: f64, z: f64, h: f64) -> Result<(f64, f64, f64)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let sq = h.sqrt();
    Ok((x / sq, y / sq, z / h))
}

/// Inverse of [`to_lub_coordinates`].
pub fn from_lub_coordinates(xt: f64, yt: f64, zt: f64, h: f64) -> Result<(f64, f64, f64)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let sq = h.sqrt();
    Ok((xt * sq, yt * sq, zt * h))
}

/// JSON description of a geometry.
///
/// Either `{"kind": "sphere", "R": .., "S": .., "h": .., "L": ..}` or
/// `{"kind": "radial_poly", "coeffs_t": [..], "coeffs_b": [..], "h": .., "L": ..}`
/// where `coeffs_t[k]` multiplies `(r^2)^{k+1}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum GeometrySpec {
    #[serde(rename = "sphere")]
    Sphere {
        #[serde(rename = "R")]
        r: f64,
        #[serde(rename = "S")]
        s: f64,
        h: f64,
        #[serde(rename = "L")]
        l: f64,
    },
    #[serde(rename = "radial_poly")]
    RadialPoly {
        coeffs_t: Vec<f64>,
        coeffs_b: Vec<f64>,
        h: f64,
        #[serde(rename = "L")]
        l: f64,
    },
}

impl GeometrySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidGeometry(format!("geometry JSON: {e}")))
    }

    pub fn h(&self) -> f64 {
        match self {
            GeometrySpec::Sphere { h, .. } | GeometrySpec::RadialPoly { h, .. } => *h,
        }
    }

    pub fn with_h(&self, h: f64) -> GeometrySpec {
        let mut spec = self.clone();
        match &mut spec {
            GeometrySpec::Sphere { h: slot, .. } | GeometrySpec::RadialPoly { h: slot, .. } => {
                *slot = h
            }
        }
        spec
    }

    /// The sphere parameters when this spec is a sphere gap.
    pub fn sphere(&self) -> Option<Result<SphereGap>> {
        match self {
            GeometrySpec::Sphere { r, s, h, l } => Some(make_sphere_gap(*r, *s, *h, *l)),
            GeometrySpec::RadialPoly { .. } => None,
        }
    }

    pub fn build(&self) -> Result<GapGeometry> {
        match self {
            GeometrySpec::Sphere { r, s, h, l } => Ok(make_sphere_gap(*r, *s, *h, *l)?.geometry()),
            GeometrySpec::RadialPoly { coeffs_t, coeffs_b, h, l } => {
                if !(*h > 0.0) || !(*l > 0.0) {
                    return Err(Error::InvalidGeometry(
                        "radial_poly requires positive h and L".into(),
                    ));
                }
                let top = radial_poly_profile(coeffs_t.clone(), *l);
                let bottom = radial_poly_profile(coeffs_b.clone(), *l);
                GapGeometry::new(top, bottom, *h, *l, GeometryKind::Radial)
            }
        }
    }
}

// psi(u) = sum_k c_k u^{k+1}, u = r^2
fn radial_poly_profile(coeffs: Vec<f64>, l: f64) -> Profile {
    let c0 = coeffs.clone();
    let c1 = coeffs.clone();
    let c2 = coeffs;
    let psi = move |u: f64| {
        let mut acc = 0.0;
        let mut pw = u;
        for c in &c0 {
            acc += c * pw;
            pw *= u;
        }
        acc
    };
    let dpsi = move |u: f64| {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for (k, c) in c1.iter().enumerate() {
            acc += c * (k as f64 + 1.0) * pw;
            pw *= u;
        }
        acc
    };
    let d2psi = move |u: f64| {
        let mut acc = 0.0;
        let mut pw = 1.0;
        for (k, c) in c2.iter().enumerate().skip(1) {
            acc += c * (k as f64 + 1.0) * k as f64 * pw;
            pw *= u;
        }
        acc
    };
    Profile::radial(psi, dpsi, d2psi, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_fallback_matches_analytic_derivatives() {
        let exact = Profile::radial(|u| u + 0.25 * u * u, |u| 1.0 + 0.5 * u, |_| 0.5, 1.0);
        let fd = Profile::new(|x, y| {
            let u = x * x + y * y;
            u + 0.25 * u * u
        }, 1.0);
        for (x, y) in [(0.3, -0.2), (0.0, 0.7), (0.5, 0.5)] {
            let ga = exact.grad(x, y);
            let gf = fd.grad(x, y);
            assert!((ga[0] - gf[0]).abs() < 1e-7 && (ga[1] - gf[1]).abs() < 1e-7);
            let ha = exact.hess(x, y);
            let hf = fd.hess(x, y);
            for k in 0..3 {
                assert!((ha[k] - hf[k]).abs() < 1e-4, "hess[{k}] at ({x},{y})");
            }
        }
    }

    #[test]
    fn geometry_spec_json_round_trip() {
        let text = r#"{"kind":"sphere","R":2.0,"S":1.5,"h":0.01,"L":0.8}"#;
        let spec = GeometrySpec::from_json(text).unwrap();
        let again: GeometrySpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.h(), 0.01);
        assert_eq!(spec.with_h(0.5).h(), 0.5);
        assert!(spec.sphere().is_some());

        assert!(GeometrySpec::from_json(r#"{"kind":"torus"}"#).is_err());
    }

    #[test]
    fn radial_poly_derivatives() {
        // gamma_t = r^2 - 0.1 r^4
        let spec = GeometrySpec::from_json(
            r#"{"kind":"radial_poly","coeffs_t":[1.0,-0.1],"coeffs_b":[],"h":0.2,"L":1.0}"#,
        )
        .unwrap();
        let geom = spec.build().unwrap();
        let (x, y) = (0.4, -0.3);
        let u: f64 = x * x + y * y;
        assert!((geom.gamma_t.value(x, y) - (u - 0.1 * u * u)).abs() < 1e-14);
        let g = geom.gamma_t.grad(x, y);
        let dpsi = 1.0 - 0.2 * u;
        assert!((g[0] - 2.0 * dpsi * x).abs() < 1e-14);
        assert!((g[1] - 2.0 * dpsi * y).abs() < 1e-14);
        let hess = geom.gamma_t.hess(x, y);
        let d2 = -0.2;
        assert!((hess[0] - (2.0 * dpsi + 4.0 * d2 * x * x)).abs() < 1e-14);
        assert!((hess[1] - 4.0 * d2 * x * y).abs() < 1e-14);
        assert!((hess[2] - (2.0 * dpsi + 4.0 * d2 * y * y)).abs() < 1e-14);
    }
}
