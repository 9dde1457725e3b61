//! Adaptive Simpson quadrature for the 1D radial integrals.

use crate::error::{Error, Result};

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(rel_tol > 0.0) {
        return Err(Error::Integration(format!("tolerance must be positive, got {rel_tol}")));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::Integration("integrand is not finite".into()));
    }
    // seed the absolute scale from a composite pass so sharp interior peaks
    // do not get lost in the tolerance budget
    let panels = 256;
    let hstep = (b - a) / panels as f64;
    let mut coarse = 0.0;
    for k in 0..panels {
        let x0 = a + k as f64 * hstep;
        coarse += simpson(x0, x0 + hstep, f(x0), f(x0 + 0.5 * hstep), f(x0 + hstep));
    }
    if !coarse.is_finite() {
        return Err(Error::Integration("integrand is not finite".into()));
    }
    let whole = simpson(a, b, fa, fm, fb);
    let scale = coarse.abs().max(1e-300);
    let v = recurse(f, a, m, b, fa, fm, fb, whole, rel_tol * scale, 60)?;
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: usize,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::Integration(format!(
            "integrand is not finite inside [{a}, {b}]"
        )));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Integration(format!(
            "recursion limit reached on [{a}, {b}] (delta {delta:.3e})"
        )));
    }
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    let lv = recurse(f, a, lm, m, fa, flm, fm, left, eps / 2.0, depth - 1)?;
    let rv = recurse(f, m, rm, b, fm, frm, fb, right, eps / 2.0, depth - 1)?;
    Ok(lv + rv)
}
