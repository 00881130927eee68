//! Adaptive Simpson quadrature and a bracketed bisection solver.

use crate::error::{Error, Result};

/// Hard cap on recursion depth; 2^60 subintervals is far beyond anything
/// a smooth bounded integrand should need.
const MAX_DEPTH: u32 = 60;

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let fc = f(c);
    let s = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    (c, fc, s)
}

#[allow(clippy::too_many_arguments)] // cached f-evaluations ride along
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    c: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (cl, fcl, left) = simpson(f, a, fa, c, fc);
    let (cr, fcr, right) = simpson(f, c, fc, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureBudget { lo: a, hi: b });
    }
    let half = 0.5 * tol;
    Ok(adapt(f, a, fa, c, fc, cl, fcl, left, half, depth + 1)?
        + adapt(f, c, fc, b, fb, cr, fcr, right, half, depth + 1)?)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first split into eight equal panels so that localized
/// features cannot hide between the initial sample points; each panel is
/// then refined adaptively. Empty or inverted intervals integrate to zero.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    const PANELS: usize = 8;
    let panel_tol = tol / PANELS as f64;
    let mut total = 0.0;
    let mut lo = a;
    let mut flo = f(a);
    for i in 1..=PANELS {
        let hi = a + (b - a) * i as f64 / PANELS as f64;
        let fhi = f(hi);
        let (c, fc, whole) = simpson(&f, lo, flo, hi, fhi);
        total += adapt(&f, lo, flo, hi, fhi, c, fc, whole, panel_tol, 0)?;
        lo = hi;
        flo = fhi;
    }
    Ok(total)
}

/// Bisection on `[lo, hi]` for a root of `f`, which must change sign on the
/// bracket. Refines until the bracket width drops below `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::SolverFailure(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
