//! The finite measures `G_n`, the auxiliary functions `H_n`/`H`, functional
//! equation residuals, the admissible-family fit, and the reassembly of `G`
//! from a fitted `H`.

use std::io::{BufRead, Write};

use crate::dists::Distribution;
use crate::error::{Error, Result};
use crate::norming::NormalizingSequence;
use crate::quad;

/// A function tabulated on a strictly increasing grid, with total mass for
/// measure-type functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFn {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub total_mass: f64,
}

impl TabulatedFn {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, total_mass: f64) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::domain(
                "grid and values must be non-empty and equal length",
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        Ok(TabulatedFn {
            grid,
            values,
            total_mass,
        })
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.grid[0] <= lo && *self.grid.last().unwrap() >= hi
    }

    /// Linear interpolation; errors outside the grid.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let last = *self.grid.last().unwrap();
        if x < self.grid[0] || x > last {
            return Err(Error::domain(format!(
                "x = {x} outside tabulated range [{}, {last}]",
                self.grid[0]
            )));
        }
        if x == last {
            return Ok(*self.values.last().unwrap());
        }
        let j = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[j - 1], self.grid[j]);
        let (v0, v1) = (self.values[j - 1], self.values[j]);
        Ok(v0 + (v1 - v0) * (x - x0) / (x1 - x0))
    }

    /// CSV with header `x,value`; total mass on a `#`-comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# total_mass,{}", self.total_mass)?;
        writeln!(w, "x,value")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut total_mass = 0.0;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.eq_ignore_ascii_case("x,value") {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("total_mass,") {
                    total_mass = v
                        .trim()
                        .parse()
                        .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))?;
                }
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.map(str::trim)
                    .ok_or_else(|| Error::Csv(format!("line {}: expected x,value", lineno + 1)))?
                    .parse()
                    .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))
            };
            grid.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        TabulatedFn::new(grid, values, total_mass)
    }
}

/// `G_n(y) = n int_0^y (1 - e^{-x}) dF(x + r_n)` on the given grid.
///
/// `total_mass` is the value at the last grid point plus the remaining tail
/// integral. Quadrature tolerances are scaled by `n` so the n-fold
/// amplification stays below 1e-10 overall.
pub fn compute_gn(
    d: &Distribution,
    seq: &NormalizingSequence,
    n: u64,
    grid: &[f64],
) -> Result<TabulatedFn> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if grid.is_empty() || grid[0] < 0.0 {
        return Err(Error::domain("grid must be non-empty and within [0, inf)"));
    }
    let r = seq.r(n)?;
    let nf = n as f64;
    let ncells = grid.len() as f64;
    let cell_tol = 1e-11 / (nf * ncells);
    let weight = |x: f64| -(-x).exp_m1();

    let mut values = Vec::with_capacity(grid.len());
    let mut acc = nf * d.stieltjes_shifted(r, 0.0, grid[0], weight, cell_tol)?;
    values.push(acc);
    for w in grid.windows(2) {
        acc += nf * d.stieltjes_shifted(r, w[0], w[1], weight, cell_tol)?;
        values.push(acc);
    }
    let tail =
        nf * d.stieltjes_shifted_tail(r, *grid.last().unwrap(), 1e-12 / nf, weight, cell_tol)?;
    TabulatedFn::new(grid.to_vec(), values, acc + tail)
}

/// `H_n(u) = int_1^u (1 - e^{-x})^{-1} dG_n(x)`, read off a tabulated `G_n`.
///
/// Within each cell `G_n` is linear, so the weight integrates exactly via
/// the antiderivative `ln(e^x - 1)`.
pub fn compute_hn(gn: &TabulatedFn, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::domain(format!("compute_hn requires u > 0, got {u}")));
    }
    let (lo, hi, sign) = if u >= 1.0 {
        (1.0, u, 1.0)
    } else {
        (u, 1.0, -1.0)
    };
    if !gn.covers(lo, hi) {
        return Err(Error::domain(format!(
            "G_n grid [{}, {}] does not cover [{lo}, {hi}]",
            gn.grid[0],
            gn.grid.last().unwrap()
        )));
    }
    if lo == hi {
        return Ok(0.0);
    }
    // antiderivative of 1/(1 - e^{-x}), stable for all x > 0
    let anti = |x: f64| x + (-(-x).exp()).ln_1p();
    let mut total = 0.0;
    for i in 0..gn.grid.len() - 1 {
        let a = gn.grid[i].max(lo);
        let b = gn.grid[i + 1].min(hi);
        if b <= a {
            continue;
        }
        let slope = (gn.values[i + 1] - gn.values[i]) / (gn.grid[i + 1] - gn.grid[i]);
        total += slope * (anti(b) - anti(a));
    }
    Ok(sign * total)
}

/// Pre-limit of `H` by the direct route: `n (F(u + r_n) - F(1 + r_n))`.
pub fn compute_h_direct(
    d: &Distribution,
    seq: &NormalizingSequence,
    n: u64,
    u: f64,
) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::domain(format!(
            "compute_h_direct requires u > 0, got {u}"
        )));
    }
    let r = seq.r(n)?;
    Ok(n as f64 * (d.cdf(u + r) - d.cdf(1.0 + r)))
}

/// Max residual of the translation equation `H(u + w) = H(u) + H(1 + w)`
/// over the grid.
pub fn check_translation_equation<H: Fn(f64) -> f64>(h: H, w: f64, u_grid: &[f64]) -> f64 {
    u_grid
        .iter()
        .map(|&u| (h(u + w) - h(u) - h(1.0 + w)).abs())
        .fold(0.0, f64::max)
}

/// Max residual of the scaled equation
/// `H(u + shift) = H(u) / ratio_b + H(1 + shift)` over the grid.
pub fn check_scaled_equation<H: Fn(f64) -> f64>(
    h: H,
    shift: f64,
    ratio_b: f64,
    u_grid: &[f64],
) -> f64 {
    u_grid
        .iter()
        .map(|&u| (h(u + shift) - h(u) / ratio_b - h(1.0 + shift)).abs())
        .fold(0.0, f64::max)
}

/// Max residual of the Pexider-type equation
/// `f(x + y) = phi(y) f(x) + psi(y)` over the grid pairs.
pub fn verify_pexider<F, P, Q>(f: F, phi: P, psi: Q, xs: &[f64], ys: &[f64]) -> f64
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let mut worst: f64 = 0.0;
    for &x in xs {
        for &y in ys {
            worst = worst.max((f(x + y) - phi(y) * f(x) - psi(y)).abs());
        }
    }
    worst
}

/// The two admissible solution families for `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HFamily {
    Constant {
        kappa: f64,
    },
    /// `H(u) = alpha (e^{-gamma u} - e^{-gamma})`, `alpha < 0`, `gamma > 0`.
    ExpFamily {
        alpha: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct HFit {
    pub family: HFamily,
    pub residual: f64,
}

/// Least-squares fit of tabulated `H` samples against both admissible
/// families; returns whichever has the smaller RMS residual.
///
/// The exp-family search is one-dimensional: alpha solves linearly for each
/// gamma, and gamma is located by a coarse scan plus golden-section over
/// `ln gamma` in [-6, 6]. Samples must have at least 8 points spanning
/// [0.25, 5].
pub fn fit_h_solution(samples: &TabulatedFn) -> Result<HFit> {
    let us = &samples.grid;
    let hs = &samples.values;
    if us.len() < 8 || us[0] > 0.25 || *us.last().unwrap() < 5.0 {
        return Err(Error::domain(
            "fit needs >= 8 sample points spanning at least [0.25, 5]",
        ));
    }
    let m = us.len() as f64;
    let kappa = hs.iter().sum::<f64>() / m;
    let constant_rms = (hs.iter().map(|h| (h - kappa).powi(2)).sum::<f64>() / m).sqrt();
    let range =
        hs.iter().cloned().fold(f64::MIN, f64::max) - hs.iter().cloned().fold(f64::MAX, f64::min);

    // per-gamma linear solve for alpha, returning (rms, alpha)
    let eval = |ln_gamma: f64| -> (f64, f64) {
        let gamma = ln_gamma.exp();
        let eg = (-gamma).exp();
        let bs: Vec<f64> = us.iter().map(|&u| (-gamma * u).exp() - eg).collect();
        let bb: f64 = bs.iter().map(|b| b * b).sum();
        if bb < 1e-300 {
            return (f64::INFINITY, 0.0);
        }
        let hb: f64 = hs.iter().zip(&bs).map(|(h, b)| h * b).sum();
        let alpha = hb / bb;
        let rss: f64 = hs
            .iter()
            .zip(&bs)
            .map(|(h, b)| (h - alpha * b).powi(2))
            .sum();
        ((rss / m).sqrt(), alpha)
    };

    let mut best_lg = -6.0;
    let mut best = eval(best_lg);
    let steps = 120;
    for i in 1..=steps {
        let lg = -6.0 + 12.0 * i as f64 / steps as f64;
        let e = eval(lg);
        if e.0 < best.0 {
            best = e;
            best_lg = lg;
        }
    }
    // golden-section refinement around the coarse minimum
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_lg - 0.2, best_lg + 0.2);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1).0;
    let mut f2 = eval(x2).0;
    for _ in 0..120 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2).0;
        }
    }
    let lg = 0.5 * (a + b);
    let (exp_rms, alpha) = eval(lg);
    let gamma = lg.exp();

    let exp_admissible = alpha < 0.0;
    let fit = if exp_admissible && exp_rms < constant_rms {
        HFit {
            family: HFamily::ExpFamily { alpha, gamma },
            residual: exp_rms,
        }
    } else {
        HFit {
            family: HFamily::Constant { kappa },
            residual: constant_rms,
        }
    };
    if range > 0.0 && fit.residual > 0.1 * range {
        return Err(Error::IllConditionedFit {
            constant_rms,
            exp_rms,
            range,
        });
    }
    Ok(fit)
}

/// Rebuild `G` from a fitted `H`.
///
/// Exp family: `G(y) = -alpha gamma int_0^y (1 - e^{-x}) e^{-gamma x} dx`.
/// Constant: a point mass at zero whose size comes from the `G_n` limit,
/// not from `H`.
pub fn reconstruct_g_from_h(
    family: &HFamily,
    degenerate_mass: f64,
    grid: &[f64],
) -> Result<TabulatedFn> {
    if grid.is_empty() || grid[0] < 0.0 {
        return Err(Error::domain("grid must be non-empty and within [0, inf)"));
    }
    match *family {
        HFamily::Constant { .. } => {
            let values: Vec<f64> = grid
                .iter()
                .map(|&y| if y > 0.0 { degenerate_mass } else { 0.0 })
                .collect();
            TabulatedFn::new(grid.to_vec(), values, degenerate_mass)
        }
        HFamily::ExpFamily { alpha, gamma } => {
            if !(alpha < 0.0 && gamma > 0.0) {
                return Err(Error::domain("exp family requires alpha < 0 and gamma > 0"));
            }
            let scale = -alpha * gamma;
            let f = |x: f64| -(-x).exp_m1() * (-gamma * x).exp();
            let mut values = Vec::with_capacity(grid.len());
            let mut acc = scale * quad::integrate(f, 0.0, grid[0], 1e-13)?;
            values.push(acc);
            for w in grid.windows(2) {
                acc += scale * quad::integrate(f, w[0], w[1], 1e-13)?;
                values.push(acc);
            }
            let y = *grid.last().unwrap();
            // analytic tail of the integrand beyond the grid
            let tail =
                scale * ((-gamma * y).exp() / gamma - (-(gamma + 1.0) * y).exp() / (gamma + 1.0));
            TabulatedFn::new(grid.to_vec(), values, acc + tail)
        }
    }
}

/// The largest index whose level stays within `c` of `r_n`:
/// `k_n = sup { k >= n : r_k - r_n < c }` for `0 < c < 1`.
pub fn subsequence_index(seq: &NormalizingSequence, n: u64, c: f64) -> Result<u64> {
    if !(c > 0.0) {
        return Err(Error::domain("c must be > 0"));
    }
    let target = seq.r(n)? + c;
    if seq.r(n + 1)? >= target {
        return Ok(n);
    }
    // grow until r_hi >= target, then binary-search the last k below it
    let mut lo = n + 1;
    let mut hi = lo;
    let mut doublings = 0;
    while seq.r(hi)? < target {
        lo = hi;
        hi = hi.saturating_mul(2);
        doublings += 1;
        if doublings > 200 {
            return Err(Error::SolverFailure(
                "subsequence search exceeded 200 doublings".into(),
            ));
        }
    }
    // invariant: r_lo < target <= r_hi
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if seq.r(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Default evaluation grid for `H`: 64 log-spaced points on [0.05, 8] plus
/// the anchor `u = 1`.
pub fn default_u_grid() -> Vec<f64> {
    let mut grid = log_spaced(0.05, 8.0, 64);
    grid.push(1.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
