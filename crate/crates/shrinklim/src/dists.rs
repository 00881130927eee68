//! Non-negative probability distributions: CDF, quantile, sampling, and
//! Stieltjes integration against shifted laws.

use std::io::BufRead;

use rand::Rng;
use statrs::function::erf::{erf, erf_inv, erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::quad;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A probability law on the non-negative half-line.
///
/// `Tabulated` holds a CDF sampled on a strictly increasing grid; values are
/// interpolated piecewise-linearly between grid points, with a jump at the
/// first grid point when its CDF value is positive.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Exponential { rate: f64 },
    HalfNormal,
    Tabulated { xs: Vec<f64>, fs: Vec<f64> },
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::domain(format!(
                "exponential rate must be > 0, got {rate}"
            )));
        }
        Ok(Distribution::Exponential { rate })
    }

    pub fn half_normal() -> Self {
        Distribution::HalfNormal
    }

    /// Build a tabulated CDF from `(x, F(x))` pairs. The x column must be
    /// strictly increasing and non-negative, the F column non-decreasing in
    /// `[0, 1]` and reaching 1 at the last point.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("tabulated CDF needs at least one point"));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut fs = Vec::with_capacity(points.len());
        for (i, &(x, f)) in points.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::domain(format!("grid point {x} outside [0, inf)")));
            }
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::domain(format!("CDF value {f} outside [0, 1]")));
            }
            if i > 0 {
                if x <= xs[i - 1] {
                    return Err(Error::domain("x column must be strictly increasing"));
                }
                if f < fs[i - 1] {
                    return Err(Error::domain("F column must be non-decreasing"));
                }
            }
            xs.push(x);
            fs.push(f);
        }
        let last = *fs.last().unwrap();
        if (last - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "tabulated CDF must reach 1, got {last}"
            )));
        }
        *fs.last_mut().unwrap() = 1.0;
        Ok(Distribution::Tabulated { xs, fs })
    }

    /// Load a tabulated CDF from CSV with header `x,F`.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.eq_ignore_ascii_case("x,f") {
                continue;
            }
            let mut parts = line.split(',');
            let x = parse_field(parts.next(), lineno)?;
            let f = parse_field(parts.next(), lineno)?;
            points.push((x, f));
        }
        Distribution::tabulated(points)
    }

    /// F(x). Total on the reals: negative arguments return 0.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Distribution::Exponential { rate } => -(-rate * x).exp_m1(),
            Distribution::HalfNormal => erf(x / SQRT_2),
            Distribution::Tabulated { xs, fs } => {
                if x < xs[0] {
                    0.0
                } else if x >= *xs.last().unwrap() {
                    1.0
                } else {
                    let j = xs.partition_point(|&g| g <= x);
                    let (x0, x1) = (xs[j - 1], xs[j]);
                    let (f0, f1) = (fs[j - 1], fs[j]);
                    f0 + (f1 - f0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    /// 1 - F(x), computed without cancellation for the closed-form laws.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match self {
            Distribution::Exponential { rate } => (-rate * x).exp(),
            Distribution::HalfNormal => erfc(x / SQRT_2),
            Distribution::Tabulated { .. } => 1.0 - self.cdf(x),
        }
    }

    /// Generalized inverse `inf { x : F(x) >= p }` for `0 <= p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(format!(
                "quantile requires 0 <= p < 1, got {p}"
            )));
        }
        Ok(self.quantile_unit(p))
    }

    fn quantile_unit(&self, p: f64) -> f64 {
        match self {
            Distribution::Exponential { rate } => -(-p).ln_1p() / rate,
            Distribution::HalfNormal => SQRT_2 * erf_inv(p),
            Distribution::Tabulated { xs, fs } => {
                if p == 0.0 {
                    return 0.0;
                }
                if p <= fs[0] {
                    return xs[0];
                }
                // first j with fs[j] >= p; fs[j-1] < p so the segment rises
                let j = fs.partition_point(|&f| f < p);
                if j >= fs.len() {
                    return *xs.last().unwrap();
                }
                let (x0, x1) = (xs[j - 1], xs[j]);
                let (f0, f1) = (fs[j - 1], fs[j]);
                x0 + (x1 - x0) * (p - f0) / (f1 - f0)
            }
        }
    }

    /// `inf { x : 1 - F(x) <= s }`, accurate deep in the tail.
    pub fn quantile_from_survival(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        match self {
            Distribution::Exponential { rate } => -s.ln() / rate,
            Distribution::HalfNormal => SQRT_2 * erfc_inv(s),
            Distribution::Tabulated { .. } => self.quantile_unit(1.0 - s),
        }
    }

    /// Truncation point for improper integrals: beyond it the law carries at
    /// most `mass` probability.
    pub fn tail_point(&self, mass: f64) -> f64 {
        self.quantile_from_survival(mass.clamp(1e-300, 1.0))
    }

    /// One inverse-CDF draw. All kinds sample through the quantile so runs
    /// are seed-reproducible across platforms.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unit(rng.gen::<f64>())
    }

    /// `count` i.i.d. draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// Density at `x` for the closed-form laws.
    fn density(&self, x: f64) -> f64 {
        match self {
            Distribution::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Distribution::HalfNormal => {
                if x < 0.0 {
                    0.0
                } else {
                    (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * x * x).exp()
                }
            }
            Distribution::Tabulated { .. } => unreachable!("tabulated laws integrate cell-wise"),
        }
    }

    /// Stieltjes integral of `g(x)` against `dF(x + r)` over `x` in
    /// `[lo, hi]`, `lo >= 0`.
    ///
    /// Closed-form laws go through adaptive quadrature of `g(x) f(x + r)`;
    /// tabulated laws sum slope-weighted cell integrals plus the jump at the
    /// first grid point.
    pub fn stieltjes_shifted<F: Fn(f64) -> f64>(
        &self,
        r: f64,
        lo: f64,
        hi: f64,
        g: F,
        tol: f64,
    ) -> Result<f64> {
        let lo = lo.max(0.0);
        if !(hi > lo) {
            return Ok(0.0);
        }
        match self {
            Distribution::Exponential { .. } | Distribution::HalfNormal => {
                quad::integrate(|x| g(x) * self.density(x + r), lo, hi, tol)
            }
            Distribution::Tabulated { xs, fs } => {
                let mut total = 0.0;
                // jump of size fs[0] at the first grid point
                if fs[0] > 0.0 {
                    let xj = xs[0] - r;
                    let at_origin = lo == 0.0 && xj == 0.0;
                    if (xj > lo && xj <= hi) || at_origin {
                        total += fs[0] * g(xj);
                    }
                }
                let cells = xs.len().saturating_sub(1).max(1);
                let cell_tol = tol / cells as f64;
                for i in 0..xs.len().saturating_sub(1) {
                    let a = (xs[i] - r).max(lo);
                    let b = (xs[i + 1] - r).min(hi);
                    if b <= a {
                        continue;
                    }
                    let slope = (fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
                    if slope == 0.0 {
                        continue;
                    }
                    total += slope * quad::integrate(&g, a, b, cell_tol)?;
                }
                Ok(total)
            }
        }
    }

    /// As [`stieltjes_shifted`](Self::stieltjes_shifted) but with the upper
    /// limit chosen so the neglected shifted tail carries at most `tail_mass`.
    pub fn stieltjes_shifted_tail<F: Fn(f64) -> f64>(
        &self,
        r: f64,
        lo: f64,
        tail_mass: f64,
        g: F,
        tol: f64,
    ) -> Result<f64> {
        let hi = self.tail_point(tail_mass) - r;
        self.stieltjes_shifted(r, lo, hi, g, tol)
    }
}

fn parse_field(field: Option<&str>, lineno: usize) -> Result<f64> {
    field
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Csv(format!("line {}: expected two columns", lineno + 1)))?
        .parse::<f64>()
        .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 1)))
}
