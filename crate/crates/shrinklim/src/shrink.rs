//! The shrinking map `x -> max(0, x - r)`, the law of a shrunken variable,
//! and exact Laplace transforms of shrunken sums.

use crate::dists::Distribution;
use crate::error::{Error, Result};

/// Default absolute quadrature tolerance for transform integrals.
pub const LAPLACE_QUAD_TOL: f64 = 1e-12;
/// Neglected shifted-tail mass in transform integrals.
pub const LAPLACE_TAIL_MASS: f64 = 1e-13;

/// `max(0, x - level)`: keep only the excess above `level`.
#[inline]
pub fn shrink(x: f64, level: f64) -> f64 {
    (x - level).max(0.0)
}

/// The law of `shrink(X, r)` for `X ~ base`: CDF `F(x + r)` on the
/// half-line, with an atom of mass `F(r)` at zero.
#[derive(Debug, Clone)]
pub struct ShrunkenLaw {
    pub base: Distribution,
    pub r: f64,
}

impl ShrunkenLaw {
    pub fn new(base: Distribution, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("shrink level must be >= 0, got {r}")));
        }
        Ok(ShrunkenLaw { base, r })
    }

    /// CDF of the shrunken variable: `F(x + r)` for `x >= 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.base.cdf(x + self.r)
        }
    }

    /// Mass of the atom at zero, `F(r)`.
    pub fn atom(&self) -> f64 {
        self.base.cdf(self.r)
    }

    /// Laplace transform `E[exp(-t shrink(X, r))]`.
    ///
    /// Closed form `1 - exp(-lambda r) t / (lambda + t)` for the exponential
    /// base; quadrature of `1 - int (1 - e^{-tx}) dF(x + r)` otherwise.
    pub fn laplace(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("laplace requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        match self.base {
            Distribution::Exponential { rate } => Ok(1.0 - (-rate * self.r).exp() * t / (rate + t)),
            _ => self.laplace_quadrature(t),
        }
    }

    /// Quadrature route for the transform, available for every base law.
    /// Cross-checks the exponential closed form.
    pub fn laplace_quadrature(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("laplace requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let integral = self.base.stieltjes_shifted_tail(
            self.r,
            0.0,
            LAPLACE_TAIL_MASS,
            |x| -(-t * x).exp_m1(),
            LAPLACE_QUAD_TOL,
        )?;
        Ok(1.0 - integral)
    }

    /// Laplace transform of `S_n`, the sum of `n` i.i.d. shrunken variables:
    /// `laplace(t)^n`, evaluated as `exp(n ln ...)` so it survives large `n`.
    pub fn laplace_sum(&self, n: u64, t: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("laplace_sum requires n >= 1"));
        }
        let phi = self.laplace(t)?;
        Ok((n as f64 * phi.ln()).exp())
    }
}
