//! The two admissible limit laws: a point mass, or a compound Poisson law
//! with exponential jumps.

use rand::Rng;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::quad;

/// Poisson tail mass allowed beyond the CDF series truncation; it bounds the
/// CDF truncation error by the same quantity.
const SERIES_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    /// All mass at `c > 0`.
    Degenerate { c: f64 },
    /// Poisson(`intensity`) many i.i.d. Exponential(`rate`) jumps; atom of
    /// mass `exp(-intensity)` at zero, absolutely continuous elsewhere.
    CompoundPoissonExp { intensity: f64, rate: f64 },
}

impl LimitLaw {
    pub fn degenerate(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain(format!(
                "degenerate law needs c > 0, got {c}"
            )));
        }
        Ok(LimitLaw::Degenerate { c })
    }

    pub fn compound_poisson_exp(intensity: f64, rate: f64) -> Result<Self> {
        if !(intensity > 0.0) || !(rate > 0.0) {
            return Err(Error::domain(
                "compound Poisson law needs a > 0 and lambda > 0",
            ));
        }
        Ok(LimitLaw::CompoundPoissonExp { intensity, rate })
    }

    /// `E[exp(-t S)]`: `exp(-ct)` or `exp(a (lambda/(lambda+t) - 1))`.
    pub fn laplace(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("laplace requires t >= 0, got {t}")));
        }
        Ok(match *self {
            LimitLaw::Degenerate { c } => (-c * t).exp(),
            LimitLaw::CompoundPoissonExp { intensity, rate } => {
                (intensity * (rate / (rate + t) - 1.0)).exp()
            }
        })
    }

    /// Mass at exactly zero.
    pub fn atom_at_zero(&self) -> f64 {
        match *self {
            LimitLaw::Degenerate { .. } => 0.0,
            LimitLaw::CompoundPoissonExp { intensity, .. } => (-intensity).exp(),
        }
    }

    /// CDF. The compound Poisson branch sums Poisson-weighted Gamma(k, rate)
    /// CDFs, truncated once the neglected Poisson tail drops below 1e-12.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            LimitLaw::Degenerate { c } => {
                if x >= c {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::CompoundPoissonExp { intensity, rate } => {
                if x == 0.0 {
                    return self.atom_at_zero();
                }
                let mut weight = (-intensity).exp(); // k = 0
                let mut covered = weight;
                let mut total = weight; // Gamma(0) CDF is 1 for x >= 0
                let mut k = 0u32;
                while 1.0 - covered > SERIES_TAIL && k < 10_000 {
                    k += 1;
                    weight *= intensity / k as f64;
                    covered += weight;
                    total += weight * gamma_lr(k as f64, rate * x);
                }
                total.min(1.0)
            }
        }
    }

    /// Left limit of the CDF at `x`. Both laws are continuous except at one
    /// point (zero for the compound Poisson atom, `c` for the point mass),
    /// so this is exact.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::Degenerate { c } => {
                if x > c {
                    1.0
                } else {
                    0.0
                }
            }
            LimitLaw::CompoundPoissonExp { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.cdf(x)
                }
            }
        }
    }

    /// Generalized inverse of the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain(format!(
                "quantile requires 0 <= p < 1, got {p}"
            )));
        }
        match *self {
            LimitLaw::Degenerate { c } => Ok(if p == 0.0 { 0.0 } else { c }),
            LimitLaw::CompoundPoissonExp { .. } => {
                if p <= self.atom_at_zero() {
                    return Ok(0.0);
                }
                let mut hi = 1.0;
                while self.cdf(hi) < p {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return Err(Error::SolverFailure("quantile bracket blew up".into()));
                    }
                }
                quad::bisect(|x| self.cdf(x) - p, 0.0, hi, 1e-10)
            }
        }
    }

    /// One draw: the constant, or Poisson-many exponential jumps.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LimitLaw::Degenerate { c } => c,
            LimitLaw::CompoundPoissonExp { intensity, rate } => {
                let jumps = poisson_inversion(rng, intensity);
                let mut sum = 0.0;
                for _ in 0..jumps {
                    sum += -(-rng.gen::<f64>()).ln_1p() / rate;
                }
                sum
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// `(mean, variance)`: `(c, 0)` or `(a/lambda, 2a/lambda^2)`.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            LimitLaw::Degenerate { c } => (c, 0.0),
            LimitLaw::CompoundPoissonExp { intensity, rate } => {
                (intensity / rate, 2.0 * intensity / (rate * rate))
            }
        }
    }
}

/// Poisson draw by CDF inversion; deterministic for a given rng stream.
fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u = rng.gen::<f64>();
    let mut pmf = (-mean).exp();
    let mut cum = pmf;
    let mut k = 0u64;
    while u >= cum && k < 1_000_000 {
        k += 1;
        pmf *= mean / k as f64;
        cum += pmf;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn laplace_values() {
        let cpe = LimitLaw::compound_poisson_exp(2.0, 1.0).unwrap();
        let deg = LimitLaw::degenerate(1.0).unwrap();
        assert_eq!(cpe.laplace(0.0).unwrap(), 1.0);
        assert_eq!(deg.laplace(0.0).unwrap(), 1.0);
        assert!((deg.laplace(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // t -> infinity leaves the atom mass e^{-2}
        assert!((cpe.laplace(1e9).unwrap() - (-2.0f64).exp()).abs() < 1e-8);
        assert!(cpe.laplace(-1.0).is_err());
    }

    #[test]
    fn cdf_atom_and_limits() {
        let cpe = LimitLaw::compound_poisson_exp(2.0, 1.0).unwrap();
        assert!((cpe.cdf(0.0) - (-2.0f64).exp()).abs() < 1e-12);
        assert!((cpe.cdf(200.0) - 1.0).abs() < 1e-10);
        assert_eq!(cpe.cdf(-0.5), 0.0);

        let deg = LimitLaw::degenerate(1.0).unwrap();
        assert_eq!(deg.cdf(0.999), 0.0);
        assert_eq!(deg.cdf(1.0), 1.0);

        // left limits: the jump heights are the atom masses
        assert_eq!(cpe.cdf_left(0.0), 0.0);
        assert!((cpe.cdf(1.5) - cpe.cdf_left(1.5)).abs() < 1e-15);
        assert_eq!(deg.cdf_left(1.0), 0.0);
        assert_eq!(deg.cdf_left(1.0000001), 1.0);
    }

    #[test]
    fn cdf_monotone_and_quantile_consistent() {
        let cpe = LimitLaw::compound_poisson_exp(1.5, 2.0).unwrap();
        let mut prev = 0.0;
        for i in 0..200 {
            let x = i as f64 * 0.05;
            let f = cpe.cdf(x);
            assert!(f >= prev);
            prev = f;
        }
        for p in [0.3, 0.5, 0.9, 0.99] {
            let x = cpe.quantile(p).unwrap();
            assert!((cpe.cdf(x) - p).abs() < 1e-8, "p={p}");
        }
        assert_eq!(cpe.quantile(0.1).unwrap(), 0.0); // below the atom
    }

    #[test]
    fn transform_of_cdf_matches_laplace() {
        // quadrature oracle: atom + integral of e^{-tx} against the
        // Poisson-weighted gamma densities, written out independently
        let (a, lambda) = (2.0, 1.0);
        let cpe = LimitLaw::compound_poisson_exp(a, lambda).unwrap();
        let density = |x: f64| {
            let mut w = (-a).exp();
            let mut total = 0.0;
            let mut kfact = 1.0;
            let mut gfact = 1.0;
            for k in 1..=60u32 {
                w *= a;
                kfact *= k as f64;
                if k > 1 {
                    gfact *= (k - 1) as f64;
                }
                total += w / kfact * lambda * (lambda * x).powi(k as i32 - 1) * (-lambda * x).exp()
                    / gfact;
            }
            total
        };
        for t in [0.5, 1.0, 2.0, 5.0] {
            let integral =
                quad::integrate(|x| (-t * x).exp() * density(x), 0.0, 80.0, 1e-12).unwrap();
            let oracle = cpe.atom_at_zero() + integral;
            let lt = cpe.laplace(t).unwrap();
            assert!((oracle - lt).abs() < 1e-8, "t={t}: {oracle} vs {lt}");
        }
    }

    #[test]
    fn moments_match_finite_differences_of_transform() {
        for law in [
            LimitLaw::compound_poisson_exp(2.0, 1.0).unwrap(),
            LimitLaw::compound_poisson_exp(1.0, 2.0).unwrap(),
        ] {
            let (mean, var) = law.moments();
            // h balances the stencils' truncation against roundoff in the
            // 1/h^2 division; both sit near 2e-7 here
            let h = 5e-5;
            let lt = |t: f64| law.laplace(t).unwrap();
            // one-sided second-order stencils keep t >= 0
            let d1 = (-3.0 * lt(0.0) + 4.0 * lt(h) - lt(2.0 * h)) / (2.0 * h);
            let d2 = (2.0 * lt(0.0) - 5.0 * lt(h) + 4.0 * lt(2.0 * h) - lt(3.0 * h)) / (h * h);
            assert!((mean + d1).abs() < 1e-6, "mean {mean} vs {}", -d1);
            assert!((var - (d2 - d1 * d1)).abs() < 1e-6, "var {var}");
        }
        assert_eq!(LimitLaw::degenerate(3.0).unwrap().moments(), (3.0, 0.0));
    }

    #[test]
    fn sampler_atom_and_mean() {
        let law = LimitLaw::compound_poisson_exp(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = 100_000usize;
        let xs = law.sample(&mut rng, m);
        let zeros = xs.iter().filter(|&&x| x == 0.0).count() as f64 / m as f64;
        let atom = law.atom_at_zero();
        let se_atom = (atom * (1.0 - atom) / m as f64).sqrt();
        assert!((zeros - atom).abs() < 3.0 * se_atom, "{zeros} vs {atom}");
        let mean = xs.iter().sum::<f64>() / m as f64;
        let se_mean = (4.0f64 / m as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se_mean, "{mean}");
        assert!(law.sample(&mut rng, 0).is_empty());
    }

    #[test]
    fn degenerate_sampler_is_constant() {
        let law = LimitLaw::degenerate(2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(law.sample(&mut rng, 100).iter().all(|&x| x == 2.5));
    }

    #[test]
    fn laplace_completely_monotone_on_grid() {
        let law = LimitLaw::compound_poisson_exp(2.0, 1.0).unwrap();
        let h = 0.05;
        let lts: Vec<f64> = (0..400)
            .map(|i| law.laplace(i as f64 * h).unwrap())
            .collect();
        for w in lts.windows(3) {
            assert!(w[0] > 0.0 && w[0] >= w[1]);
            // log-convexity at grid triples
            assert!(w[0].ln() + w[2].ln() >= 2.0 * w[1].ln() - 1e-12);
        }
    }
}
