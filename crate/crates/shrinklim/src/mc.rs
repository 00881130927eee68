//! Seeded Monte Carlo realization of shrunken sums and empirical
//! functionals.
//!
//! Each replication draws from its own counter-derived sub-stream, so output
//! is bit-identical regardless of thread count or chunking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dists::Distribution;
use crate::error::{Error, Result};
use crate::norming::NormalizingSequence;
use crate::shrink::shrink;

/// Everything a simulation run needs.
#[derive(Debug)]
pub struct SimulationConfig {
    pub distribution: Distribution,
    pub norming: NormalizingSequence,
    pub n: u64,
    pub replications: u64,
    pub seed: u64,
    pub t_grid: Vec<f64>,
}

impl SimulationConfig {
    pub fn new(
        distribution: Distribution,
        norming: NormalizingSequence,
        n: u64,
        replications: u64,
        seed: u64,
        t_grid: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        if replications == 0 {
            return Err(Error::domain("replication count m must be >= 1"));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid.iter().any(|&t| t <= 0.0) {
            return Err(Error::domain(
                "t_grid must be strictly increasing and positive",
            ));
        }
        Ok(SimulationConfig {
            distribution,
            norming,
            n,
            replications,
            seed,
            t_grid,
        })
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Sub-stream for replication `j` of run `seed`: a ChaCha8 stream keyed by
/// splitmix64 output over `(seed, j)`.
pub fn replication_rng(seed: u64, j: u64) -> ChaCha8Rng {
    let mut state = seed ^ j.wrapping_mul(0xd1342543de82ef95);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// `m` independent realizations of `S_n` by direct summation of `n`
/// shrunken draws per replication.
pub fn simulate_sn(cfg: &SimulationConfig) -> Result<Vec<f64>> {
    let r = cfg.norming.r(cfg.n)?;
    let out: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = replication_rng(cfg.seed, j);
            let mut sum = 0.0;
            for _ in 0..cfg.n {
                sum += shrink(cfg.distribution.sample_one(&mut rng), r);
            }
            sum
        })
        .collect();
    Ok(out)
}

/// Fast path: per replication, draw the number of exceedances of `r_n` as a
/// Binomial(n, 1 - F(r_n)) count, then each exceedance value from the
/// conditional tail law. Agrees with [`simulate_sn`] in distribution.
pub fn simulate_sn_fast(cfg: &SimulationConfig) -> Result<Vec<f64>> {
    let r = cfg.norming.r(cfg.n)?;
    let p = cfg.distribution.survival(r);
    let out: Vec<f64> = (0..cfg.replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = replication_rng(cfg.seed, j);
            let k = binomial_inversion(&mut rng, cfg.n, p);
            let mut sum = 0.0;
            for _ in 0..k {
                // survival target (1 - u) p lands in (0, p]: the tail beyond r
                let s = (1.0 - rng.gen::<f64>()) * p;
                sum += cfg.distribution.quantile_from_survival(s) - r;
            }
            sum
        })
        .collect();
    Ok(out)
}

/// Binomial draw by CDF inversion; cheap when `n p` is small.
fn binomial_inversion<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let u = rng.gen::<f64>();
    let ratio = p / (1.0 - p);
    let mut pmf = ((n as f64) * (-p).ln_1p()).exp(); // (1-p)^n
    let mut cum = pmf;
    let mut k = 0u64;
    while u >= cum && k < n {
        pmf *= ratio * (n - k) as f64 / (k + 1) as f64;
        k += 1;
        cum += pmf;
    }
    k
}

/// Arithmetic mean of `exp(-t s)` over the samples.
pub fn empirical_laplace(samples: &[f64], t: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if t < 0.0 {
        return Err(Error::domain(format!(
            "empirical_laplace requires t >= 0, got {t}"
        )));
    }
    Ok(samples.iter().map(|&s| (-t * s).exp()).sum::<f64>() / samples.len() as f64)
}

/// Fraction of samples `<= x`.
pub fn empirical_cdf(samples: &[f64], x: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(samples.iter().filter(|&&s| s <= x).count() as f64 / samples.len() as f64)
}

/// Fraction of exact zeros. The shrink map emits literal zeros, so the atom
/// is structurally exact and literal equality is the right test.
pub fn zero_fraction(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(samples.iter().filter(|&&s| s == 0.0).count() as f64 / samples.len() as f64)
}
