//! Weak-convergence diagnostics: transform distances, Kolmogorov distances
//! with exact atom handling, and per-`n` convergence reports.

use std::io::Write;

use rayon::prelude::*;

use crate::dists::Distribution;
use crate::error::{Error, Result};
use crate::gmeasure::{compute_gn, log_spaced};
use crate::limitlaw::LimitLaw;
use crate::mc::{simulate_sn_fast, zero_fraction, SimulationConfig};
use crate::norming::NormalizingSequence;
use crate::shrink::ShrunkenLaw;

/// Half-width of the DKW `1 - alpha` confidence band for an empirical CDF
/// built from `m` samples.
pub fn dkw_epsilon(m: usize, alpha: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::EmptySample);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    Ok(((2.0 / alpha).ln() / (2.0 * m as f64)).sqrt())
}

/// Sup over the `t` grid of the gap between the exact transform of `S_n`
/// and the limit law's transform. No sampling is involved.
pub fn lt_distance(
    d: &Distribution,
    seq: &NormalizingSequence,
    n: u64,
    law: &LimitLaw,
    t_grid: &[f64],
) -> Result<f64> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("t_grid must be non-empty and positive"));
    }
    let shrunken = ShrunkenLaw::new(d.clone(), seq.r(n)?)?;
    let mut sup: f64 = 0.0;
    for &t in t_grid {
        let gap = (shrunken.laplace_sum(n, t)? - law.laplace(t)?).abs();
        sup = sup.max(gap);
    }
    Ok(sup)
}

/// Kolmogorov distance between the empirical CDF of `samples` and the limit
/// CDF, evaluated at the grid points, all sample points, and zero, checking
/// both sides of every jump. The atom at zero is compared exactly because
/// both CDFs jump there.
pub fn ks_distance(samples: &[f64], law: &LimitLaw, x_grid: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len() as f64;
    let ecdf = |x: f64| sorted.partition_point(|&s| s <= x) as f64 / m;
    let ecdf_left = |x: f64| sorted.partition_point(|&s| s < x) as f64 / m;

    let mut points: Vec<f64> = x_grid.iter().chain(sorted.iter()).copied().collect();
    points.push(0.0);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();

    let mut sup: f64 = 0.0;
    for &x in &points {
        sup = sup.max((ecdf(x) - law.cdf(x)).abs());
        // left limits catch the largest gap just before a jump
        sup = sup.max((ecdf_left(x) - law.cdf_left(x)).abs());
    }
    Ok(sup)
}

/// One row of a convergence report; `error` labels a failed computation
/// without aborting the remaining rows.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub n: u64,
    pub lt_sup: f64,
    pub ks: f64,
    pub zero_atom_gap: f64,
    pub gn_mass: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub seed: u64,
    pub replications: u64,
}

/// Knobs for [`full_report`] beyond the pipeline itself.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub replications: u64,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub gn_grid: Vec<f64>,
}

impl ReportConfig {
    pub fn new(replications: u64, seed: u64, law: &LimitLaw) -> Result<Self> {
        Ok(ReportConfig {
            replications,
            seed,
            t_grid: default_t_grid(),
            x_grid: default_x_grid(law)?,
            gn_grid: (0..=400).map(|i| i as f64 * 0.025).collect(),
        })
    }
}

/// Default transform grid: 40 log-spaced points on [0.05, 20].
pub fn default_t_grid() -> Vec<f64> {
    log_spaced(0.05, 20.0, 40)
}

/// Default CDF grid: 200 points from 0 to the law's 0.999 quantile.
pub fn default_x_grid(law: &LimitLaw) -> Result<Vec<f64>> {
    let hi = law.quantile(0.999)?.max(1e-6);
    Ok((0..200).map(|i| hi * i as f64 / 199.0).collect())
}

fn compute_row(
    d: &Distribution,
    seq: &NormalizingSequence,
    law: &LimitLaw,
    n: u64,
    cfg: &ReportConfig,
) -> ReportRow {
    let inner = || -> Result<ReportRow> {
        let lt_sup = lt_distance(d, seq, n, law, &cfg.t_grid)?;
        let sim = SimulationConfig::new(
            d.clone(),
            NormalizingSequence::new(seq.rule().clone())?,
            n,
            cfg.replications,
            cfg.seed,
            cfg.t_grid.clone(),
        )?;
        let samples = simulate_sn_fast(&sim)?;
        let ks = ks_distance(&samples, law, &cfg.x_grid)?;
        let zero_atom_gap = (zero_fraction(&samples)? - law.atom_at_zero()).abs();
        let gn_mass = compute_gn(d, seq, n, &cfg.gn_grid)?.total_mass;
        Ok(ReportRow {
            n,
            lt_sup,
            ks,
            zero_atom_gap,
            gn_mass,
            error: None,
        })
    };
    inner().unwrap_or_else(|e| ReportRow {
        n,
        lt_sup: f64::NAN,
        ks: f64::NAN,
        zero_atom_gap: f64::NAN,
        gn_mass: f64::NAN,
        error: Some(e.to_string()),
    })
}

/// Per-`n` diagnostics for a pipeline against a candidate limit law.
/// Failed rows are labeled, not fatal.
pub fn full_report(
    d: &Distribution,
    seq: &NormalizingSequence,
    law: &LimitLaw,
    n_list: &[u64],
    cfg: &ReportConfig,
) -> Result<ConvergenceReport> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("n_list must be strictly increasing"));
    }
    let rows: Vec<ReportRow> = n_list
        .par_iter()
        .map(|&n| compute_row(d, seq, law, n, cfg))
        .collect();
    Ok(ConvergenceReport {
        rows,
        t_grid: cfg.t_grid.clone(),
        x_grid: cfg.x_grid.clone(),
        seed: cfg.seed,
        replications: cfg.replications,
    })
}

impl ConvergenceReport {
    /// True when at least one row carries an error label.
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// CSV with `#` metadata comments and header `n,lt_sup,ks,zero_atom_gap,gn_mass`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# seed,{}", self.seed)?;
        writeln!(w, "# m,{}", self.replications)?;
        writeln!(
            w,
            "# t_grid,{}",
            self.t_grid
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";")
        )?;
        writeln!(
            w,
            "# x_grid,{}",
            self.x_grid
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";")
        )?;
        for row in &self.rows {
            if let Some(err) = &row.error {
                writeln!(w, "# error,n={},{}", row.n, err)?;
            }
        }
        writeln!(w, "n,lt_sup,ks,zero_atom_gap,gn_mass")?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.n, row.lt_sup, row.ks, row.zero_atom_gap, row.gn_mass
            )?;
        }
        Ok(())
    }
}
