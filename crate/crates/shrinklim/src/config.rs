//! TOML run configuration for the end-to-end convergence pipeline.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diag::{default_t_grid, ReportConfig};
use crate::dists::Distribution;
use crate::error::{Error, Result};
use crate::gmeasure::log_spaced;
use crate::limitlaw::LimitLaw;
use crate::norming::NormalizingSequence;

/// Parsed contents of a run configuration file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub distribution: DistributionSpec,
    pub norming: NormingSpec,
    pub limit: LimitSpec,
    pub run: RunSpec,
    #[serde(default)]
    pub grids: GridSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    HalfNormal {},
    Tabulated { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NormingSpec {
    Exponential { a: f64, lambda: f64 },
    HalfNormal { c: f64 },
    Explicit { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitSpec {
    Degenerate { c: f64 },
    CompoundPoissonExp { intensity: f64, rate: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub n_list: Vec<u64>,
    pub m: u64,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Optional grid overrides; each defaults to the module-level default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub t_count: Option<usize>,
    pub gn_hi: Option<f64>,
    pub gn_count: Option<usize>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::domain(format!("config parse error: {e}")))
    }

    /// Instantiate the base distribution; tabulated CDF paths resolve
    /// relative to `base` (the config file's directory).
    pub fn distribution(&self, base: &Path) -> Result<Distribution> {
        match &self.distribution {
            DistributionSpec::Exponential { rate } => Distribution::exponential(*rate),
            DistributionSpec::HalfNormal {} => Ok(Distribution::half_normal()),
            DistributionSpec::Tabulated { path } => {
                let file = File::open(base.join(path))?;
                Distribution::from_csv(BufReader::new(file))
            }
        }
    }

    pub fn norming(&self, base: &Path) -> Result<NormalizingSequence> {
        match &self.norming {
            NormingSpec::Exponential { a, lambda } => {
                NormalizingSequence::exponential_rule(*a, *lambda)
            }
            NormingSpec::HalfNormal { c } => NormalizingSequence::half_normal_rule(*c),
            NormingSpec::Explicit { path } => {
                let file = File::open(base.join(path))?;
                NormalizingSequence::from_csv(BufReader::new(file))
            }
        }
    }

    pub fn limit(&self) -> Result<LimitLaw> {
        match self.limit {
            LimitSpec::Degenerate { c } => LimitLaw::degenerate(c),
            LimitSpec::CompoundPoissonExp { intensity, rate } => {
                LimitLaw::compound_poisson_exp(intensity, rate)
            }
        }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        match (&self.grids.t_lo, &self.grids.t_hi, &self.grids.t_count) {
            (None, None, None) => default_t_grid(),
            (lo, hi, count) => {
                log_spaced(lo.unwrap_or(0.05), hi.unwrap_or(20.0), count.unwrap_or(40))
            }
        }
    }

    pub fn report_config(&self, law: &LimitLaw) -> Result<ReportConfig> {
        if self.run.m == 0 {
            return Err(Error::domain("run.m must be >= 1"));
        }
        if self.run.n_list.is_empty() || self.run.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "run.n_list must be non-empty and strictly increasing",
            ));
        }
        let mut cfg = ReportConfig::new(self.run.m, self.run.seed, law)?;
        cfg.t_grid = self.t_grid();
        let gn_hi = self.grids.gn_hi.unwrap_or(10.0);
        let gn_count = self.grids.gn_count.unwrap_or(400);
        cfg.gn_grid = (0..=gn_count)
            .map(|i| gn_hi * i as f64 / gn_count as f64)
            .collect();
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = r#"
[distribution]
kind = "exponential"
rate = 1.0

[norming]
rule = "exponential"
a = 2.0
lambda = 1.0

[limit]
kind = "compound_poisson_exp"
intensity = 2.0
rate = 1.0

[run]
n_list = [100, 1000]
m = 500
seed = 42
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg: RunConfig = toml::from_str(EXAMPLE1).unwrap();
        let base = Path::new(".");
        assert!(matches!(
            cfg.distribution(base).unwrap(),
            Distribution::Exponential { .. }
        ));
        cfg.norming(base).unwrap();
        let law = cfg.limit().unwrap();
        let rc = cfg.report_config(&law).unwrap();
        assert_eq!(rc.t_grid.len(), 40);
        assert_eq!(rc.seed, 42);
    }

    #[test]
    fn rejects_zero_m_and_bad_n_list() {
        let mut cfg: RunConfig = toml::from_str(EXAMPLE1).unwrap();
        cfg.run.m = 0;
        let law = cfg.limit().unwrap();
        assert!(cfg.report_config(&law).is_err());
        cfg.run.m = 10;
        cfg.run.n_list = vec![100, 100];
        assert!(cfg.report_config(&law).is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = EXAMPLE1.replace("seed = 42", "seed = 42\nbogus = 1");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn grid_overrides() {
        let text = format!("{EXAMPLE1}\n[grids]\nt_lo = 0.05\nt_hi = 0.2\nt_count = 10\n");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        let grid = cfg.t_grid();
        assert_eq!(grid.len(), 10);
        assert!((grid[0] - 0.05).abs() < 1e-12);
        assert!((grid[9] - 0.2).abs() < 1e-12);
    }
}
