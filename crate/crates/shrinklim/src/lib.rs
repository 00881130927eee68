//! Numerical toolkit for sums of shrunken random variables.
//!
//! The pipeline: draw `n` i.i.d. non-negative variables, shrink each one by
//! `max(0, x - r_n)` with a level `r_n` growing to infinity, and sum. For
//! the right pairing of base law and normalizing sequence the sums converge
//! weakly, and the only possible limits are a point mass or a compound
//! Poisson law with exponential jumps.
//!
//! The crate makes that dichotomy computable:
//!
//! - [`dists`]: base distributions (exponential, half-normal, tabulated)
//!   with CDFs, quantiles, sampling, and Stieltjes quadrature;
//! - [`shrink`]: the shrink map and exact Laplace transforms of shrunken
//!   sums;
//! - [`norming`]: normalizing sequences, closed-form and root-solved;
//! - [`gmeasure`]: the measures `G_n`, the auxiliary functions `H_n`,
//!   functional-equation residuals, and the admissible-family fit;
//! - [`limitlaw`]: the two limit laws with transforms, CDFs, and samplers;
//! - [`mc`]: reproducible seeded Monte Carlo of the shrunken sums;
//! - [`diag`]: transform and Kolmogorov distances plus convergence reports;
//! - [`config`]: TOML run configuration for the CLI.

// `!(x > 0.0)` is used deliberately throughout: unlike `x <= 0.0` it also
// rejects NaN parameters at the domain boundary.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diag;
pub mod dists;
pub mod error;
pub mod gmeasure;
pub mod limitlaw;
pub mod mc;
pub mod norming;
pub mod quad;
pub mod shrink;

pub use config::RunConfig;
pub use diag::{dkw_epsilon, full_report, ks_distance, lt_distance, ConvergenceReport};
pub use dists::Distribution;
pub use error::{Error, Result};
pub use gmeasure::{compute_gn, compute_h_direct, compute_hn, fit_h_solution, HFamily, HFit};
pub use limitlaw::LimitLaw;
pub use mc::{empirical_cdf, empirical_laplace, simulate_sn, SimulationConfig};
pub use norming::{NormalizingSequence, NormingRule};
pub use shrink::{shrink, ShrunkenLaw};
