//! Command-line front end: drives the pipelines and emits CSV tables.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shrinklim::config::RunConfig;
use shrinklim::diag::{default_t_grid, full_report};
use shrinklim::dists::Distribution;
use shrinklim::error::{Error, Result};
use shrinklim::gmeasure::{compute_gn, fit_h_solution, HFamily, TabulatedFn};
use shrinklim::limitlaw::LimitLaw;
use shrinklim::mc::{simulate_sn, simulate_sn_fast, SimulationConfig};
use shrinklim::norming::NormalizingSequence;
use shrinklim::shrink::ShrunkenLaw;

#[derive(Parser)]
#[command(name = "shrinklim", version, about = "Shrunken-sum limit pipelines", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a normalizing sequence: CSV `n,r,w`
    Rn(RnArgs),
    /// Exact Laplace transform of the shrunken sum S_n: CSV `t,lt`
    Lt(LtArgs),
    /// The measure G_n on a grid: CSV `x,value`
    Gn(GnArgs),
    /// Fit tabulated H samples against the admissible families
    Fit(FitArgs),
    /// Draw seeded realizations of S_n: CSV `j,s`
    Simulate(SimulateArgs),
    /// Transform and CDF tables of a limit law
    Limit(LimitArgs),
    /// End-to-end convergence report from a config file
    Converge(ConvergeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    /// Exponential with `--rate`
    Exp,
    /// Standard half-normal
    Halfnormal,
    /// Tabulated CDF loaded from `--cdf`
    Tabulated,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    /// exp(-lambda r_n) = a / n, needs `--a` and `--lambda`
    Exp,
    /// n k(r_n) = c, needs `--c`
    Halfnormal,
    /// tabulated `n,r` pairs loaded from `--rn-csv`
    Explicit,
}

/// Base distribution plus normalizing sequence, shared by the pipeline
/// subcommands.
#[derive(Args)]
struct PipelineArgs {
    /// Base distribution
    #[arg(long, value_enum)]
    dist: DistKind,
    /// Rate of the exponential base
    #[arg(long)]
    rate: Option<f64>,
    /// CSV file with header `x,F` for a tabulated base
    #[arg(long)]
    cdf: Option<PathBuf>,
    /// Normalizing rule
    #[arg(long, value_enum)]
    rule: RuleKind,
    /// `a` of the exponential rule
    #[arg(long)]
    a: Option<f64>,
    /// `lambda` of the exponential rule
    #[arg(long)]
    lambda: Option<f64>,
    /// `c` of the half-normal rule
    #[arg(long)]
    c: Option<f64>,
    /// CSV file with header `n,r` for an explicit sequence
    #[arg(long)]
    rn_csv: Option<PathBuf>,
}

impl PipelineArgs {
    fn distribution(&self) -> Result<Distribution> {
        match self.dist {
            DistKind::Exp => {
                let rate = self
                    .rate
                    .ok_or_else(|| Error::domain("--dist exp needs --rate"))?;
                Distribution::exponential(rate)
            }
            DistKind::Halfnormal => Ok(Distribution::half_normal()),
            DistKind::Tabulated => {
                let path = self
                    .cdf
                    .as_ref()
                    .ok_or_else(|| Error::domain("--dist tabulated needs --cdf"))?;
                Distribution::from_csv(BufReader::new(File::open(path)?))
            }
        }
    }

    fn norming(&self) -> Result<NormalizingSequence> {
        build_norming(
            self.rule,
            self.a,
            self.lambda,
            self.c,
            self.rn_csv.as_deref(),
        )
    }
}

fn build_norming(
    rule: RuleKind,
    a: Option<f64>,
    lambda: Option<f64>,
    c: Option<f64>,
    rn_csv: Option<&Path>,
) -> Result<NormalizingSequence> {
    match rule {
        RuleKind::Exp => {
            let a = a.ok_or_else(|| Error::domain("--rule exp needs --a"))?;
            let lambda = lambda.ok_or_else(|| Error::domain("--rule exp needs --lambda"))?;
            NormalizingSequence::exponential_rule(a, lambda)
        }
        RuleKind::Halfnormal => {
            let c = c.ok_or_else(|| Error::domain("--rule halfnormal needs --c"))?;
            NormalizingSequence::half_normal_rule(c)
        }
        RuleKind::Explicit => {
            let path = rn_csv.ok_or_else(|| Error::domain("--rule explicit needs --rn-csv"))?;
            NormalizingSequence::from_csv(BufReader::new(File::open(path)?))
        }
    }
}

#[derive(Args)]
struct RnArgs {
    #[arg(long, value_enum)]
    rule: RuleKind,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    rn_csv: Option<PathBuf>,
    /// Index to tabulate; repeatable
    #[arg(long, required = true, num_args = 1..)]
    n: Vec<u64>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LtArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Number of summands
    #[arg(long)]
    n: u64,
    /// Transform argument; repeatable, defaults to 40 log-spaced points on [0.05, 20]
    #[arg(long)]
    t: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GnArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    n: u64,
    /// Upper end of the evaluation grid
    #[arg(long, default_value_t = 10.0)]
    y_hi: f64,
    /// Number of grid cells
    #[arg(long, default_value_t = 400)]
    y_count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV of H samples with header `x,value`
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    n: u64,
    /// Number of replications
    #[arg(long)]
    m: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the binomial exceedance-count sampler
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LimitVariant {
    /// Compound Poisson law with exponential jumps; needs `--a` and `--lambda`
    #[arg(long)]
    cpe: bool,
    /// Point mass at `--c`
    #[arg(long)]
    degenerate: bool,
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    variant: LimitVariant,
    /// Intensity of the compound Poisson law
    #[arg(long)]
    a: Option<f64>,
    /// Jump rate of the compound Poisson law
    #[arg(long)]
    lambda: Option<f64>,
    /// Location of the point mass
    #[arg(long)]
    c: Option<f64>,
    /// Transform argument; repeatable, defaults to 40 log-spaced points on [0.05, 20]
    #[arg(long)]
    t: Vec<f64>,
    /// CDF argument; repeatable, the CDF table is emitted only when given
    #[arg(long)]
    x: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides the config's out_dir, stdout when both absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_rn(args: &RnArgs) -> Result<()> {
    let seq = build_norming(
        args.rule,
        args.a,
        args.lambda,
        args.c,
        args.rn_csv.as_deref(),
    )?;
    let mut ns = args.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut w = writer(&args.out)?;
    writeln!(w, "n,r,w")?;
    for &n in &ns {
        writeln!(w, "{},{},{}", n, seq.r(n)?, seq.gap(n)?)?;
    }
    Ok(())
}

fn cmd_lt(args: &LtArgs) -> Result<()> {
    let d = args.pipeline.distribution()?;
    let seq = args.pipeline.norming()?;
    let law = ShrunkenLaw::new(d, seq.r(args.n)?)?;
    let ts = if args.t.is_empty() {
        default_t_grid()
    } else {
        args.t.clone()
    };
    let mut w = writer(&args.out)?;
    writeln!(w, "t,lt")?;
    for &t in &ts {
        writeln!(w, "{},{}", t, law.laplace_sum(args.n, t)?)?;
    }
    Ok(())
}

fn cmd_gn(args: &GnArgs) -> Result<()> {
    if !(args.y_hi > 0.0) || args.y_count == 0 {
        return Err(Error::domain("--y-hi must be > 0 and --y-count >= 1"));
    }
    let d = args.pipeline.distribution()?;
    let seq = args.pipeline.norming()?;
    let grid: Vec<f64> = (0..=args.y_count)
        .map(|i| args.y_hi * i as f64 / args.y_count as f64)
        .collect();
    let gn = compute_gn(&d, &seq, args.n, &grid)?;
    gn.write_csv(writer(&args.out)?)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let samples = TabulatedFn::from_csv(BufReader::new(File::open(&args.input)?))?;
    let fit = fit_h_solution(&samples)?;
    let mut w = writer(&args.out)?;
    match fit.family {
        HFamily::Constant { kappa } => {
            writeln!(w, "family,constant")?;
            writeln!(w, "kappa,{kappa}")?;
        }
        HFamily::ExpFamily { alpha, gamma } => {
            writeln!(w, "family,exp")?;
            writeln!(w, "alpha,{alpha}")?;
            writeln!(w, "gamma,{gamma}")?;
        }
    }
    writeln!(w, "residual,{}", fit.residual)?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = SimulationConfig::new(
        args.pipeline.distribution()?,
        args.pipeline.norming()?,
        args.n,
        args.m,
        args.seed,
        vec![1.0],
    )?;
    let samples = if args.fast {
        simulate_sn_fast(&cfg)?
    } else {
        simulate_sn(&cfg)?
    };
    let mut w = writer(&args.out)?;
    writeln!(w, "# seed,{}", args.seed)?;
    writeln!(w, "j,s")?;
    for (j, s) in samples.iter().enumerate() {
        writeln!(w, "{j},{s}")?;
    }
    Ok(())
}

fn cmd_limit(args: &LimitArgs) -> Result<()> {
    let law = if args.variant.cpe {
        let a = args.a.ok_or_else(|| Error::domain("--cpe needs --a"))?;
        let lambda = args
            .lambda
            .ok_or_else(|| Error::domain("--cpe needs --lambda"))?;
        LimitLaw::compound_poisson_exp(a, lambda)?
    } else {
        let c = args
            .c
            .ok_or_else(|| Error::domain("--degenerate needs --c"))?;
        LimitLaw::degenerate(c)?
    };
    let ts = if args.t.is_empty() {
        default_t_grid()
    } else {
        args.t.clone()
    };
    let mut w = writer(&args.out)?;
    writeln!(w, "t,lt")?;
    for &t in &ts {
        writeln!(w, "{},{}", t, law.laplace(t)?)?;
    }
    if !args.x.is_empty() {
        writeln!(w)?;
        writeln!(w, "x,cdf")?;
        for &x in &args.x {
            writeln!(w, "{},{}", x, law.cdf(x))?;
        }
    }
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs) -> Result<u8> {
    let cfg = RunConfig::from_path(&args.config)?;
    let base = args
        .config
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    let d = cfg.distribution(&base)?;
    let seq = cfg.norming(&base)?;
    let law = cfg.limit()?;
    let report_cfg = cfg.report_config(&law)?;
    let report = full_report(&d, &seq, &law, &cfg.run.n_list, &report_cfg)?;

    let out = args.out.clone().or_else(|| {
        cfg.run
            .out_dir
            .as_ref()
            .map(|dir| base.join(dir).join("report.csv"))
    });
    if let Some(path) = &out {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
    }
    report.write_csv(writer(&out)?)?;
    // row-level numerical failures are preserved in the CSV comments and
    // surface as exit code 2
    Ok(if report.has_failures() { 2 } else { 0 })
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Rn(args) => cmd_rn(args).map(|_| 0),
        Command::Lt(args) => cmd_lt(args).map(|_| 0),
        Command::Gn(args) => cmd_gn(args).map(|_| 0),
        Command::Fit(args) => cmd_fit(args).map(|_| 0),
        Command::Simulate(args) => cmd_simulate(args).map(|_| 0),
        Command::Limit(args) => cmd_limit(args).map(|_| 0),
        Command::Converge(args) => cmd_converge(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
