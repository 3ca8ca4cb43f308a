use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flatconv_core::Phi;

#[derive(Debug, Parser)]
#[command(name = "flatconv", version, about = "Symmetric measures with flat autoconvolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rejection-sample one measure and write its report, counts and g*g nodes.
    Construct(ConstructArgs),
    /// One trial per (n, seed) pair, written as CSV rows plus a per-n summary.
    Sweep(SweepArgs),
    /// Re-check a stored measure independently of how it was produced.
    Verify(VerifyArgs),
    /// Distances between two stored measures, optionally with a covering check.
    Metrics(MetricsArgs),
    /// Tail of the centered pair counts against the Azuma bound.
    Tails(TailsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhiArg {
    Log,
    Loglog,
    Sqrtlog,
}

impl From<PhiArg> for Phi {
    fn from(p: PhiArg) -> Phi {
        match p {
            PhiArg::Log => Phi::Log,
            PhiArg::Loglog => Phi::LogLog,
            PhiArg::Sqrtlog => Phi::SqrtLog,
        }
    }
}

pub fn odd_order(s: &str) -> Result<u64, String> {
    let n: u64 = s.trim().parse().map_err(|_| format!("{s:?} is not a positive integer"))?;
    if n % 2 == 0 {
        return Err(format!("n must be odd, got {n}"));
    }
    if n < 3 {
        return Err(format!("n must be at least 3, got {n}"));
    }
    Ok(n)
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("must lie strictly between 0 and 1, got {x}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrialArgs {
    #[arg(long, default_value = "0.6", value_parser = unit_interval)]
    pub gamma: f64,
    #[arg(long, default_value = "1", value_parser = positive)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "log")]
    pub phi: PhiArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long, value_parser = odd_order)]
    pub n: u64,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_attempts: u32,
    /// Output directory; receives report.json, measure.json and density.csv.
    #[arg(long, default_value = "flatconv-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated grid orders.
    #[arg(long, value_delimiter = ',', required = true, value_parser = odd_order)]
    pub n_list: Vec<u64>,
    #[command(flatten)]
    pub trial: TrialArgs,
    /// Number of seeds per n, starting at --seed.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Measure JSON as written by `construct`.
    #[arg(long)]
    pub measure: PathBuf,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Arc width for a covering check of the first measure's support, as `num/den`.
    #[arg(long)]
    pub cover_width: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub m_index: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[arg(long, value_parser = odd_order)]
    pub n: u64,
    /// Number of sampled points N.
    #[arg(long)]
    pub points: u64,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exponent used to choose the multiplicity cap M.
    #[arg(long, default_value = "0.6", value_parser = unit_interval)]
    pub gamma: f64,
    #[arg(long, default_value_t = 21)]
    pub x_points: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
