use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "klab", version = crate::output::VERSION, about = "Kloosterman-sum verifiers and bound calculators")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalArgs {
    /// Config file; its sections are named after the subcommands, plus `[global]`
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for the parallel scans
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalized hyper-Kloosterman table
    KlTable(KlTableArgs),
    /// Naive/convolution agreement, Deligne bound, conjugation symmetry, complete-sum collapse
    KlCheck(KlCheckArgs),
    /// Seeded ratio scans of the sum-product statistics, optionally with a bad-tuple probe
    SumprodScan(ScanArgs),
    /// Second moments over sampled shift tuples
    Moments(MomentArgs),
    /// Measured bilinear forms against the trivial, completion and theorem bounds
    BilinearSweep(SweepArgs),
    /// Largest singular value of the kernel matrix
    Opnorm(OpnormArgs),
    /// Exactness of the shift-by-ab re-indexing
    ShiftCheck(ShiftArgs),
    /// The multiset S_k and its multiplicative stabilizer
    Sk(SkArgs),
    /// Discrepancy of the divisor-twisted cusp form coefficients in progressions
    Progression(ProgressionArgs),
    /// Exponent case analysis and the critical delta
    ExponentLp(ExponentArgs),
    /// Quick battery of the deterministic checks
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KlTable(_) => "kl-table",
            Command::KlCheck(_) => "kl-check",
            Command::SumprodScan(_) => "sumprod-scan",
            Command::Moments(_) => "moments",
            Command::BilinearSweep(_) => "bilinear-sweep",
            Command::Opnorm(_) => "opnorm",
            Command::ShiftCheck(_) => "shift-check",
            Command::Sk(_) => "sk",
            Command::Progression(_) => "progression",
            Command::ExponentLp(_) => "exponent-lp",
            Command::Report => "report",
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlTableArgs {
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Pull the table back by `a -> c a`
    #[arg(long)]
    pub c: Option<u64>,
    /// intro or sheaf
    #[arg(long)]
    pub sign: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlCheckArgs {
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Largest tuple count for the naive comparison; larger cases skip it
    #[arg(long)]
    pub naive_cap: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanArgs {
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub c: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Statistic names; all when absent
    #[arg(long, value_delimiter = ',')]
    pub statistic: Option<Vec<String>>,
    /// Run the bad-tuple probe with this multiple of the median ratio as threshold
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentArgs {
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub c: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<u64>,
    #[arg(long = "M", value_delimiter = ',')]
    #[serde(rename = "M")]
    pub m: Option<Vec<usize>>,
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    /// Start of the `n` interval
    #[arg(long)]
    pub offset: Option<u64>,
    /// steinhaus, rademacher, all_ones
    #[arg(long, value_delimiter = ',')]
    pub ensemble: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpnormArgs {
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<u64>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub offset: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftArgs {
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<u64>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<u64>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<u64>,
    #[arg(long)]
    pub offset: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkArgs {
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Base prime; the smallest prime where both checks hold when absent
    #[arg(long)]
    pub q: Option<u64>,
    /// Host degree; the minimal one containing the k-th roots of unity when absent
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgressionArgs {
    #[arg(long)]
    pub x: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Grid step for the cross-check grid
    #[arg(long)]
    pub grid: Option<f64>,
    #[arg(long)]
    pub slack: Option<f64>,
    /// Report the critical delta and eta
    #[arg(long)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub search: bool,
}
