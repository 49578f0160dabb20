//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kdep::apps::{RankCriterion, ScoreKind};
use kdep::{BandwidthSpec, Estimator, NullKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "kdep", version, about = "Kernel dependence estimation, tests and sensitivity maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Independence test between two CSV files.
    Test(TestArgs),
    /// Sensitivity maps and their aggregates.
    Sensitivity(SensitivityArgs),
    /// Rank the columns of X by dependence on a single target column.
    Rank(RankArgs),
    /// Score cause-effect pairs and evaluate against ground truth.
    Causal(CausalArgs),
    /// Accuracy and runtime of the randomized estimator.
    Bench(BenchArgs),
    /// Write a synthetic additive-noise pair collection.
    SynthPairs(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Hsic,
    Rhsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NullArg {
    Permutation,
    Gamma,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value = "hsic")]
    pub method: MethodArg,
    /// Random features per variable (rhsic only).
    #[arg(long = "features", short = 'D', default_value_t = 30)]
    pub features: usize,
    /// auto-mean, auto-median, a positive number, or `sx,sy`.
    #[arg(long, default_value = "auto-mean")]
    pub bandwidth: String,
    /// Scale every column to zero mean and unit variance first.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EstimatorArgs {
    pub fn estimator(&self) -> CliResult<Estimator> {
        match self.method {
            MethodArg::Hsic => Ok(Estimator::Exact),
            MethodArg::Rhsic if self.features == 0 => Err(CliError::Input("--features must be at least 1".into())),
            MethodArg::Rhsic => Ok(Estimator::Randomized {
                features: self.features,
            }),
        }
    }

    pub fn bandwidths(&self) -> CliResult<(BandwidthSpec, BandwidthSpec)> {
        parse_bandwidth(&self.bandwidth)
    }
}

fn parse_one_bandwidth(s: &str) -> CliResult<BandwidthSpec> {
    match s.trim() {
        "auto-mean" => Ok(BandwidthSpec::AutoMean),
        "auto-median" => Ok(BandwidthSpec::AutoMedian),
        other => match other.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(BandwidthSpec::Fixed(v)),
            _ => Err(CliError::Input(format!(
                "bad bandwidth {other:?}: expected auto-mean, auto-median or a positive number"
            ))),
        },
    }
}

/// `spec` or `spec_x,spec_y`.
pub fn parse_bandwidth(s: &str) -> CliResult<(BandwidthSpec, BandwidthSpec)> {
    match s.split_once(',') {
        Some((a, b)) => Ok((parse_one_bandwidth(a)?, parse_one_bandwidth(b)?)),
        None => {
            let spec = parse_one_bandwidth(s)?;
            Ok((spec, spec))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "permutation")]
    pub null: NullArg,
    /// Null draws; defaults to 2000 for the permutation null and 200 for the gamma fit.
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Draw fresh frequencies for every permutation (rhsic only).
    #[arg(long)]
    pub redraw_frequencies: bool,
    /// Report wall time; output is then no longer reproducible.
    #[arg(long)]
    pub timing: bool,
}

impl TestArgs {
    pub fn null_kind(&self) -> NullKind {
        match self.null {
            NullArg::Permutation => NullKind::Permutation,
            NullArg::Gamma => NullKind::GammaMomentMatched,
        }
    }

    pub fn permutations(&self) -> usize {
        self.permutations.unwrap_or(match self.null {
            NullArg::Permutation => 2000,
            NullArg::Gamma => 200,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Output prefix for `<out>_Sx.csv`, `<out>_Sy.csv` and `<out>_aggregates.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    /// hsic, sensitivity or pearson.
    #[arg(long, default_value = "hsic", value_parser = parse_criterion)]
    pub criterion: RankCriterion,
    /// Number of top features to select; defaults to all.
    #[arg(long)]
    pub nf: Option<usize>,
    #[arg(long, default_value = "auto-mean")]
    pub bandwidth: String,
    #[arg(long)]
    pub standardize: bool,
}

fn parse_criterion(s: &str) -> Result<RankCriterion, String> {
    s.parse().map_err(|e: kdep::Error| e.to_string())
}

fn parse_score(s: &str) -> Result<ScoreKind, String> {
    s.parse().map_err(|e: kdep::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct CausalArgs {
    /// Directory of two-column pair files.
    pub pairdir: PathBuf,
    /// Metadata table: `id,direction[,weight]` rows or the six-column layout.
    pub metafile: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Score that picks each pair's direction: C or Cs.
    #[arg(long, default_value = "C", value_parser = parse_score)]
    pub score: ScoreKind,
    /// Neighbours in the regression; defaults to ceil(sqrt(n)).
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Output prefix for the curve and decision CSV files.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub sizes: Vec<usize>,
    /// Feature counts.
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    pub grid: Vec<usize>,
    /// Repetitions per (n, D); errors are medians, times are minima.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Largest n for which the exact statistic and map are computed.
    #[arg(long, default_value_t = 4000)]
    pub exact_limit: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add wall-time columns.
    #[arg(long)]
    pub timing: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, short = 'n', default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn bandwidth_forms() {
        assert_eq!(parse_bandwidth("auto-mean").unwrap(), (BandwidthSpec::AutoMean, BandwidthSpec::AutoMean));
        assert_eq!(
            parse_bandwidth("0.5,auto-median").unwrap(),
            (BandwidthSpec::Fixed(0.5), BandwidthSpec::AutoMedian)
        );
        for bad in ["0", "-1", "nan", "wide", "1,2,3", ""] {
            assert!(parse_bandwidth(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn permutation_defaults_follow_null() {
        let cli = Cli::try_parse_from(["kdep", "test", "a", "b", "--null", "gamma"]).unwrap();
        let Command::Test(t) = cli.command else { panic!() };
        assert_eq!(t.permutations(), 200);
        let cli = Cli::try_parse_from(["kdep", "test", "a", "b"]).unwrap();
        let Command::Test(t) = cli.command else { panic!() };
        assert_eq!(t.permutations(), 2000);
    }
}
