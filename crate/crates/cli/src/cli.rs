use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sliced_saa::lhs::Scheme;
use sliced_saa::oa::OaSource;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SLICED_SAA_OUT";

/// Sliced Latin hypercube designs and sample-average approximation experiments.
///
/// Exit status: 0 on success, 1 when a verification fails, 2 on usage or
/// input errors.
#[derive(Debug, Parser)]
#[command(name = "sliced-saa", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a design family and write it as CSV.
    Gen(GenArgs),
    /// Check an orthogonal array or a design family file.
    Verify(VerifyArgs),
    /// Run a replicated lower-bound experiment.
    Run(RunArgs),
    /// Render summary CSVs as a mean (se) table.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Scheme: mc, ilh, slh, solh, spolh or indbb.
    #[arg(long)]
    pub scheme: Scheme,
    /// Batch size; implied by --oa for solh and spolh.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of batches; implied by --oa for solh.
    #[arg(long)]
    pub t: Option<usize>,
    /// Dimension.
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base array, `bush:s=<s>` or `bosebush:lam=<lam>,s=<s>`.
    #[arg(long)]
    pub oa: Option<OaSource>,
    /// Batches kept by spolh.
    #[arg(long)]
    pub t_used: Option<usize>,
    /// Output file. Defaults to a generated name in $SLICED_SAA_OUT or the
    /// current directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["oa", "design"]))]
pub struct VerifyArgs {
    /// Integer CSV of an orthogonal array (levels 1..s), or a constructed
    /// array name such as `bush:s=4`.
    #[arg(long)]
    pub oa: Option<String>,
    /// Strength to check for --oa.
    #[arg(long, default_value_t = 2)]
    pub strength: usize,
    /// Columns for a coincidence count, 1-based and comma separated.
    #[arg(long, value_delimiter = ',')]
    pub subset: Vec<usize>,
    /// Design family CSV written by `gen`.
    #[arg(long)]
    pub design: Option<PathBuf>,
}

/// Flags for `run`. Every flag may also be given as `key=value` in the
/// --config file, using the flag name without dashes; flags win.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// newsvendor or twostage.
    #[arg(long)]
    pub problem: Option<String>,
    /// Newsvendor critical ratio.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Two-stage problem description file.
    #[arg(long)]
    pub problem_file: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub oa: Option<OaSource>,
    #[arg(long)]
    pub t_used: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    /// Dimension; defaults to the problem's.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of replicates (default 1000).
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Master seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory. Defaults to $SLICED_SAA_OUT, then `runs`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Summary CSV files, or directories searched for summary*.csv.
    #[arg(long = "in", num_args = 0..)]
    pub inputs: Vec<PathBuf>,
}
