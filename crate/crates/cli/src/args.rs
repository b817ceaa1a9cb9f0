use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "noisy-votes", version, about = "Budgeted labeling experiments with noisy oracles")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correct-label probability against the number of validations.
    Curves(CurvesArgs),
    /// Run a labeling campaign described by a JSON config.
    Simulate(SimulateArgs),
    /// Heads-up showdown equity after the flop.
    #[command(subcommand)]
    Poker(PokerCommand),
    /// Chi-square goodness of fit of a vote tally against uniform.
    Chi(ChiArgs),
    /// Relabel an MNIST label file through a noisy oracle.
    MnistRelabel(MnistArgs),
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    /// Comma-separated noise levels, e.g. `0.1,0.2,0.3`.
    #[arg(long, required = true, value_delimiter = ',')]
    pub noise: Vec<f64>,
    /// Validation counts: a comma-separated mix of values and ranges, e.g. `1-100` or `1,3,5,11-15`.
    #[arg(long)]
    pub validations: String,
    /// Monte Carlo trials per cell; 0 skips simulation.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub s_max: Option<u64>,
    #[arg(long)]
    pub examples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PokerCommand {
    /// Exact equity over every river.
    Equity(PokerArgs),
    /// Sampled showdowns.
    Sample(PokerSampleArgs),
}

#[derive(Debug, Args)]
pub struct PokerArgs {
    /// Seven cards: P1's hand, P2's hand, the flop. `--` separators are optional.
    #[arg(required = true, num_args = 1.., allow_hyphen_values = true, trailing_var_arg = true)]
    pub cards: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PokerSampleArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub hands: PokerArgs,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    /// Vote count per label.
    #[arg(required = true, num_args = 2..)]
    pub counts: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MnistArgs {
    /// Image file, checked against the label count when given; never modified.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub noise: f64,
    #[arg(long)]
    pub policy: String,
    #[arg(long)]
    pub s_max: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}
