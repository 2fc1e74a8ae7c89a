use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Nash-welfare-modulated lending simulations and fairness comparisons.
#[derive(Debug, Parser)]
#[command(name = "nwpfair", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the multi-epoch lending simulation.
    Simulate(SimulateArgs),
    /// Compare decision methods under one seed and dataset.
    Compare(CompareArgs),
    /// Build a population sample from a raw dataset.
    Prepare(PrepareArgs),
}

#[derive(Debug, Args)]
pub struct RunInput {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population sample JSON written by `prepare`.
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    pub data: Option<PathBuf>,
    /// Generate a synthetic population from the run seed.
    #[arg(long)]
    pub synthetic: bool,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the population size (and the synthetic sample size).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: RunInput,
    /// Decision method: nwp, ceo or none.
    #[arg(long, default_value = "nwp")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: RunInput,
    /// Comma-separated subset of nwp, ceo, none.
    #[arg(long, default_value = "nwp,ceo")]
    pub methods: String,
    /// Held-out splits for COMPAS-style samples.
    #[arg(long, default_value_t = 3)]
    pub splits: usize,
    /// Training share of each split.
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Dataset name: adult, compas or synthetic.
    #[arg(long)]
    pub dataset: String,
    /// Raw CSV (not needed for synthetic).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Schema JSON replacing the built-in one.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample size (adult, synthetic).
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Column to balance the sample on (adult); must be the schema's group column.
    #[arg(long)]
    pub balance: Option<String>,
    /// Keep rows with age at most this (compas).
    #[arg(long, default_value_t = 35)]
    pub max_age: u32,
    /// Keep rows with priors strictly below this (compas).
    #[arg(long, default_value_t = 3)]
    pub max_priors: u32,
    /// Standard deviation of the noise added to proxy incomes (adult).
    #[arg(long, default_value_t = 25.0)]
    pub noise_sd: f64,
}
