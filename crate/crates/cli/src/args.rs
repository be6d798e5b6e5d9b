use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "evmix", version, about = "Fit, simulate and check positive-stable mixtures of extreme value laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit of the random-effects or hidden MA(1) model
    Fit(FitArgs),
    /// Exact simulation from one of the model families
    Simulate(SimulateArgs),
    /// Model checks for a random-effects fit
    Diagnose(DiagnoseArgs),
    /// Exceedance probability and return period
    Risk(RiskArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Re,
    Ma1,
    Ar1,
    Spatial,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaStart {
    Half,
    Double,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    /// CSV with `group,value` (re) or `series,index,value` (ma1)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Starting points for the MA(1) search
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
    /// Seed for the random MA(1) starting points
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Default MA(1) start for sigma: half or double the PWM scale
    #[arg(long, value_enum, default_value_t = SigmaStart::Half)]
    pub sigma_start: SigmaStart,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub alpha: f64,
    /// MA(1) coefficient
    #[arg(long)]
    pub b: Option<f64>,
    /// GEV shape of the conditional margins; Gumbel when absent
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// AR(1) coefficient
    #[arg(long)]
    pub rho: Option<f64>,
    /// Spatial weight
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Outer stable index of the hierarchical model
    #[arg(long)]
    pub beta: Option<f64>,
    /// Inner groups per outer group (hierarchical)
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Group size, series length, grid side or cell size
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Independent replicates: groups, series or fields
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, required = true)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Document written by `evmix fit --model re`
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Report path; plot CSVs are written next to it
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Number of groups
    #[arg(long)]
    pub m: u64,
    /// Blocks per group
    #[arg(long)]
    pub n: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Random-effects fit document; supplies parameters and a delta-method interval
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
