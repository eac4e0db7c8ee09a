use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Mean-field spin-1 Potts model: exact finite-N results, equations of
/// state, cusp loci and Monte Carlo cross-checks.
#[derive(Debug, Clone, Parser)]
#[command(name = "mfpotts", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file (default: stdout)
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,

    /// Seed for random test points and Monte Carlo chains
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the identity battery and emit a JSON report
    Verify(VerifyArgs),
    /// All stationary points of the free energy at one point
    Eos(PointArgs),
    /// Branch profile along x at fixed y, for one t or a range of t
    Sweep(SweepArgs),
    /// Cusp loci table and event timeline
    Cusp(CuspArgs),
    /// Convergence of the finite-N free energy to its limit
    FiniteN(FiniteNArgs),
    /// Metropolis estimate compared with exact enumeration
    Mc(McArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    /// Largest N in the diffusion-identity battery
    #[arg(long)]
    pub max_n: Option<usize>,

    /// Random points per N
    #[arg(long)]
    pub points: Option<usize>,

    /// Rows per locus for the cusp checks
    #[arg(long)]
    pub resolution: Option<usize>,

    /// Replace the Z_yy coefficient of the diffusion identity
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub inject_diffusion_yy: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Number of x samples
    #[arg(long)]
    pub samples: Option<usize>,
    /// Single coupling; conflicts with the range flags
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t_min", "t_max", "t_steps"])]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["t_max", "t_steps"])]
    pub t_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["t_min", "t_steps"])]
    pub t_max: Option<f64>,
    #[arg(long, requires_all = ["t_min", "t_max"])]
    pub t_steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CuspArgs {
    /// Rows per locus
    #[arg(long)]
    pub resolution: Option<usize>,

    /// Where to write the events JSON in csv mode (default: next to --out
    /// with extension .events.json)
    #[arg(long, value_name = "PATH")]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FiniteNArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Comma-separated system sizes
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub point: PointArgs,

    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,

    /// Run the ten-point single-phase battery instead of one point
    #[arg(long)]
    pub battery: bool,
}
