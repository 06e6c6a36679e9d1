use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sobolev-split", version, about = "Time-split Leapfrog/Crank-Nicolson solver for the 2D Sobolev / RLW equation")]
pub struct Cli {
    /// JSON file with default values for any flag; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one problem on one grid.
    Solve(SolveArgs),
    /// Run a problem on M = 2^l for a range of levels and tabulate rates.
    Convergence(ConvergenceArgs),
    /// Check the discrete summation identities and stencil orders.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SchemeArgs {
    /// example1 | example2 | example3 | zero | manufactured:poly|trig|gauss
    #[arg(long)]
    pub problem: Option<String>,
    /// Time step: `auto` (min(hx, hy)^{4/3}) or a positive number.
    #[arg(long)]
    pub k: Option<String>,
    /// Final time.
    #[arg(long = "T", value_name = "T")]
    pub t_final: Option<f64>,
    /// exact | paper-copy
    #[arg(long)]
    pub boundary: Option<String>,
    /// derived | paper
    #[arg(long = "rhs-sign")]
    pub rhs_sign: Option<String>,
    /// on | off
    #[arg(long = "leapfrog-alpha")]
    pub leapfrog_alpha: Option<String>,
    /// Picard stopping tolerance, relative to `1 + ||U||`.
    #[arg(long = "picard-tol")]
    pub picard_tol: Option<f64>,
    /// Picard iteration cap per implicit sub-step.
    #[arg(long = "picard-max-iters")]
    pub picard_max_iters: Option<usize>,
    /// Coefficient of the pseudo-parabolic term (manufactured and zero problems only).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Advection coefficient override.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Diffusion coefficient override.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Number of subdivisions per direction.
    #[arg(long = "M", value_name = "M")]
    pub m: Option<usize>,
    /// One-row table `h,k,norm_u,norm_U,error,rate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the solution slice `x,y,u,U,e` nearest to time T into CSV.
    #[arg(long = "dump-at", num_args = 2, value_names = ["T", "CSV"])]
    pub dump_at: Option<Vec<String>>,
    /// Heatmap of the final (or dumped) solution.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Level range `a..b` (M = 2^l).
    #[arg(long)]
    pub levels: Option<String>,
    /// Convergence table `h,k,norm_u,norm_U,error,rate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Log-log error chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Grid size (at least 8).
    #[arg(long = "M", value_name = "M")]
    pub m: Option<usize>,
    /// Seed for the random test fields.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test the first-derivative stencil with its printed orientation.
    #[arg(long = "printed-sign")]
    pub printed_sign: bool,
}
