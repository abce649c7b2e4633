use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::matrices::{MatrixArgs, SketchArgs};

#[derive(Debug, Parser)]
#[command(name = "cqrrpt", version, about = "Randomized pivoted QR experiments and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trailing-norm and diagonal-ratio curves of CQRRPT against Householder QRCP.
    PivotQuality(PivotQualityArgs),
    /// Per-phase timings (best of several runs) next to the flop model.
    Profile(ProfileArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Write a test matrix in Matrix Market format.
    Gen(GenArgs),
    /// Factor a Matrix Market file and write Q, R and the pivots.
    Factor(FactorArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PivotQualityArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub sketch: SketchArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Table destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "pivot-quality")]
    pub experiment: String,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub sketch: SketchArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Runs per measurement; the fastest is reported.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Accepted for compatibility; every kernel is serial.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Timing table destination; stderr when omitted.
    #[arg(long)]
    pub timings: Option<PathBuf>,
    #[arg(long, default_value = "profile")]
    pub experiment: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Replace every check's trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Run a single check, by number (1-12) or name.
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    /// Matrix Market input.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving Q.mtx, R.mtx, J.mtx and pivots.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub sketch: SketchArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}
