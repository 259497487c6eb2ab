use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mimo-rate", version, about = "Achievable rate of Rician MIMO links with hardware impairments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one link configuration with one or more methods.
    Rate(RateArgs),
    /// Sweep one parameter of a baseline configuration.
    Sweep(SweepArgs),
    /// Required series terms for the five reference configurations.
    Table1(Table1Args),
    /// Rate against SNR for a 2×2 link, K ∈ {1, 5, 10}.
    Fig1(FigArgs),
    /// Rate against array size N = N_t = N_r at 10 dB.
    Fig2(Fig2Args),
    /// Relative rate loss against array size for K ∈ {0, 1, 10, 100}.
    Fig3(FigArgs),
    /// Quick internal consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the wall_time_ms column (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    #[arg(long, default_value_t = 2)]
    pub nt: usize,
    #[arg(long, default_value_t = 2)]
    pub nr: usize,
    #[arg(long, default_value_t = 0.15)]
    pub delta_t: f64,
    #[arg(long, default_value_t = 0.15)]
    pub delta_r: f64,
    /// Rician K-factor (linear).
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[command(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// "uniform-sine", "broadside" or a comma-separated list of arrival
    /// angles in radians, one per receive antenna.
    #[arg(long)]
    pub angles: Option<String>,
    /// Element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    pub spacing: f64,
    /// Jitter every arrival angle by at most this many radians.
    #[arg(long)]
    pub perturb_angles: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Comma-separated subset of exact, mc, highsnr, asym-nt, asym-nr, asym-de.
    #[arg(long, default_value = "exact")]
    pub method: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Series truncation tolerance, bits/s/Hz.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    #[value(name = "snr_db", alias = "snr-db")]
    SnrDb,
    #[value(name = "K")]
    K,
    /// N_t = N_r = N
    #[value(name = "N")]
    N,
    #[value(name = "Nt")]
    Nt,
    #[value(name = "Nr")]
    Nr,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub var: SweepVar,
    /// Strictly increasing, comma-separated values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub link: LinkArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoUnits {
    Db,
    Linear,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// How the published unitless SNR column is read.
    #[arg(long, value_enum, default_value_t = RhoUnits::Db)]
    pub rho_units: RhoUnits,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigArgs {
    /// Monte Carlo trials per point (default 10⁵ for fig1, 10⁴ otherwise).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Largest array size for fig2/fig3.
    #[arg(long, default_value_t = 64)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Defaults to broadside for the figure commands.
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[command(flatten)]
    pub fig: FigArgs,
    #[arg(long = "K-list", value_delimiter = ',', default_values_t = [1.0, 10.0])]
    pub k_list: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 20_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
