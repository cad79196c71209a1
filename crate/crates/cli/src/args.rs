use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l1exact::angles::ExternalPrefactor;
use l1exact::asymptotics::AsymVariant;
use l1exact::exactprob::Variant;
use l1exact::montecarlo::TrialMethod;

pub const THREADS_ENV: &str = "L1EXACT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "l1exact", version, about = "Exact and simulated failure probabilities of l1 recovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact failure probability from the angle sums, one row per m.
    Exact(ExactArgs),
    /// Monte Carlo failure rate with a Wilson interval.
    Simulate(SimulateArgs),
    /// Large-n rate exponent and weak threshold.
    Asym(AsymArgs),
    /// Run the invariant checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Pos,
    Std,
    PosSimplex,
    Cross,
}

impl VariantArg {
    pub fn variant(self) -> Variant {
        match self {
            VariantArg::Pos => Variant::PositiveL1,
            VariantArg::Std => Variant::StandardL1,
            VariantArg::PosSimplex => Variant::PositiveSimplex,
            VariantArg::Cross => Variant::Crosspolytope,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantArg::Pos => "pos",
            VariantArg::Std => "std",
            VariantArg::PosSimplex => "pos-simplex",
            VariantArg::Cross => "cross",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AsymVariantArg {
    Pos,
    Std,
}

impl AsymVariantArg {
    pub fn variant(self) -> AsymVariant {
        match self {
            AsymVariantArg::Pos => AsymVariant::Positive,
            AsymVariantArg::Std => AsymVariant::Standard,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AsymVariantArg::Pos => "pos",
            AsymVariantArg::Std => "std",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum MethodArg {
    #[default]
    Recovery,
    Nullspace,
}

impl MethodArg {
    pub fn method(self) -> TrialMethod {
        match self {
            MethodArg::Recovery => TrialMethod::Recovery,
            MethodArg::Nullspace => TrialMethod::NullSpace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum PrefactorArg {
    #[default]
    Gaussian,
    Printed,
}

impl PrefactorArg {
    pub fn prefactor(self) -> ExternalPrefactor {
        match self {
            PrefactorArg::Gaussian => ExternalPrefactor::Gaussian,
            PrefactorArg::Printed => ExternalPrefactor::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Level {
    #[default]
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record the wall time (makes output differ between runs).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    #[arg(long)]
    pub k: u32,
    /// Single value, `a..b` or `a..=b` (end included).
    #[arg(long)]
    pub m: String,
    #[arg(long)]
    pub n: u32,
    /// Add the per-term table (long format).
    #[arg(long)]
    pub breakdown: bool,
    /// Write a gnuplot script plotting the CSV given by --out.
    #[arg(long)]
    pub emit_plot_script: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PrefactorArg::Gaussian, hide = true)]
    pub external_prefactor: PrefactorArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub m: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to $L1EXACT_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Recovery)]
    pub method: MethodArg,
    #[arg(long)]
    pub emit_plot_script: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AsymArgs {
    #[arg(long, value_enum)]
    pub variant: AsymVariantArg,
    /// Single value or `start..end:step`.
    #[arg(long)]
    pub beta: String,
    /// Single value, `start..end:step`, or `auto` for the weak threshold.
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub emit_plot_script: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = PrefactorArg::Gaussian, hide = true)]
    pub external_prefactor: PrefactorArg,
    #[command(flatten)]
    pub output: OutputArgs,
}
