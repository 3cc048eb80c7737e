//! Command-line surface.

use std::path::PathBuf;

use athermal::typeclass::Window;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "athermal", version, about = "Finite-size thermodynamic resource conversions")]
pub struct Cli {
    /// Worker threads for grid commands.
    #[arg(long, env = "ATHERMAL_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Asymptotic distillation rate by closed form and by relative entropies.
    Rate(RateArgs),
    /// Distillation plan as JSON plus a summary line.
    Distill(PlanArgs),
    /// Formation plan as JSON plus a summary line.
    Form(PlanArgs),
    /// Distillation yield over a grid of copy numbers, as CSV.
    Sweep(SweepArgs),
    /// Executes a small distillation plan exactly.
    Simulate(SimulateArgs),
    /// Exhaust reductions of an executed plan.
    Exhaust(ExhaustArgs),
    /// Overlap of a flat reference frame with its shift.
    Frame(FrameArgs),
    /// Error budget for forming coherent copies.
    Coherent(CoherentArgs),
    /// Work extractable from d-level copies.
    Work(WorkArgs),
    /// Monotones of one state, or property checks on random pairs.
    Monotones(MonotoneArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// Half-width `width` standard deviations.
    Binomial,
    /// Half-width `width * sqrt(n)`.
    RootN,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Typicality window half-width.
    #[arg(long, default_value_t = 3.0)]
    pub width: f64,
    #[arg(long, value_enum, default_value_t = Scale::Binomial)]
    pub scale: Scale,
}

impl WindowArgs {
    pub fn window(&self) -> Window {
        match self.scale {
            Scale::Binomial => Window::binomial(self.width),
            Scale::RootN => Window::root_n(self.width),
        }
    }
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// Excited population of the resource.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Excited population of the target; 1 is the pure excited state.
    #[arg(long, default_value_t = 1.0)]
    pub target_p: f64,
    /// JSON state file with `energies` and either `populations` or `re`/`im` matrices.
    #[arg(long, conflicts_with = "p")]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Bath size; defaults to the size rule of the protocol.
    #[arg(long)]
    pub ell: Option<u64>,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Plan JSON destination; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    pub ns: Vec<u64>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub ell: u64,
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Skip the density-matrix run even when the plan is small enough.
    #[arg(long)]
    pub classical_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExhaustArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub ell: Option<u64>,
    #[arg(long, default_value_t = 0.75)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Systems per reduced block.
    #[arg(long, default_value_t = 1)]
    pub block: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FrameArgs {
    /// Number of levels in the flat window.
    #[arg(long = "N")]
    pub window_size: u64,
    #[arg(long)]
    pub delta: u64,
}

#[derive(Args, Debug)]
pub struct CoherentArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub a_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a_im: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    pub b_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub b_im: f64,
    /// Weight of the first pure component.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Also simulate the protocol exactly (small n only).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WorkArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Vec<f64>,
    /// Level frequencies of the input.
    #[arg(long, value_delimiter = ',')]
    pub freqs: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub ell: Option<u64>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MonotoneArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub energies: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Diagonal state; omit to run random-pair checks instead.
    #[arg(long, value_delimiter = ',')]
    pub populations: Option<Vec<f64>>,
    /// Number of random state pairs to check.
    #[arg(long, default_value_t = 1000)]
    pub pairs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
