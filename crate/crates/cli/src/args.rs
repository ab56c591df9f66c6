use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clx_core::flows::Method;

#[derive(Debug, Parser)]
#[command(
    name = "clx",
    version,
    about = "Analyze, certify, design and simulate Laplacian flows on complex-weighted digraphs",
    after_help = "Set CLX_LOG (e.g. CLX_LOG=debug) to control log verbosity on stderr."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Connectivity, spectrum, kernel vectors and walk-sum report
    Analyze(CommonArgs),
    /// Eventual positivity / non-negativity certificates and the consensus verdict
    Certify(CommonArgs),
    /// Simulate the flow from a seeded random initial state
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Build the modified Laplacian with reassigned nonzero spectrum
    Design {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        targets: TargetArgs,
    },
    /// Random-walk Laplacian and influence vector
    Diffuse(CommonArgs),
    /// Keep or modify the flow, then simulate it
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        targets: TargetArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Graph file: canonical JSON, or EIES message-count CSV
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for report files; reports always go to stdout as well
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Input format; inferred from the extension (.csv means eies) when omitted
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Relative zero tolerance for the corank and walk-sum tests in `analyze`
    #[arg(long)]
    pub tol_zero: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Final time; defaults to 20/gap of the simulated matrix
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of samples including t = 0
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Exp)]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Args)]
pub struct TargetArgs {
    /// Comma-separated positive targets, paired with the nonzero eigenvalues
    /// ordered by real part then imaginary part (descending)
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Json,
    Eies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exp,
    Rk4,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exp => Method::ExpStep,
            MethodArg::Rk4 => Method::Rk4,
        }
    }
}
