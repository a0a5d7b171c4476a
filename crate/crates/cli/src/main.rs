//! `mechkit`: batch analyses of mechanism instances.
//!
//! Every command reads JSON instance files and writes one report, as JSON
//! (exact rationals as strings) or as a text table. Exit status is 0 on
//! success, 2 when an analysis refuses an input outside its hypotheses, and
//! 1 on I/O, usage or schema errors.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mechkit::oracle::DistKind;

#[derive(Debug, Parser)]
#[command(name = "mechkit", version, about = "Exact analysis of mechanisms without transfers")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for `generate`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Drop types with zero marginal probability instead of rejecting them.
    #[arg(long, global = true)]
    pub drop_zero_types: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    General,
    Additive,
    Mixed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginals, rank, independence and expected values.
    Inspect { instance: PathBuf },
    /// Incentive compatibility of a mechanism (any JSON file with an "x" field).
    CheckIc { instance: PathBuf, mechanism: PathBuf },
    /// Value and optimal strategies of the zero-sum game with payoff matrix x.
    Maximin { instance: PathBuf, mechanism: PathBuf },
    /// Does the distribution of A span that of B?
    Spans { a: PathBuf, b: PathBuf },
    /// Rank and extremality in the spanning order.
    Classify {
        instance: PathBuf,
        /// Also compute the largest spread max x(θ) − x(θ') over IC mechanisms.
        #[arg(long)]
        spread: bool,
    },
    /// Project the weighted objective onto the belief-section subspace.
    Additivity { instance: PathBuf },
    /// Build a profitable mechanism or certify that none exists.
    Construct { instance: PathBuf },
    /// The constrained optimal-transport criterion.
    Transport { instance: PathBuf },
    /// Covariance test between the belief updates of A and B.
    Orthogonal { a: PathBuf, b: PathBuf },
    /// Split an IC mechanism into transportation-polytope extreme points.
    Decompose { instance: PathBuf, mechanism: PathBuf },
    /// Best match-your-opponent mechanism.
    Myo { instance: PathBuf },
    /// Profitability of an n-agent allocation instance.
    AllocN { instance: PathBuf },
    /// Solve the principal's problem directly as a linear program.
    Oracle { instance: PathBuf },
    /// Write a random instance.
    Generate {
        /// Types per agent, e.g. `2x3` or `2,2,2`.
        #[arg(long, default_value = "2x2")]
        shape: String,
        /// independent | correlated | full-rank | conditionally-independent:K | unbiased-n-alloc
        #[arg(long, default_value = "independent")]
        kind: DistKind,
        #[arg(long, value_enum, default_value_t = Objective::General)]
        objective: Objective,
        /// Shift the objective to zero mean.
        #[arg(long)]
        zero_mean: bool,
        /// Write an allocation instance even for the `independent` kind.
        #[arg(long)]
        allocation: bool,
        /// Allow the allocation to be disposed of.
        #[arg(long)]
        disposal: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mechkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
