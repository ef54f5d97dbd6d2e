//! Command-line front end for the shared-volatility panel toolkit.

mod analyze;
mod config;
mod error;
mod output;
mod simulate;
mod study_cmd;
mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use sharedvol_core::Weighting;

#[derive(Parser)]
#[command(
    name = "sharedvol",
    version,
    about = "Panel time-series toolkit: per-series AR models with one shared GARCH volatility process"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Weighted,
    Unweighted,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Weighting {
        match w {
            WeightingArg::Weighted => Weighting::Weighted,
            WeightingArg::Unweighted => Weighting::Unweighted,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel with known ground truth
    Simulate {
        /// Named scenario (see `study --help` for the list)
        #[arg(long)]
        preset: Option<String>,
        /// TOML scenario file, alternative to --preset
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Master seed override
        #[arg(long)]
        seed: Option<u64>,
        /// Which replication of the scenario to materialize
        #[arg(long, default_value_t = 0)]
        replication: usize,
        /// Output directory
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Fit the two-pass shared-volatility model to a panel CSV
    Analyze {
        /// Input CSV: header row, optional leading time column, one column
        /// per series
        input: PathBuf,
        /// Output directory
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
        /// TOML file with analysis settings
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Seed for the GARCH fitting multistarts
        #[arg(long)]
        seed: Option<u64>,
        /// Residual averaging scheme
        #[arg(long, value_enum)]
        weighting: Option<WeightingArg>,
        /// Significance level for all diagnostic tests
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run a Monte-Carlo study and aggregate parameter recovery
    Study {
        /// Named scenario: study1-k20, study1-k100, study1-k400, study2,
        /// study3
        #[arg(long)]
        preset: Option<String>,
        /// TOML scenario file, alternative to --preset
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Replication count override
        #[arg(short, long)]
        replications: Option<usize>,
        /// Master seed override
        #[arg(long)]
        seed: Option<u64>,
        /// Residual averaging scheme override
        #[arg(long, value_enum)]
        weighting: Option<WeightingArg>,
        /// Significance level for all diagnostic tests
        #[arg(long)]
        alpha: Option<f64>,
        /// Output directory
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            preset,
            config,
            seed,
            replication,
            out,
        } => simulate::run(simulate::SimulateArgs {
            preset,
            config,
            seed,
            replication,
            out,
        }),
        Command::Analyze {
            input,
            out,
            config,
            seed,
            weighting,
            alpha,
        } => analyze::run(analyze::AnalyzeArgs {
            input,
            out,
            config,
            seed,
            weighting: weighting.map(Weighting::from),
            alpha,
        }),
        Command::Study {
            preset,
            config,
            replications,
            seed,
            weighting,
            alpha,
            out,
        } => study_cmd::run(study_cmd::StudyArgs {
            preset,
            config,
            replications,
            seed,
            weighting: weighting.map(Weighting::from),
            alpha,
            out,
        }),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
