use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bagreg::basis::PolyFamily;
use bagreg::moments::NormalizationMode;
use bagreg::regression::Estimator;
use bagreg::synthetic::TargetFunction;
use bagreg_cli::{cmd_eval, cmd_fit, cmd_gen, cmd_predict, cmd_spectrum, GridSpec};

#[derive(Parser)]
#[command(
    name = "bagreg",
    version,
    about = "Regression over bags of observations: generate, fit, predict, decompose"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset of labeled bags.
    Gen {
        /// Target function: linear, runge or step.
        #[arg(long)]
        target: TargetFunction,
        /// Observations per bag.
        #[arg(long = "N")]
        bag_size: usize,
        /// Number of bags.
        #[arg(long = "M")]
        bag_count: usize,
        /// Noise half-width added to each observation.
        #[arg(long = "R", allow_hyphen_values = true)]
        noise: f64,
        /// Seed for the deterministic generator.
        #[arg(long)]
        seed: u64,
        /// Dataset file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model to a dataset file.
    Fit {
        /// Dataset file to read.
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of basis functions.
        #[arg(long)]
        dx: usize,
        /// Basis family: chebyshev, legendre or monomial.
        #[arg(long, default_value = "chebyshev")]
        basis: PolyFamily,
        /// Moment normalization: raw_sum or size_normalized.
        #[arg(long, default_value = "size_normalized")]
        mode: NormalizationMode,
        /// Model file to write.
        #[arg(long = "out-model")]
        out_model: PathBuf,
    },
    /// Evaluate both estimators on a grid of points.
    Predict {
        /// Model file to read.
        #[arg(long)]
        model: PathBuf,
        /// Left edge of the evaluation grid.
        #[arg(long, default_value_t = -1.1, allow_hyphen_values = true)]
        lo: f64,
        /// Right edge of the evaluation grid.
        #[arg(long, default_value_t = 1.1, allow_hyphen_values = true)]
        hi: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 221)]
        count: usize,
        /// CSV file to write (columns x,a_ls,a_rn).
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the outcome spectrum and per-point outcome probabilities.
    Spectrum {
        /// Model file to read.
        #[arg(long)]
        model: PathBuf,
        /// Left edge of the evaluation grid.
        #[arg(long, default_value_t = -1.1, allow_hyphen_values = true)]
        lo: f64,
        /// Right edge of the evaluation grid.
        #[arg(long, default_value_t = 1.1, allow_hyphen_values = true)]
        hi: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 221)]
        count: usize,
        /// CSV file for the outcome levels (columns i,y_i).
        #[arg(long = "out-outcomes")]
        out_outcomes: PathBuf,
        /// CSV file for the probabilities (columns x,P_0,...).
        #[arg(long = "out-probabilities")]
        out_probabilities: PathBuf,
    },
    /// Predict every bag of a dataset and report the error against labels.
    Eval {
        /// Model file to read.
        #[arg(long)]
        model: PathBuf,
        /// Dataset file to evaluate on.
        #[arg(long)]
        data: PathBuf,
        /// Estimator: ls or rn.
        #[arg(long, default_value = "rn")]
        estimator: Estimator,
        /// Report file to write.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen {
            target,
            bag_size,
            bag_count,
            noise,
            seed,
            out,
        } => cmd_gen(target, bag_size, bag_count, noise, seed, &out),
        Command::Fit {
            input,
            dx,
            basis,
            mode,
            out_model,
        } => cmd_fit(&input, dx, basis, mode, &out_model),
        Command::Predict {
            model,
            lo,
            hi,
            count,
            out,
        } => GridSpec::new(lo, hi, count).and_then(|grid| cmd_predict(&model, &grid, &out)),
        Command::Spectrum {
            model,
            lo,
            hi,
            count,
            out_outcomes,
            out_probabilities,
        } => GridSpec::new(lo, hi, count)
            .and_then(|grid| cmd_spectrum(&model, &grid, &out_outcomes, &out_probabilities)),
        Command::Eval {
            model,
            data,
            estimator,
            out,
        } => cmd_eval(&model, &data, estimator, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
