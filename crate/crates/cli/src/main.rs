use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod input;
mod report;

/// Exit status for a dangerous verdict or a failed audit.
const DANGER: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "late-phase",
    version,
    about = "Sign and boundary analysis of local average treatment effects without monotonicity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for every random step.
    #[arg(long, global = true, env = "LATE_PHASE_SEED")]
    seed: Option<u64>,

    /// Print the machine-readable document instead of the text summary.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the machine-readable document (CSV for `dichotomize`) here.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plug-in estimates, bootstrap intervals and boundary classification from a CSV.
    Estimate(EstimateArgs),
    /// Classify (beta, k1, k2) against the sign-identification boundary.
    #[command(allow_negative_numbers = true)]
    Boundary(BoundaryArgs),
    /// Build an observationally equivalent process with the opposite complier sign.
    Forge(ForgeArgs),
    /// Check that two DGP documents induce the same observable law.
    Audit(AuditArgs),
    /// Monte Carlo indistinguishability experiment on a pair of processes.
    Simulate(SimulateArgs),
    /// Replace the outcome column by 1{y >= threshold}.
    #[command(allow_negative_numbers = true)]
    Dichotomize(DichotomizeArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct ColumnArgs {
    /// Outcome column.
    #[arg(long = "y-col", default_value = "y")]
    y: String,
    /// Treatment column (0/1).
    #[arg(long = "d-col", default_value = "d")]
    d: String,
    /// Instrument column (0/1).
    #[arg(long = "z-col", default_value = "z")]
    z: String,
}

#[derive(Args, Debug, Clone, Serialize)]
struct EstimateArgs {
    /// CSV file with a header row, or `-` for stdin.
    input: String,
    #[command(flatten)]
    columns: ColumnArgs,
    /// Bootstrap replications per statistic; 0 skips the bootstrap.
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    /// Confidence level of the bootstrap intervals.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Dichotomize the outcome at this threshold first.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// Cap on the defier share, for the interior and bounded-outcome rules.
    #[arg(long)]
    eta: Option<f64>,
    /// Outcome bound M for the bounded-outcome rule (needs --eta).
    #[arg(long)]
    bound: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RegimeArg {
    Interior,
    OneSided,
    General,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BoundaryArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    k1: f64,
    #[arg(long)]
    k2: f64,
    #[arg(long, value_enum, default_value = "interior")]
    regime: RegimeArg,
    /// Cap on the defier share (interior and general regimes).
    #[arg(long)]
    eta: Option<f64>,
    /// P(Y = 1, D = 1 | Z = 0) (one-sided regime).
    #[arg(long = "cell-prob")]
    cell_prob: Option<f64>,
    /// Outcome bound M (general regime).
    #[arg(long)]
    bound: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BinaryRegimeArg {
    Interior,
    OneSided,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ForgeArgs {
    /// DGP document of a process without defiers.
    dgp: String,
    /// Defier share of the twin (continuous and interior binary constructions).
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    /// Fraction of the available slack used as the truncation shift.
    #[arg(long = "delta-rule", default_value_t = 0.5)]
    delta_rule: f64,
    /// Construction for binary documents.
    #[arg(long, value_enum, default_value = "interior")]
    regime: BinaryRegimeArg,
    /// Lower bound on observable cell probabilities for binary constructions.
    #[arg(long, default_value_t = late_phase::adversarial::DEFAULT_FLOOR)]
    floor: f64,
    /// Write the twin DGP document on its own to this path.
    #[arg(long = "twin-out", value_name = "PATH")]
    #[serde(skip)]
    twin_out: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct AuditArgs {
    base: String,
    /// Twin DGP document, or the document written by `forge`.
    twin: String,
    /// Largest accepted equivalence distance.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    /// Also check the twin's membership in the parameter space with this defier cap.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    /// JSON configuration; without it the built-in twin pair is used.
    config: Option<String>,
    /// Procedures to run (repeatable). Defaults to all built-in procedures.
    #[arg(long = "procedure", value_name = "NAME")]
    procedures: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "bootstrap-replications")]
    bootstrap_replications: Option<usize>,
    /// Sample sizes for a consistency sweep on the base process.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Samples per size in the consistency sweep.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct DichotomizeArgs {
    input: String,
    #[command(flatten)]
    columns: ColumnArgs,
    #[arg(long)]
    threshold: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(commands::Status::Ok) => ExitCode::SUCCESS,
        Ok(commands::Status::Danger) => ExitCode::from(DANGER),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
