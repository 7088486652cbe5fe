mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Simulator and threshold analysis for BB84 without public basis
/// announcement, followed by two-way post-processing.
#[derive(Parser, Debug)]
#[command(name = "twoway-qkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// Later occurrences of an option win, which is how --config values get overridden.
#[derive(Subcommand, Debug)]
#[command(args_override_self = true)]
enum Command {
    /// Run one protocol session end to end.
    Simulate(SessionArgs),
    /// Tolerable error rate of a schedule on an initial-condition family.
    Threshold(ThresholdArgs),
    /// Exhaustive search for the schedule pattern with the highest threshold.
    ScheduleSearch(SearchArgs),
    /// Rate accounting for a session against standard sifting.
    Keyrate(SessionArgs),
    /// One-way coset reconciliation on every error pattern of a given weight.
    ReconcileDemo(DemoArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SessionArgs {
    /// Check-block size; 2n qubits are sent.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Repetitions of the pre-shared basis seed; must divide 2n.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Depolarizing noise given as its bit-error rate (X, Y, Z each at half of it).
    #[arg(long, conflicts_with_all = ["p_x", "p_y", "p_z"])]
    p_depol: Option<f64>,
    #[arg(long)]
    p_x: Option<f64>,
    #[arg(long)]
    p_y: Option<f64>,
    #[arg(long)]
    p_z: Option<f64>,
    #[arg(long, value_enum, default_value_t = AdversaryArg::None)]
    adversary: AdversaryArg,
    #[arg(long, default_value_t = 0.20)]
    abort_threshold: f64,
    /// `alternating`, `adaptive` or `fixed:<pattern>` such as `fixed:BBP`.
    #[arg(long, default_value = "alternating")]
    schedule: String,
    /// Bit-error estimate below which distillation hands over to reconciliation.
    #[arg(long, default_value_t = 0.10)]
    handoff: f64,
    /// Bits sacrificed per estimate (default: min(1024, a quarter of what remains)).
    #[arg(long)]
    sacrifice: Option<usize>,
    /// Distillation rounds to run even when the check bits look clean.
    #[arg(long, default_value_t = 0)]
    min_rounds: usize,
    /// Allowed predicted chance that some reconciliation block fails.
    #[arg(long, default_value_t = 1e-3)]
    max_reconcile_failure: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Code file for C1 (needs --code-c2).
    #[arg(long, requires = "code_c2")]
    code_c1: Option<PathBuf>,
    /// Code file for C2 (needs --code-c1).
    #[arg(long, requires = "code_c1")]
    code_c2: Option<PathBuf>,
    #[arg(long)]
    transcript_out: Option<PathBuf>,
    /// Round log as CSV.
    #[arg(long)]
    rounds_out: Option<PathBuf>,
    /// Print the keys themselves rather than their hashes.
    #[arg(long)]
    reveal_keys: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AdversaryArg {
    None,
    InterceptResend,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Independent,
    Depolarizing,
    WorstCase,
}

#[derive(Args, Debug, Clone)]
pub struct AnalysisArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::WorstCase)]
    family: FamilyArg,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Spacing of the q_y grid for the worst-case family.
    #[arg(long, default_value_t = 1e-3)]
    grid_step: f64,
    #[arg(long, default_value_t = 200)]
    max_rounds: usize,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ThresholdArgs {
    /// `alternating`, a pattern such as `BBP`, or `fixed:<pattern>`.
    #[arg(long, default_value = "alternating")]
    schedule: String,
    /// Spacing of the monotonicity scan.
    #[arg(long, default_value_t = 0.005)]
    scan_step: f64,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    /// Ranked patterns to print.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 1)]
    error_weight: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, requires = "code_c2")]
    code_c1: Option<PathBuf>,
    #[arg(long, requires = "code_c1")]
    code_c2: Option<PathBuf>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

pub const EXIT_ABORT: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Internal(String),
}

impl From<twoway_qkd::Error> for Failure {
    fn from(e: twoway_qkd::Error) -> Self {
        use twoway_qkd::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidCode(_)
            | E::InvalidDistribution(_)
            | E::Repetition { .. }
            | E::Parse { .. }
            | E::DimensionMismatch { .. } => Failure::Config(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_config_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Threshold(a) => commands::threshold(&a),
        Command::ScheduleSearch(a) => commands::schedule_search(&a),
        Command::Keyrate(a) => commands::keyrate(&a),
        Command::ReconcileDemo(a) => commands::reconcile_demo(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
