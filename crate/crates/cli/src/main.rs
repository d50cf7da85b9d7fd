//! `sos-ggm`: solve for 4-periodic boundary laws, scan parameter ranges, build
//! gradient measure tables and run the invariant suite.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const EMPTY: u8 = 2;
    pub const INVARIANT: u8 = 3;
}

#[derive(Parser, Debug)]
#[command(
    name = "sos-ggm",
    version,
    about = "Periodic boundary laws and gradient Gibbs measures of the SOS model on Cayley trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the positive solutions (a, b) of the boundary-law system.
    Solve(SolveArgs),
    /// Sweep tau (or a (tau, h) grid for k = 2) and report solution counts.
    Scan(ScanArgs),
    /// Build a pinned or mixed gradient measure table on a finite window.
    Ggm(GgmArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Branching number: every vertex has k + 1 neighbours.
    #[arg(long)]
    pub k: u32,
    /// tau = theta + 1/theta > 2, as a decimal or p/q string.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    /// Field on heights ≡ 3 (mod 4).
    #[arg(long, allow_hyphen_values = true)]
    pub h1: Option<String>,
    /// Field on heights ≡ 1 (mod 4).
    #[arg(long, allow_hyphen_values = true)]
    pub h2: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: String,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: String,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// With --h-max, scan the k = 2 uniform-field grid.
    #[arg(long, allow_hyphen_values = true, requires = "h_max")]
    pub h_min: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "h_min")]
    pub h_max: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GgmArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Position of the law in the `solve` output.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Window radius R.
    #[arg(long, default_value_t = 1)]
    pub radius: u32,
    /// Gradient truncation M: each edge carries ζ in [-M, M].
    #[arg(long, default_value_t = 20)]
    pub window: u32,
    /// Residue class of the root height.
    #[arg(long, default_value_t = 0, conflicts_with = "mixed")]
    pub pin: u8,
    /// Sum the pinned weights over all four residues.
    #[arg(long)]
    pub mixed: bool,
    /// Compare a window table with the marginal of the next larger window.
    #[arg(long)]
    pub check_consistency: bool,
    /// Maximum table entries; overrides SOS_GGM_BUDGET.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Run only these checks (repeat the flag or separate with commas).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print JSON instead of one status line per check.
    #[arg(long)]
    pub json: bool,
    /// List the available checks and exit.
    #[arg(long)]
    pub list: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Ggm(a) => commands::ggm(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        // A closed downstream pipe (e.g. `| head`) is not an error.
        Err(commands::CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::from(exit::OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
