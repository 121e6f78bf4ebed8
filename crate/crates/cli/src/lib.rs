//! Command-line front end: argument parsing, validation, dispatch to the
//! library and deterministic CSV/JSON artifacts.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{Artifact, Format};
use rpw_core::Error;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for runtime failures.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit code for invalid arguments or violated preconditions.
pub const EXIT_VALIDATION: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RPW_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "rpw", version, about = "Critical points of random plane waves")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed; required by every stochastic command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: `$RPW_OUT_DIR/<command>.<ext>` or the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one field realization and export its coefficients.
    SampleField(commands::SampleFieldArgs),
    /// Locate and classify the critical points of one realization.
    FindCritical(commands::FindCriticalArgs),
    /// Density of critical points per unit area.
    K1(commands::K1Args),
    /// Two-point function at one separation.
    K2(commands::K2Args),
    /// Type-restricted two-point functions at one separation.
    K2Typed(commands::K2TypedArgs),
    /// Two-point function on a log-spaced grid of separations.
    K2Curve(commands::K2CurveArgs),
    /// Second factorial moment of the count in a disc by quadrature.
    Moment2(commands::Moment2Args),
    /// Count moments and probabilities from simulated fields.
    McMoments(commands::McMomentsArgs),
    /// P(N >= 2) for critical points, Poisson and Ginibre processes.
    CompareProcesses(commands::CompareArgs),
    /// Residual slopes of the small-separation expansions.
    VerifySeries(commands::VerifySeriesArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleField(_) => "sample-field",
            Command::FindCritical(_) => "find-critical",
            Command::K1(_) => "k1",
            Command::K2(_) => "k2",
            Command::K2Typed(_) => "k2-typed",
            Command::K2Curve(_) => "k2-curve",
            Command::Moment2(_) => "moment2",
            Command::McMoments(_) => "mc-moments",
            Command::CompareProcesses(_) => "compare-processes",
            Command::VerifySeries(_) => "verify-series",
        }
    }

    fn stochastic(&self) -> bool {
        !matches!(self, Command::K1(_) | Command::VerifySeries(_))
    }
}

/// Failure of a run, mapped onto an exit code.
#[derive(Debug)]
pub enum RunError {
    Validation(String),
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "invalid input: {m}"),
            RunError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Precondition(_) => RunError::Validation(e.to_string()),
            _ => RunError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. The one-line JSON summary goes to standard output,
/// diagnostics to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("rpw {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns its summary line.
pub fn execute(cli: &Cli) -> Result<String, RunError> {
    if cli.command.stochastic() && cli.global.seed.is_none() {
        return Err(RunError::Validation(format!(
            "--seed is required for `{}`",
            cli.command.name()
        )));
    }
    if cli.global.threads == Some(0) {
        return Err(RunError::Validation("--threads must be >= 1".into()));
    }
    let format = match cli.global.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let ctx = commands::Context {
        command: cli.command.name(),
        seed: cli.global.seed.unwrap_or(0),
        format,
        out: output::resolve_path(cli.global.out.as_deref(), cli.command.name(), format),
    };
    let go = || commands::dispatch(&cli.command, &ctx);
    match cli.global.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Runtime(e.to_string()))?
            .install(go),
        None => go(),
    }
}
