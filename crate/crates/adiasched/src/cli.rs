use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::{cmd_bound, cmd_elcheck, cmd_evolve, cmd_gap, cmd_schedule, cmd_sweep, Outcome};
use crate::config::{merge, BoundArgs, ElcheckArgs, EvolveArgs, GapArgs, ScheduleCmdArgs, SweepArgs};
use crate::error::{invalid, CliError, CliResult, EXIT_OK, EXIT_VALIDATION};
use crate::formats::read_json;

/// Gap-adaptive schedules for adiabatic evolution: synthesis, simulation,
/// error bounds and scaling sweeps.
#[derive(Parser, Debug)]
#[command(name = "adiasched", version = crate::VERSION)]
pub struct Cli {
    /// JSON config object; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate a gap profile; optionally estimate the measure constant and
    /// build the piecewise-linear lower bound.
    Gap(GapArgs),
    /// Synthesize a schedule and write it as CSV with a JSON sidecar.
    Schedule(ScheduleCmdArgs),
    /// Propagate the Schrödinger equation under a schedule and record the
    /// adiabatic error.
    Evolve(EvolveArgs),
    /// Evaluate the error-bound components for a schedule.
    Bound(BoundArgs),
    /// Euler–Lagrange residuals of a schedule.
    Elcheck(ElcheckArgs),
    /// Minimal runtime over a range of sizes, with a log–log fit.
    Sweep(SweepArgs),
}

fn load_config(path: &Option<PathBuf>) -> CliResult<Map<String, Value>> {
    match path {
        None => Ok(Map::new()),
        Some(p) => match read_json::<Value>(p)? {
            Value::Object(m) => Ok(m),
            _ => Err(invalid(format!("{}: config must be a JSON object", p.display()))),
        },
    }
}

fn with_config<T, F>(flags: &T, file: &Map<String, Value>, f: F) -> CliResult<Outcome>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce(&T) -> CliResult<Outcome>,
{
    let merged = merge(flags, file)?;
    f(&merged)
}

fn json_flag(cmd: &Command, file: &Map<String, Value>) -> bool {
    let flag = match cmd {
        Command::Gap(a) => a.output.json,
        Command::Schedule(a) => a.output.json,
        Command::Evolve(a) => a.output.json,
        Command::Bound(a) => a.output.json,
        Command::Elcheck(a) => a.output.json,
        Command::Sweep(a) => a.output.json,
    };
    flag.or_else(|| file.get("json").and_then(Value::as_bool)).unwrap_or(false)
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let file = load_config(&cli.config)?;
    match &cli.command {
        Command::Gap(a) => with_config(a, &file, cmd_gap),
        Command::Schedule(a) => with_config(a, &file, cmd_schedule),
        Command::Evolve(a) => with_config(a, &file, cmd_evolve),
        Command::Bound(a) => with_config(a, &file, cmd_bound),
        Command::Elcheck(a) => with_config(a, &file, cmd_elcheck),
        Command::Sweep(a) => with_config(a, &file, cmd_sweep),
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_VALIDATION
                }
            };
        }
    };
    let json = load_config(&cli.config).map(|f| json_flag(&cli.command, &f)).unwrap_or(false);
    match execute(&cli) {
        Ok(o) => {
            for w in &o.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            let _ = if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&o.summary).unwrap_or_default())
            } else {
                write!(out, "{}", o.text)
            };
            EXIT_OK
        }
        Err(e) => report_error(&e, err),
    }
}

fn report_error(e: &CliError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}
