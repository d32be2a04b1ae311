//! `onetwo`: partition functions, correlations, phase scans, samples and
//! cross-checks for the 1-2 model on the hexagonal torus.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 bad input,
//! 3 numerical failure, 4 refusal at critical parameters.

mod commands;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use onetwo_core::Error;

use crate::spec::{Command, Mode, RunSpec, ScanGrid};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    Core(Error),
    Io(String),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => match e {
                Error::NearCritical { .. } => 4,
                Error::Symmetry(_)
                | Error::Construction(_)
                | Error::QuadratureSingularity(..)
                | Error::DegenerateSum(_)
                | Error::ImaginaryResidue(_)
                | Error::DecorationMismatch(_) => 3,
                _ => 2,
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "onetwo",
    version,
    about = "Exact, Pfaffian and Monte Carlo computations for the 1-2 model"
)]
#[command(args_conflicts_with_subcommands = true, arg_required_else_help = true)]
struct Cli {
    /// Run the command described by a RunSpec JSON document.
    #[arg(long, value_name = "PATH")]
    json_spec: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
#[command(allow_negative_numbers = true)]
enum Cmd {
    /// Z_n from four Pfaffians, with the enumeration value when n <= 2.
    Partition(Common),
    /// Two-edge correlations along a NW/SE diagonal.
    Correlate {
        #[command(flatten)]
        common: Common,
        /// Report only these separations (comma separated).
        #[arg(long, value_delimiter = ',')]
        separations: Option<Vec<usize>>,
    },
    /// Phase classification over a line in `a` or over the simplex.
    PhaseScan {
        #[command(flatten)]
        common: Common,
        /// Line grid FROM:TO:STEP in `a`, with `b` and `c` fixed.
        #[arg(long, value_name = "FROM:TO:STEP", conflicts_with = "ternary")]
        a_range: Option<String>,
        /// Simplex grid `a + b + c = 1` with the given resolution.
        #[arg(long, value_name = "R")]
        ternary: Option<usize>,
    },
    /// Monte Carlo realizations and cluster statistics.
    Sample(Common),
    /// Enumeration, Ising and polygon correlations at n = 2.
    Crosscheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Torus size.
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(short = 'a', default_value_t = 1.0)]
    a: f64,
    #[arg(short = 'b', default_value_t = 1.0)]
    b: f64,
    #[arg(short = 'c', default_value_t = 1.0)]
    c: f64,
    /// Sampler seed; repeat for independent chains.
    #[arg(long = "seed", default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Sweeps discarded before sampling (default 10 n^2).
    #[arg(long)]
    burnin: Option<usize>,
    /// Sweeps between samples (default n).
    #[arg(long)]
    thin: Option<usize>,
    /// Largest diagonal separation.
    #[arg(long, default_value_t = 12)]
    kmax: usize,
    #[arg(long, value_enum, default_value_t = Mode::Infinite)]
    mode: Mode,
    /// Directory for the output files.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl Common {
    fn into_spec(self, command: Command) -> RunSpec {
        RunSpec {
            n: self.n,
            a: self.a,
            b: self.b,
            c: self.c,
            seeds: self.seeds,
            sweeps: self.sweeps,
            burnin: self.burnin,
            thin: self.thin,
            kmax: self.kmax,
            mode: self.mode,
            out: self.out,
            ..RunSpec::new(command)
        }
    }
}

fn parse_range(s: &str) -> Result<ScanGrid, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    match nums.as_deref() {
        Ok(&[from, to, step]) => Ok(ScanGrid::Line { from, to, step }),
        _ => Err(CliError::Input(format!(
            "--a-range expects FROM:TO:STEP, got {s:?}"
        ))),
    }
}

fn to_spec(cmd: Cmd) -> Result<RunSpec, CliError> {
    Ok(match cmd {
        Cmd::Partition(c) => c.into_spec(Command::Partition),
        Cmd::Correlate {
            common,
            separations,
        } => RunSpec {
            separations,
            ..common.into_spec(Command::Correlate)
        },
        Cmd::PhaseScan {
            common,
            a_range,
            ternary,
        } => {
            let grid = match (a_range, ternary) {
                (Some(r), _) => Some(parse_range(&r)?),
                (None, Some(resolution)) => Some(ScanGrid::Ternary { resolution }),
                (None, None) => None,
            };
            RunSpec {
                grid,
                ..common.into_spec(Command::PhaseScan)
            }
        }
        Cmd::Sample(c) => c.into_spec(Command::Sample),
        Cmd::Crosscheck(c) => c.into_spec(Command::Crosscheck),
    })
}

fn load_spec(path: &Path) -> Result<RunSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match (cli.json_spec, cli.command) {
        (Some(path), _) => load_spec(&path),
        (None, Some(cmd)) => to_spec(cmd),
        (None, None) => Err(CliError::Input("no command given".into())),
    };
    match spec.and_then(|s| commands::run(&s)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
