//! `asymcat`: asymmetry measures, recoveries and the showcase experiments
//! from the command line.

mod commands;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Failure;

#[derive(Parser, Debug)]
#[command(name = "asymcat", version, about = "Asymmetry measures and covariant recovery maps")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write experiment reports as CSV rows to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Tolerance for equalities between channels, states and closed forms.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_eq: f64,
    /// Slack allowed below fidelity floors.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_floor: f64,
    /// Record wall-clock time in reports (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relative entropy of asymmetry of a state under an action.
    Gamma {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        action: PathBuf,
    },
    /// Catalytic preparation of |+⟩ from a bounded oscillator clock.
    Clock {
        #[arg(long = "T", short = 'T', default_value_t = 4)]
        t: usize,
        #[arg(long, short, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        /// Comma-separated list of T values; overrides --T.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
    },
    /// Universal n → n+k cloning as a Petz recovery map.
    Cloner {
        #[arg(long, short, default_value_t = 2)]
        d: usize,
        #[arg(long, short, default_value_t = 1)]
        n: usize,
        #[arg(long, short, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Run seeded property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Recover a state after a covariant channel with a rotated Petz map.
    Recover {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        action: PathBuf,
        /// Action on the channel output; defaults to the input action.
        #[arg(long)]
        action_out: Option<PathBuf>,
    },
    /// Run an experiment described by a JSON spec file.
    Run { spec: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Core,
    Asymmetry,
    Recovery,
    All,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ASYMCAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Parse(format!("ASYMCAT_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Failure::Parse("ASYMCAT_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invariant(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let g = &cli.global;
    match cli.command {
        Command::Gamma { state, action } => commands::gamma(g, &state, &action),
        Command::Clock { t, k, omega, sweep } => commands::clock(g, sweep.unwrap_or_else(|| vec![t]), k, omega),
        Command::Cloner { d, n, k, probes, seed } => commands::cloner(g, d, n, k, probes, seed),
        Command::Verify { suite, seed } => suites::verify(g, suite, seed),
        Command::Recover {
            channel,
            state,
            action,
            action_out,
        } => commands::recover(g, &channel, &state, &action, action_out.as_deref()),
        Command::Run { spec } => commands::run_spec(g, &spec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
