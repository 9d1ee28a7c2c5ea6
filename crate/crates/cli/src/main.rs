mod commands;
mod report;
mod words;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

/// Gauge theory on fuzzy spaces: scenario checks, parallel transport and
/// gauge equivalence of connections.
#[derive(Debug, Parser)]
#[command(name = "fh", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,

    /// Also write the report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, env = "FH_SEED", default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a scenario and test the calculus, connection and transport invariants on it.
    Check { scenario: PathBuf },

    /// Curvature norms of every basis pair and the flatness verdict.
    Curvature {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },

    /// Parallel transport along the flow of a real derivation.
    Transport {
        scenario: PathBuf,
        /// Derivation, e.g. `e3` or `0.5*e1+1*e2`.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        /// Check the transport ODE by central differences.
        #[arg(long)]
        verify_ode: bool,
        /// Central difference step for --verify-ode.
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
    },

    /// Trace observables of the scenario's words (or --words).
    Observables {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        tau: f64,
        /// Words such as `e3;e3,e3;e1,e2,e3`; overrides the scenario's words.
        #[arg(long)]
        words: Option<String>,
    },

    /// Decide whether two scenarios carry gauge equivalent connections.
    GaugeEquiv {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        decider: DeciderArgs,
    },

    /// Write a fuzzy sphere scenario with a flat connection.
    FuzzySphere {
        /// Spin of the algebra, n = 2j + 1.
        #[arg(long)]
        j: String,
        /// Module spins, e.g. `0,0.5`.
        #[arg(long)]
        spins: String,
        #[arg(long)]
        out: PathBuf,
    },

    /// Demonstrations.
    #[command(subcommand)]
    Demo(Demo),
}

#[derive(Debug, Subcommand)]
pub enum Demo {
    /// Flat connections from several spin multisets and whether they are gauge copies.
    GaugeCopy {
        #[arg(long)]
        j: String,
        /// Spin multisets separated by `;`, e.g. `0,0;0.5`.
        #[arg(long)]
        sets: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        tau: f64,
        #[command(flatten)]
        decider: DeciderArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DeciderArgs {
    /// Longest trace word compared (default m²).
    #[arg(long)]
    degree: Option<usize>,
    /// Witness search attempts.
    #[arg(long, default_value_t = 32)]
    trials: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok((report, code)) => {
            print!("{}", report.render(cli.format));
            if let Some(path) = &cli.report {
                if let Err(e) = report.save(path, cli.format) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
