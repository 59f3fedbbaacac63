//! `kxp`: generate executions, explain them, validate candidates and plot
//! results.

mod gen;
mod plot;
mod run;
mod validate;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kxp_core::explain::ExplainError;
use kxp_core::io::IoError;
use kxp_core::{Semantics, Target};

#[derive(Parser)]
#[command(name = "kxp", version, about = "Formal multi-step explanations for DNN-controlled reactive systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Roll out a fixture (or given) agent and write the execution with all its prefixes.
    GenExec(gen::GenArgs),
    /// Run explanation methods on one or more executions.
    Explain(run::ExplainArgs),
    /// Check whether a candidate mask is a k-step explanation.
    Validate(validate::ValidateArgs),
    /// Cumulative solved-vs-time curves and size histograms from result files.
    Plot(plot::PlotArgs),
    /// Generate executions for k = 1..=k-max and run the methods on each.
    Bench(run::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Env {
    Gridworld,
    GridworldSmall,
    Turtlebot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Minimal,
    Minimum,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Minimal => Target::Minimal,
            TargetArg::Minimum => Target::Minimum,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SemanticsArg {
    Weak,
    Strict,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Semantics {
        match s {
            SemanticsArg::Weak => Semantics::Weak,
            SemanticsArg::Strict => Semantics::Strict,
        }
    }
}

/// System and network inputs shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, value_enum, default_value = "weak")]
    pub semantics: SemanticsArg,
}

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_TIMEOUT: u8 = 3;
pub const EXIT_GENERATION: u8 = 4;

/// An error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }

    pub fn generation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_GENERATION, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<ExplainError> for Failure {
    fn from(e: ExplainError) -> Self {
        let code = match e {
            ExplainError::Timeout { .. } => EXIT_TIMEOUT,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenExec(a) => gen::run(&a),
        Command::Explain(a) => run::explain(&a),
        Command::Validate(a) => validate::run(&a),
        Command::Plot(a) => plot::run(&a),
        Command::Bench(a) => run::bench(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
