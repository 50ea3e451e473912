// SPDX-License-Identifier: Apache-2.0

//! `dift`: run, instrument, check, and fuzz DIFT kernels.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dift_core::{DiftMode, OnException, PropagationRule};

#[derive(Debug, Parser)]
#[command(name = "dift", version, about = "Dynamic information flow tracking for dataflow kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fine,
    Coarse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Union,
    Precise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExceptionAction {
    Record,
    Halt,
}

pub fn dift_mode(mode: Mode, rule: Rule) -> DiftMode {
    let rule = match rule {
        Rule::Union => PropagationRule::FineUnion,
        Rule::Precise => PropagationRule::FinePrecise,
    };
    match mode {
        Mode::Fine => DiftMode::Fine(rule),
        Mode::Coarse => DiftMode::CoarseBoundary,
    }
}

impl From<ExceptionAction> for OnException {
    fn from(a: ExceptionAction) -> Self {
        match a {
            ExceptionAction::Record => OnException::Record,
            ExceptionAction::Halt => OnException::Halt,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a kernel on one input file.
    Run {
        kernel: std::path::PathBuf,
        inputs: std::path::PathBuf,
        #[arg(long, value_enum, default_value = "fine")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "union")]
        rule: Rule,
        #[arg(long = "on-exception", value_enum, default_value = "record")]
        on_exception: ExceptionAction,
        /// Constant-fold and remove dead code before running.
        #[arg(long)]
        optimize: bool,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<std::path::PathBuf>,
        /// Accepted for uniformity; a run draws no random numbers.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the instrumented graph as DOT.
    Instrument {
        kernel: std::path::PathBuf,
        #[arg(long = "emit-dot")]
        emit_dot: std::path::PathBuf,
        #[arg(long, value_enum, default_value = "fine")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "union")]
        rule: Rule,
    },
    /// Check baseline/DIFT and optimized/unoptimized consistency.
    Check {
        kernel: std::path::PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expectation file of input cases and their expected reports.
        #[arg(long)]
        expect: Option<std::path::PathBuf>,
    },
    /// Fuzz the tag properties.
    Fuzz {
        kernel: std::path::PathBuf,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write each counterexample as an inputs file here.
        #[arg(long = "counterexample-dir")]
        counterexample_dir: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { commands::EXIT_OK });
        }
    };
    let status = match cli.command {
        Command::Run {
            kernel,
            inputs,
            mode,
            rule,
            on_exception,
            optimize,
            report,
            seed: _,
        } => commands::cmd_run(&kernel, &inputs, dift_mode(mode, rule), on_exception.into(), optimize, report.as_deref()),
        Command::Instrument {
            kernel,
            emit_dot,
            mode,
            rule,
        } => commands::cmd_instrument(&kernel, &emit_dot, dift_mode(mode, rule)),
        Command::Check {
            kernel,
            samples,
            seed,
            expect,
        } => commands::cmd_check(&kernel, samples, seed, expect.as_deref()),
        Command::Fuzz {
            kernel,
            trials,
            seed,
            counterexample_dir,
        } => commands::cmd_fuzz(&kernel, trials, seed, counterexample_dir.as_deref()),
    };
    ExitCode::from(status)
}
