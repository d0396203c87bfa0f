//! `qproc`: batch analyzer for quality-process models.
//!
//! Exit status is 0 when no error diagnostics were produced, 1 when at
//! least one was, and 2 for usage and I/O problems. Diagnostics go to
//! standard error; reports and artifacts go to standard output or `-o`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qproc", version, about = "Analyze quality-process models written in QML")]
pub struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write the report or artifact to this file instead of standard output.
    #[arg(short = 'o', long = "output", global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model against the meta-model constraints.
    Validate { file: PathBuf },
    /// Show the seven design steps and their pending questions.
    Guide {
        file: PathBuf,
        /// Restrict the guide to this process and its sub-processes.
        #[arg(long, value_name = "NAME")]
        process: Option<String>,
    },
    /// Compute the conformity and cause indicators.
    Indicators {
        file: PathBuf,
        /// Process or product to restrict the indicators to.
        #[arg(long, value_name = "NAME")]
        scope: Option<String>,
    },
    /// Rank an FMEA worksheet and link it into the model.
    Fmea {
        file: PathBuf,
        #[arg(long, value_name = "FILE")]
        doc: PathBuf,
    },
    /// X-bar/R charts, run rules and capability for a measurement series.
    Spc {
        #[arg(long, value_name = "FILE")]
        series: PathBuf,
        #[arg(long, requires = "lsl")]
        usl: Option<f64>,
        #[arg(long, requires = "usl")]
        lsl: Option<f64>,
    },
    /// Print the SQL schema derived from the meta-model.
    ExportSchema,
    /// Print INSERT statements for a model.
    ExportData { file: PathBuf },
    /// Full report: guide, validation, indicators and optional tools.
    Report {
        file: PathBuf,
        /// FMEA worksheet to attach before reporting.
        #[arg(long, value_name = "FILE")]
        doc: Option<PathBuf>,
        /// Measurement series to chart; may be repeated.
        #[arg(long, value_name = "FILE")]
        series: Vec<PathBuf>,
    },
    /// List every diagnostic code with its severity.
    Rules,
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
    ExitCode::from(commands::run(&cli) as u8)
}
