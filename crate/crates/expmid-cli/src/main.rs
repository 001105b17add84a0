//! `expmid` — batch experiment runner for the exponential-midpoint
//! integrator library. Reads a JSON experiment spec, executes the
//! requested analysis, and writes a CSV table plus a JSON summary.
//!
//! Exit codes: 0 success (scientific pass/fail lands in the JSON flags),
//! 1 invalid configuration, 2 numerical failure, 3 I/O failure.

mod output;
mod runner;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use spec::ExperimentSpec;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<expmid::Error> for CliError {
    fn from(e: expmid::Error) -> Self {
        match e {
            expmid::Error::Usage(msg) => CliError::Config(msg),
            expmid::Error::Numerical { stage, detail } => {
                CliError::Numerical(format!("{stage}: {detail}"))
            }
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn describe(&self) -> String {
        match self {
            CliError::Config(msg) => format!("invalid configuration: {msg}"),
            CliError::Numerical(msg) => format!("numerical failure: {msg}"),
            CliError::Io(msg) => format!("i/o failure: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "expmid", version, about = "Experiment runner for the exponential-midpoint integrator", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a JSON spec file.
    Run {
        /// Path to the experiment spec (JSON).
        spec: PathBuf,
        /// Directory that relative output paths are resolved against.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the built-in problem families.
    ListFamilies,
    /// Print the artifact version.
    Version,
}

fn run(spec_path: &PathBuf, out_dir: Option<&PathBuf>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", spec_path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| CliError::Config(format!("{}: {}", e.path(), e.inner())))?;
    spec.validate()?;

    let started = Instant::now();
    let outcome = runner::execute(&spec)?;
    let elapsed = started.elapsed().as_secs_f64();

    let (csv_path, json_path) =
        output::write_results(&spec, &outcome, out_dir.map(|p| p.as_path()))?;
    println!(
        "{}: wrote {} and {} in {:.3} s",
        spec.analysis.name(),
        csv_path.display(),
        json_path.display(),
        elapsed
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { spec, out_dir } => run(spec, out_dir.as_ref()),
        Command::ListFamilies => {
            print!("{}", spec::list_families());
            Ok(())
        }
        Command::Version => {
            println!("expmid {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.describe());
            ExitCode::from(e.exit_code())
        }
    }
}
