//! `qsd-lab` binary: runs one declarative scenario per invocation.
//!
//! Exit codes: 0 success, 2 scenario parse failure, 3 parameter validation
//! failure, 4 numerical or I/O failure during execution. Failures emit one
//! machine-readable JSON object on standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use qsd_lab::scenario::{run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "qsd-lab", version, about = "Scenario runner for the QSD numerical laboratory")]
struct Cli {
    /// Path to a scenario JSON file.
    scenario: PathBuf,

    /// Override the scenario's output path prefix.
    #[arg(long)]
    out: Option<String>,

    /// Cap the number of data-parallel workers (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

fn fail(code: u8, error: &str, message: String, pos: Option<(usize, usize)>) -> ExitCode {
    let report = ErrorReport {
        error,
        message,
        line: pos.map(|p| p.0),
        column: pos.map(|p| p.1),
    };
    eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        // Ignored if a global pool already exists (e.g. under test harnesses).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }

    let raw = match std::fs::read_to_string(&cli.scenario) {
        Ok(raw) => raw,
        Err(e) => {
            return fail(2, "ParseError", format!("cannot read {}: {e}", cli.scenario.display()), None);
        }
    };

    // Syntax first: malformed JSON is a parse failure with position info;
    // well-formed JSON that fails to decode is a validation failure.
    if let Err(e) = serde_json::from_str::<serde_json::Value>(&raw) {
        return fail(2, "ParseError", e.to_string(), Some((e.line(), e.column())));
    }
    let scenario: Scenario = match serde_json::from_str(&raw) {
        Ok(s) => s,
        Err(e) => {
            return fail(3, "ValidationError", e.to_string(), Some((e.line(), e.column())));
        }
    };

    if let Err(message) = scenario.validate() {
        return fail(3, "ValidationError", message, None);
    }

    match run_scenario(&scenario, cli.out.as_deref()) {
        Ok(outcome) => {
            println!(
                "{} -> {} {}",
                outcome.summary,
                outcome.json_path.display(),
                outcome.csv_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(4, "NumericalFailure", e.to_string(), None),
    }
}
