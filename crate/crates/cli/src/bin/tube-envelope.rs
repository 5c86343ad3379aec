use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use tube_envelope_cli::report::invalid_input_json;
use tube_envelope_cli::{run_file, write_outcome, Command, Overrides};

/// Separation radii, monodromy, sheet counts and hull certificates for
/// truncated tube domains in C².
#[derive(Debug, Parser)]
#[command(name = "tube-envelope", version)]
struct Cli {
    /// radius, monodromy, sheets, universal, hull-point, escape,
    /// envelope-slice, convexity or figure
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid resolution override.
    #[arg(long)]
    grid: Option<usize>,
    /// Step tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Record wall time in the report (makes reports non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let overrides = Overrides { seed: cli.seed, grid: cli.grid, tol: cli.tol };
    let mut outcome = match run_file(&cli.scenario, &overrides) {
        Ok(o) => o,
        Err(reason) => {
            eprintln!("{}", invalid_input_json(&reason));
            return ExitCode::from(1);
        }
    };
    if outcome.report.command != cli.command {
        let reason = format!("scenario is for `{}`, not `{}`", outcome.report.command, cli.command);
        eprintln!("{}", invalid_input_json(&reason));
        return ExitCode::from(1);
    }
    if cli.timing {
        outcome.report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    if let Err(e) = write_outcome(&outcome, &cli.out) {
        eprintln!("{}", invalid_input_json(&format!("cannot write outputs: {e}")));
        return ExitCode::from(1);
    }
    if let Some(reason) = &outcome.report.reason {
        eprintln!("{}: {reason}", outcome.report.exit_code);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
