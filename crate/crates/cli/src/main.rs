use std::process::ExitCode;

use clap::Parser;

use antibunch_cli::{execute, Cli, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            match &outcome {
                Outcome::Written { manifest, files } => {
                    println!("wrote {files} files, manifest {}", manifest.display());
                }
                Outcome::Validated(report) => {
                    println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
                    for c in report.checks.iter().filter(|c| !c.passed) {
                        eprintln!("FAILED {}: {} (residual {:e}, tolerance {:e})", c.suite, c.name, c.residual, c.tolerance);
                    }
                }
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
