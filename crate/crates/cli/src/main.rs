//! `transonic`: duct-flow shock experiments from the command line.

mod artifacts;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "transonic",
    version,
    about = "Steady transonic duct flow: jump relations, a shock-fitted subsonic solver, and free-boundary experiments"
)]
struct Cli {
    /// Run configuration file (flat key = value lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; falls back to $TRANSONIC_OUT, then the working directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Single configuration assignment, applied after the file; repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Suppress informational output (artifact files are still written).
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the normal-shock jump relations and print them as JSON.
    Jump,
    /// Run the free-boundary iteration; writes field.csv and summary.json.
    Solve,
    /// Sweep exit speeds and perturbations; writes theorem15.csv.
    VerifyTheorem,
    /// Rerun the matched problem in ducts of increasing length; writes oscillation.csv.
    LongDuct,
    /// Rerun the configured experiment and write comparison diagnostics.
    Compare,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version are not usage errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    for assignment in &cli.overrides {
        cfg.apply_assignment(assignment)?;
    }

    let out = match &cli.out {
        Some(dir) => dir.clone(),
        None => std::env::var_os("TRANSONIC_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    std::fs::create_dir_all(&out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;

    match cli.command {
        Command::Jump => run::jump(&cfg),
        Command::Solve => run::solve(&cfg, &out, cli.quiet),
        Command::VerifyTheorem => run::verify_theorem(&cfg, &out, cli.quiet),
        Command::LongDuct => run::long_duct(&cfg, &out, cli.quiet),
        Command::Compare => run::compare(&cfg, &out, cli.quiet),
    }
}
