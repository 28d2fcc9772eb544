//! `qloop <task> --config <file> [--seed N] [--out DIR]`
//!
//! Exit status: 0 when every comparison passes, 1 on a statistical failure,
//! 2 on usage or configuration errors.

mod config;
mod error;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Overrides, Task};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qloop", version, about = "Random-loop Monte Carlo runs and exact checks")]
struct Args {
    task: Task,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long, env = "QLOOP_SEED")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the data-parallel samplers.
    #[arg(long, env = "QLOOP_WORKERS")]
    workers: Option<usize>,
}

fn execute(args: Args) -> Result<bool, CliError> {
    if let Some(n) = args.workers {
        qloop::par::set_workers(n);
    }
    let bytes = std::fs::read(&args.config).map_err(|source| CliError::Read { path: args.config.clone(), source })?;
    let run = config::prepare(
        &bytes,
        Overrides {
            task: args.task,
            seed: args.seed,
            out: args.out,
        },
    )?;
    let report = tasks::run(&run)?;
    report::write(&run, &report)?;
    println!(
        "{}: {} rows, {} failed, written to {}",
        run.task,
        report.rows.len(),
        report.n_failed(),
        run.out_dir.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
