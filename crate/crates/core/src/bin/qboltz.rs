//! `qboltz exact|kinetic|memory|audit|sweep --config <path> [--threads N] [--out DIR]`
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (config, grid,
//! sector size), 3 numerical-guard abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qboltz::harness::{parse_config, run, Command};
use qboltz::Error;

#[derive(Parser, Debug)]
#[command(
    name = "qboltz",
    version,
    about = "Exact lattice-fermion dynamics against the quantum Boltzmann equation"
)]
struct Cli {
    /// exact | kinetic | memory | audit | sweep
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        e if e.is_numerical_guard() => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on malformed arguments, matching config errors
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("qboltz: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = parse_config(&cli.config).and_then(|mut config| {
        if let Some(out) = cli.out {
            config.output_dir = out;
        }
        run(cli.command, &config)
    });
    match outcome {
        Ok(table) => {
            for (name, schema) in &table.files {
                println!("{}  ({schema})", table.path(name).display());
            }
            for (k, v) in &table.summary {
                println!("{k} = {v}");
            }
            println!("{}", table.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qboltz {}: {e}", cli.command);
            ExitCode::from(exit_code(&e))
        }
    }
}
