//! `mstein`: config-driven runner for coupling, Stein and transport
//! experiments.
//!
//! Exit codes: 0 when every enabled check passes, 1 when a check fails,
//! 2 for configuration or input errors.

mod config;
mod experiments;
mod output;
mod selftest;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use experiments::{Check, Outcome};

#[derive(Parser)]
#[command(name = "mstein", version, about = "Coupled Langevin diffusions and Stein solutions on manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file (SEED overrides its seed).
    Run { config: PathBuf },
    /// Print the check table of an output directory.
    Report { dir: PathBuf },
    /// Run the fast oracle checks.
    Selftest {
        #[arg(long, default_value = "mstein-selftest")]
        output: PathBuf,
    },
}

fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var("SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("SEED=`{s}` is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("SEED: {e}")),
    }
}

fn finish(dir: &Path, out: &Outcome) -> ExitCode {
    if let Err(e) = output::write_outcome(dir, out) {
        eprintln!("error: writing {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let failed: Vec<&Check> = out.checks.iter().filter(|c| !c.pass).collect();
    println!(
        "{} of {} checks passed; artifacts in {}",
        out.checks.len() - failed.len(),
        out.checks.len(),
        dir.display()
    );
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for c in failed {
        eprintln!("check failed: {} ({}): value {} > bound {}", c.name, c.anchor, c.value, c.bound);
    }
    ExitCode::from(1)
}

fn run(path: &Path) -> ExitCode {
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match RunConfig::load(path, seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match experiments::run(&cfg) {
        Ok(out) => finish(&cfg.output, &out),
        Err(e) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
    }
}

fn report(dir: &Path) -> ExitCode {
    match output::read_checks(dir) {
        Ok(checks) => {
            print!("{}", output::format_table(&checks));
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn selftest(dir: &Path) -> ExitCode {
    let seed = match seed_from_env() {
        Ok(s) => s.unwrap_or(0),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match selftest::run(seed) {
        Ok(out) => finish(dir, &out),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => run(&config),
        Command::Report { dir } => report(&dir),
        Command::Selftest { output } => selftest(&output),
    }
}
