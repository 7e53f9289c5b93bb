//! `subaffine`: pressure, dimension, measure and box-counting diagnostics for
//! sub-self-affine sets, reported as JSON on standard output.
//!
//! Exit codes: 0 success, 2 validation error, 3 budget exceeded, 4 numeric
//! failure.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use commands::Command;
use config::{Loaded, SystemConfig};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "subaffine", version, about)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, conflicts_with_all = ["fixture", "inline"])]
    config: Option<PathBuf>,
    /// Built-in system: not-unique, no-semiconformal, nondifferentiable,
    /// tractable, cantor, unit-square or two-points.
    #[arg(long, global = true, conflicts_with = "inline")]
    fixture: Option<String>,
    /// Configuration given as a JSON string.
    #[arg(long, global = true)]
    inline: Option<String>,
    /// Overrides `measure`, e.g. '{"type":"bernoulli","p":[0.5,0.5]}'.
    #[arg(long, global = true)]
    measure: Option<String>,
    /// Overrides `budgets.max_depth`.
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    /// Overrides `budgets.max_words`.
    #[arg(long, global = true)]
    max_words: Option<u64>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn raw_config(&self) -> CliResult<Option<SystemConfig>> {
        let parsed = if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                context: format!("reading {}", path.display()),
                source,
            })?;
            config::parse_json(&text)?
        } else if let Some(text) = &self.inline {
            config::parse_json(text)?
        } else if let Some(name) = &self.fixture {
            let ifs = subaffine::fixtures::by_name(name)
                .map_err(|e| CliError::malformed("fixture", e))?;
            config::from_ifs(&ifs)
        } else {
            return Ok(None);
        };
        Ok(Some(parsed))
    }

    fn load(&self) -> CliResult<Option<Loaded>> {
        let Some(mut c) = self.raw_config()? else {
            return Ok(None);
        };
        if let Some(m) = &self.measure {
            c.measure = Some(config::parse_measure(m)?);
        }
        if let Some(d) = self.max_depth {
            c.budgets.max_depth = d;
        }
        if let Some(w) = self.max_words {
            c.budgets.max_words = w;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        config::load(c).map(Some)
    }
}

fn execute(cli: &Cli) -> CliResult<serde_json::Value> {
    let started = Instant::now();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let loaded = if cli.command.needs_system() {
        cli.load()?
    } else {
        None
    };
    let results = commands::run(&cli.command, loaded.as_ref())?;
    let digest = match (&loaded, &cli.command) {
        (Some(l), _) => l.digest.clone(),
        (None, Command::Example(a)) => {
            let ifs = subaffine::fixtures::by_name(a.name())
                .map_err(|e| CliError::malformed("fixture", e))?;
            config::load(config::from_ifs(&ifs))?.digest
        }
        (None, _) => unreachable!("systems are loaded for every other command"),
    };
    let command: Vec<String> = std::env::args().skip(1).collect();
    Ok(json!({
        "command": command,
        "digest": digest,
        "results": results,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_ms": started.elapsed().as_millis() as u64,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // a closed pipe downstream is not a failure of the computation
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
