//! `pnme` — experiment driver for open-system dynamics under Poisson white
//! noise: trajectory simulation, steady states, bath correlator tables,
//! decay-rate sweeps, convergence studies and multi-time correlators.
//!
//! Every subcommand takes a JSON config (strict schema) and writes CSV data
//! plus a JSON results summary. Outputs are deterministic: no randomness
//! anywhere in the pipeline, and BLAS is pinned to one thread.

mod config;
mod error;
mod output;
mod run;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::{load_config, Kind};
use error::CliError;

#[derive(Parser)]
#[command(name = "pnme", version, about = "Poisson-noise master equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Directory that output paths are resolved against.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parse and validate the config without running.
    #[arg(long)]
    validate_only: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a trajectory (poisson, gaussian or composite engine).
    Simulate(RunArgs),
    /// Solve for the stationary state of a generator.
    Steady(RunArgs),
    /// Tabulate bath correlators against the brute-force oracle.
    Corr(RunArgs),
    /// Sweep the collective effective decay rate over μ²N.
    #[command(name = "decay_rate")]
    DecayRate(RunArgs),
    /// Compare composite dynamics against the Poisson master equation
    /// along a Γ⁻ ladder.
    Converge(RunArgs),
    /// Two-time correlators, exact and by quantum regression.
    Multitime(RunArgs),
    /// Run a batch of experiment configs concurrently.
    Sweep(RunArgs),
}

impl Command {
    fn expected_kind(&self) -> Kind {
        match self {
            Command::Simulate(_) => Kind::Simulate,
            Command::Steady(_) => Kind::Steady,
            Command::Corr(_) => Kind::Corr,
            Command::DecayRate(_) => Kind::DecayRate,
            Command::Converge(_) => Kind::Converge,
            Command::Multitime(_) => Kind::Multitime,
            Command::Sweep(_) => Kind::Sweep,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Simulate(a)
            | Command::Steady(a)
            | Command::Corr(a)
            | Command::DecayRate(a)
            | Command::Converge(a)
            | Command::Multitime(a)
            | Command::Sweep(a) => a,
        }
    }
}

fn main() {
    // deterministic output across machines with different core counts
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }

    let cli = Cli::parse();
    let args = cli.command.args();

    let result = (|| -> Result<(), CliError> {
        let config = load_config(&args.config)?;
        let expected = cli.command.expected_kind();
        if config.kind() != expected {
            return Err(CliError::Validation(format!(
                "config kind {:?} does not match the {} subcommand",
                config.kind().as_str(),
                expected.as_str()
            )));
        }
        let outputs = run::run(&config, args.out.as_deref(), args.validate_only)?;
        if args.validate_only {
            println!("ok: {} config is valid", expected.as_str());
        } else {
            for path in outputs {
                println!("wrote {}", path.display());
            }
        }
        Ok(())
    })();

    if let Err(err) = result {
        eprintln!(
            "{}",
            serde_json::json!({ "error": err.class(), "message": err.message() })
        );
        std::process::exit(err.exit_code());
    }
}
