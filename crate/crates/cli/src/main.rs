mod commands;
mod config;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use besovflow::verify::Suite;
use clap::{Args, Parser, Subcommand};

use commands::{RunContext, Outcome};
use config::{RunConfig, UsageError};

/// Littlewood-Paley property suites, fluid simulations and criterion monitors.
#[derive(Parser)]
#[command(name = "besovflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, env = "BESOVFLOW_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "BESOVFLOW_OUT", default_value = "out")]
    out: PathBuf,
    /// Overrides the seed from the configuration.
    #[arg(long, env = "BESOVFLOW_SEED")]
    seed: Option<u64>,
    /// Worker threads for corpus suites.
    #[arg(long, env = "BESOVFLOW_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a property suite: lp, besov, lemmas or bernstein.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a system and store the trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the monitors over a stored trajectory.
    Monitor {
        /// Directory written by `simulate`.
        #[arg(long, env = "BESOVFLOW_TRAJECTORY")]
        trajectory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Continue a stored trajectory past its final time.
    Extend {
        #[arg(long, env = "BESOVFLOW_TRAJECTORY")]
        trajectory: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: besovflow::Error| e.to_string())
}

fn resolve(common: &Common) -> Result<RunConfig> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(threads) = common.threads {
        config.threads = Some(threads);
    }
    if let Some(threads) = config.threads {
        if threads == 0 {
            return config::usage("threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    std::fs::create_dir_all(&common.out)
        .map_err(|e| UsageError(format!("cannot create {}: {e}", common.out.display())))?;
    Ok(config)
}

fn run(cli: Cli) -> Result<Outcome> {
    let common = match &cli.command {
        Command::Verify { common, .. }
        | Command::Simulate { common }
        | Command::Monitor { common, .. }
        | Command::Extend { common, .. } => common,
    };
    let config = resolve(common)?;
    let ctx = RunContext {
        hash: config.hash(),
        config: &config,
        out: &common.out,
    };
    match &cli.command {
        Command::Verify { suite, .. } => commands::verify(&ctx, *suite),
        Command::Simulate { .. } => commands::simulate(&ctx),
        Command::Monitor { trajectory, .. } => commands::monitor(&ctx, trajectory),
        Command::Extend { trajectory, .. } => commands::extend(&ctx, trajectory),
    }
}

/// 2 for bad input, 1 for everything that went wrong after the input was accepted.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<besovflow::Error>() {
            return match e {
                besovflow::Error::Parameter(_)
                | besovflow::Error::InadmissibleExponent { .. }
                | besovflow::Error::ExcludedEndpoint
                | besovflow::Error::DimensionMismatch(_)
                | besovflow::Error::Io(_) => 2,
                _ => 1,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
