mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use error::CliError;

#[derive(Parser)]
#[command(name = "pulse", version, about = "Pulse dynamics in heterogeneous media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write SVG quick-looks.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate the configured tier and write the trajectory.
    Simulate,
    /// Closed-form and linearization values for the configured parameters.
    Analyze,
    /// Scattering outcome over a (d0, eps0) grid with refined boundaries.
    PhaseDiagram,
    /// Run and label one configuration.
    Classify,
    /// Residence times inside a bump approaching the penetration threshold.
    Residence,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let path = cli.config.ok_or(CliError::MissingParameter("--config"))?;
    let cfg = config::load_config(&path)?;
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        return Err(CliError::Inconsistent("--jobs must be at least 1".into()));
    }
    let out = commands::out_dir(cli.out.as_deref(), &cfg);
    let mut ctx = Context { cfg, out, jobs, svg: cli.svg };
    commands::prepare(&mut ctx)?;
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Analyze => commands::analyze(&ctx),
        Command::PhaseDiagram => commands::phase_diagram(&ctx),
        Command::Classify => commands::classify(&ctx),
        Command::Residence => commands::residence(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}
