mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phonon_qram::units::Time;
use phonon_qram::wavepackets::PulseShape;

use crate::error::{CliError, CliResult};

/// Routing, query and heralding simulations for a phonon-based QRAM.
#[derive(Debug, Parser)]
#[command(name = "phonon-qram", version)]
struct Cli {
    /// JSON parameter file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps; defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Routing infidelity versus coupling and versus window (fig1c.csv, fig1d.csv).
    RouteFidelity {
        /// Evaluate a single routing window instead of the sweeps.
        #[arg(long)]
        window: Option<Time>,
        #[arg(long, value_parser = parse_shape)]
        shape: Option<PulseShape>,
    },
    /// One time-domain routing simulation with traces (router_sim.json).
    RouterSim,
    /// Noiseless logical queries (query.json).
    QuerySim,
    /// Heralding rates and dephasing bound (fig4a.csv, fig4b.csv).
    Heralding,
    /// Loss sampling against the closed form (montecarlo.csv, verdicts.jsonl).
    Montecarlo,
    /// Routing schedules and validation report.
    Schedule,
}

fn parse_shape(s: &str) -> Result<PulseShape, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown pulse shape {s:?}"))
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = cli.config.as_deref();
    let out = &cli.out;
    match cli.command {
        Command::RouteFidelity { window, shape } => {
            commands::route_fidelity(config::load(cfg)?, window, shape, cli.seed, out, &pool)
        }
        Command::RouterSim => commands::router_sim(config::load(cfg)?, cli.seed, out),
        Command::QuerySim => commands::query_sim(config::load(cfg)?, cli.seed, out, &pool),
        Command::Heralding => commands::heralding(config::load(cfg)?, cli.seed, out),
        Command::Montecarlo => commands::montecarlo(config::load(cfg)?, cli.seed, out, &pool),
        Command::Schedule => commands::schedule(config::load(cfg)?, cli.seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
