//! `cphase` command-line experiment runner.

mod chart;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use config::{Format, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "cphase", version, about = "Conditional-phase gate simulations for a coupled quantum-dot pair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phonon spectral densities J±(ω) for deformation and piezoelectric coupling.
    Spectra(Common),
    /// Gaussian widths giving a π conditional phase.
    Calibrate(Common),
    /// Gate trajectories, purity and fidelity.
    Gate(Common),
    /// Observables over a rectangular parameter grid.
    Sweep(Common),
    /// Landau-Zener leakage out of the lower dressed state.
    Lz(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config field by dotted path, e.g. pulse.delta_mev=4.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (default: output.dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Output formats, comma separated.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Print the generation time on charts.
    #[arg(long)]
    stamp: bool,
}

type Runner = fn(&Ctx) -> Result<output::OutputSet, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common, cmd): (&str, Common, Runner) = match cli.command {
        Command::Spectra(c) => ("spectra", c, commands::spectra),
        Command::Calibrate(c) => ("calibrate", c, commands::calibrate),
        Command::Gate(c) => ("gate", c, commands::gate),
        Command::Sweep(c) => ("sweep", c, commands::sweep_cmd),
        Command::Lz(c) => ("lz", c, commands::lz),
    };
    let mut cfg = RunConfig::load(&common.config, &common.set)?;
    if let Some(dir) = common.out {
        cfg.output.dir = dir;
    }
    if let Some(f) = common.format {
        cfg.output.formats = f;
    }
    let stamp = common.stamp.then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("{} · generated at unix time {secs}", output::VERSION)
    });
    let ctx = Ctx { exec: cphase::Exec::with_jobs(common.jobs.map(usize::from)), cfg, stamp };
    log::info!("{name}: writing to {}", ctx.cfg.output.dir.display());
    let files = cmd(&ctx)?;
    let written = files.write_all(&ctx.cfg.output.dir)?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
