use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotmhd_cli::{execute, load_config, Kind, THREADS_ENV};

#[derive(Parser)]
#[command(name = "rotmhd", version, about = "Experiments for the fast-rotating anisotropic MHD toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Direct or coupled-split simulation.
    Simulate(RunArgs),
    /// Eigen-structure and propagator dump for a frequency list.
    Linear(RunArgs),
    /// Sup-norm decay of the dispersive kernels.
    Kernels(RunArgs),
    /// ε-scaling of the semigroup Strichartz norm.
    Strichartz(RunArgs),
    /// Global-existence sweep over ε.
    Sweep(RunArgs),
    /// Property checks with pass/fail tolerances.
    Check(RunArgs),
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        log::error!("{e}");
        return ExitCode::from(2);
    }
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (Kind::Simulate, a),
        Command::Linear(a) => (Kind::Linear, a),
        Command::Kernels(a) => (Kind::Kernels, a),
        Command::Strichartz(a) => (Kind::Strichartz, a),
        Command::Sweep(a) => (Kind::Sweep, a),
        Command::Check(a) => (Kind::Check, a),
    };
    let loaded = match load_config(&args.config) {
        Ok(l) => l,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if loaded.config.kind != kind {
        log::error!(
            "config {} is for `{}`, not `{}`",
            args.config.display(),
            loaded.config.kind.name(),
            kind.name()
        );
        return ExitCode::from(2);
    }
    match execute(&loaded, args.out.as_deref(), args.seed) {
        Ok(m) => {
            for w in &m.warnings {
                log::warn!("{w}");
            }
            log::info!("{} finished: {:?} in {:.1} s", m.kind, m.status, m.wall_seconds);
            ExitCode::from(m.exit_code)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
