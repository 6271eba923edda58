//! Experiment runner for the `rotmhd` toolkit: TOML configs in, CSV tables
//! and a JSON manifest out.
//!
//! Layout of an output directory:
//! - `manifest.json`: config echo, content hash, derived schedule values,
//!   status, timing and the artifact list with column descriptions.
//! - one or more CSV tables (17 significant digits) and small JSON reports.
//! - sweeps add one `eps_NN/` subdirectory per entry.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{load_config, ExperimentConfig, Kind, LoadedConfig};
pub use error::CliError;
pub use output::{RunManifest, Status};

use experiments::Outcome;

/// Environment variable that caps the worker-thread count.
pub const THREADS_ENV: &str = "ROTMHD_THREADS";

pub fn output_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<PathBuf, CliError> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Config("no output directory: set `out` in the config or pass --out".into()))
}

/// Runs the experiment and writes the manifest last. A run that fails
/// after starting still leaves a manifest with status `failed`.
pub fn execute(loaded: &LoadedConfig, out: Option<&Path>, seed: Option<u64>) -> Result<RunManifest, CliError> {
    let cfg = &loaded.config;
    cfg.validate()?;
    let dir = output_dir(cfg, out)?;
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let seed = seed.unwrap_or(cfg.seed);
    let t0 = Instant::now();
    let result = match cfg.kind {
        Kind::Simulate => experiments::simulate(cfg, seed, &dir),
        Kind::Linear => experiments::linear(cfg, seed, &dir),
        Kind::Kernels => experiments::kernels(cfg, seed, &dir),
        Kind::Strichartz => experiments::strichartz(cfg, seed, &dir),
        Kind::Sweep => experiments::sweep(cfg, seed, &dir),
        Kind::Check => experiments::check(cfg, seed, &dir),
    };
    let mut manifest = RunManifest {
        tool: "rotmhd",
        version: env!("CARGO_PKG_VERSION"),
        kind: cfg.kind.name().to_owned(),
        seed,
        config_hash: output::config_hash(&loaded.text),
        config: serde_json::to_value(cfg)?,
        derived: serde_json::Value::Null,
        status: Status::Failed,
        exit_code: 1,
        wall_seconds: 0.0,
        warnings: Vec::new(),
        artifacts: Vec::new(),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            manifest.exit_code = e.exit_code();
            manifest.warnings.push(e.to_string());
            manifest.wall_seconds = t0.elapsed().as_secs_f64();
            manifest.write(&dir)?;
            return Err(e);
        }
    };
    let Outcome {
        status,
        artifacts,
        derived,
        warnings,
    } = outcome;
    manifest.status = status;
    manifest.exit_code = status.exit_code();
    manifest.derived = derived;
    manifest.warnings = warnings;
    manifest.artifacts = artifacts;
    manifest.wall_seconds = t0.elapsed().as_secs_f64();
    manifest.write(&dir)?;
    Ok(manifest)
}
