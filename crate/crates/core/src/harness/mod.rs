//! Experiment orchestration: configuration, single-particle error sweeps and
//! Vlasov–Poisson runs, and the files they produce.
//!
//! Output layout in `out_dir`:
//!
//! * `errors.csv`: one row per `(order, ε, Δt)` sweep cell.
//! * `timeseries.csv`: energy, adiabatic invariant and escaped count per step.
//! * `density_t<time>.txt`, `particles_t<time>.csv`: snapshots.
//! * `run.log`: parameters, snapshot notes, failures with their step index.

mod config;
mod sweep;
mod vlasov;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::fields::FieldError;
use crate::integrators::{IntegrationError, ParamError};
use crate::pic::{fmt_real, PicError};

pub use config::{
    log_spaced, parse_config, parse_config_str, parse_config_with, ConfigError, ExperimentConfig, Family, Location,
    Overrides,
};
pub use sweep::{
    error_report, evaluate_pair, references, run_sweep, trajectory_file_name, CellOutcome, References, SweepRow,
    ERRORS_HEADER,
};
pub use vlasov::{run_vlasov_poisson, snapshot_steps, VlasovSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    TimeGrid(#[from] IntegrationError),
    #[error("step {step}: {source}")]
    Pic {
        step: usize,
        #[source]
        source: PicError,
    },
    #[error("step {step}: {source}")]
    Field {
        step: usize,
        #[source]
        source: FieldError,
    },
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Line-flushed `run.log`, truncated on creation.
pub struct RunLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn line(&mut self, text: impl AsRef<str>) -> Result<(), HarnessError> {
        writeln!(self.out, "{}", text.as_ref())
            .and_then(|_| self.out.flush())
            .map_err(|source| HarnessError::Io { path: self.path.clone(), source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunSummary {
    Sweep { rows: Vec<SweepRow>, failed: usize },
    VlasovPoisson(Vec<VlasovSummary>),
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Runs the configured experiment on a pool of `cfg.workers` threads.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Workers(e.to_string()))?;
    pool.install(|| run_in_current_pool(cfg))
}

fn run_in_current_pool(cfg: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    let out = &cfg.out_dir;
    fs::create_dir_all(out).map_err(|source| HarnessError::Io { path: out.clone(), source })?;
    let mut log = RunLog::create(&out.join("run.log"))?;
    log.line(format!("family={} workers={}", cfg.family, cfg.workers))?;
    let model = cfg.model();

    if cfg.family.is_single_particle() {
        let rows = run_sweep(cfg, &model);
        let mut csv = String::from(ERRORS_HEADER);
        csv.push('\n');
        let mut failed = 0;
        for (row, dump) in &rows {
            csv.push_str(&row.csv_line(cfg.family.name()));
            csv.push('\n');
            if let CellOutcome::Failed(msg) = &row.outcome {
                failed += 1;
                log.line(format!(
                    "cell order={} epsilon={} dt={} failed: {msg}",
                    row.order,
                    fmt_real(row.epsilon),
                    fmt_real(row.dt)
                ))?;
            }
            if let Some(text) = dump {
                write_file(&out.join(trajectory_file_name(row)), text)?;
            }
        }
        write_file(&out.join("errors.csv"), &csv)?;
        log.line(format!("sweep done: {} cells, {failed} failed", rows.len()))?;
        return Ok(RunSummary::Sweep { rows: rows.into_iter().map(|(r, _)| r).collect(), failed });
    }

    let mut summaries = Vec::with_capacity(cfg.epsilons.len());
    for &eps in &cfg.epsilons {
        let dir = if cfg.epsilons.len() == 1 { out.clone() } else { out.join(format!("eps_{}", fmt_real(eps))) };
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
        summaries.push(run_vlasov_poisson(cfg, &model, eps, &dir, &mut log)?);
    }
    Ok(RunSummary::VlasovPoisson(summaries))
}
