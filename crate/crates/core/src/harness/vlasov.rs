//! Self-consistent Vlasov–Poisson runs on the disk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{ExperimentConfig, HarnessError, RunLog};
use crate::diagnostics::{relative_drift, TimeSeriesRow};
use crate::fields::FieldModel;
use crate::integrators::{step_count, SchemeOrder, SchemeParams};
use crate::pic::{
    fmt_real, prepare_fields, push_ensemble, sample_initial, write_density_snapshot, write_particles, Grid,
    InitialDataSpec,
};

#[derive(Debug, Clone, PartialEq)]
pub struct VlasovSummary {
    pub epsilon: f64,
    pub steps: usize,
    pub rows: Vec<TimeSeriesRow>,
    pub max_cg_iterations: usize,
    pub max_cg_residual: f64,
    /// Largest relative deviation of the deposited mass from the in-square weight.
    pub max_mass_defect: f64,
}

impl VlasovSummary {
    pub fn energy_drift(&self) -> Option<f64> {
        relative_drift(&self.rows.iter().map(|r| r.energy.total()).collect::<Vec<_>>())
    }

    pub fn invariant_drift(&self) -> Option<f64> {
        relative_drift(&self.rows.iter().map(|r| r.adiabatic_invariant).collect::<Vec<_>>())
    }

    pub fn max_escaped(&self) -> usize {
        self.rows.iter().map(|r| r.escaped).max().unwrap_or(0)
    }
}

/// Steps at which snapshots are written: always `0`, plus the step nearest to
/// each configured time within the horizon. Returns `(step, label)`.
pub fn snapshot_steps(times: &[f64], dt: f64, n_steps: usize) -> Vec<(usize, f64)> {
    let mut out = vec![(0usize, 0.0)];
    for &t in times {
        let n = (t / dt).round();
        if n >= 0.0 && n as usize <= n_steps && !out.iter().any(|&(m, _)| m == n as usize) {
            out.push((n as usize, t));
        }
    }
    out.sort_by_key(|&(n, _)| n);
    out
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Runs one `ε` with the first configured `Δt` and order, writing
/// `timeseries.csv`, `density_t<time>.txt` and `particles_t<time>.csv` into
/// `dir`.
pub fn run_vlasov_poisson<M: FieldModel + ?Sized>(
    cfg: &ExperimentConfig,
    model: &M,
    epsilon: f64,
    dir: &Path,
    log: &mut RunLog,
) -> Result<VlasovSummary, HarnessError> {
    let dt = cfg.dts[0];
    let order = cfg.orders.first().copied().unwrap_or(SchemeOrder::Third);
    let params = SchemeParams::new(epsilon, dt, order)?;
    let n_steps = step_count(0.0, cfg.t_final, dt)?;
    let snapshots = snapshot_steps(&cfg.snapshot_times, dt, n_steps);

    let mut ensemble = sample_initial(&InitialDataSpec::default(), cfg.n_particles, cfg.seed)
        .map_err(|source| HarnessError::Pic { step: 0, source })?;
    let mut grid = Grid::new(cfg.nx).map_err(|source| HarnessError::Pic { step: 0, source })?;
    log.line(format!(
        "vlasov_poisson epsilon={} dt={} order={} T={} N={} nx={} seed={} steps={}",
        fmt_real(epsilon),
        fmt_real(dt),
        order,
        fmt_real(cfg.t_final),
        cfg.n_particles,
        cfg.nx,
        cfg.seed,
        n_steps
    ))?;

    let ts_path = dir.join("timeseries.csv");
    let mut ts = create(&ts_path)?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    writeln!(ts, "{}", TimeSeriesRow::HEADER).map_err(io_err(&ts_path))?;

    let mut summary = VlasovSummary {
        epsilon,
        steps: n_steps,
        rows: Vec::with_capacity(n_steps + 1),
        max_cg_iterations: 0,
        max_cg_residual: 0.0,
        max_mass_defect: 0.0,
    };
    let mut next_snapshot = 0;
    for n in 0..=n_steps {
        let t = n as f64 * dt;
        let update = match prepare_fields(&ensemble, &mut grid, &cfg.poisson) {
            Ok(u) => u,
            Err(source) => {
                log.line(format!("step {n}: field solve failed: {source}"))?;
                return Err(HarnessError::Pic { step: n, source });
            }
        };
        summary.max_cg_iterations = summary.max_cg_iterations.max(update.solve.iterations);
        summary.max_cg_residual = summary.max_cg_residual.max(update.solve.relative_residual);
        let in_square: f64 = ensemble.particles.iter().filter(|p| grid.in_square(p.x)).map(|p| p.weight).sum();
        if in_square > 0.0 {
            let defect = ((grid.deposited_mass() - in_square) / in_square).abs();
            summary.max_mass_defect = summary.max_mass_defect.max(defect);
        }

        let row = TimeSeriesRow::measure(t, &ensemble.particles, &grid, model).map_err(|source| {
            let _ = log.line(format!("step {n}: diagnostics failed: {source}"));
            HarnessError::Field { step: n, source }
        })?;
        writeln!(ts, "{}", row.csv_line()).map_err(io_err(&ts_path))?;
        summary.rows.push(row);

        if next_snapshot < snapshots.len() && snapshots[next_snapshot].0 == n {
            let label = fmt_real(snapshots[next_snapshot].1);
            let path = dir.join(format!("density_t{label}.txt"));
            let mut f = create(&path)?;
            write_density_snapshot(&grid, t, &mut f).and_then(|_| f.flush()).map_err(io_err(&path))?;
            if cfg.write_particles {
                let path = dir.join(format!("particles_t{label}.csv"));
                let mut f = create(&path)?;
                write_particles(&ensemble.particles, &mut f).and_then(|_| f.flush()).map_err(io_err(&path))?;
            }
            log.line(format!("step {n}: snapshot t={label} escaped={}", row.escaped))?;
            next_snapshot += 1;
        }

        if n == n_steps {
            break;
        }
        if let Err(source) = push_ensemble(&mut ensemble, &grid, t, &params, model) {
            log.line(format!("step {}: particle push failed: {source}", n + 1))?;
            ts.flush().map_err(io_err(&ts_path))?;
            return Err(HarnessError::Pic { step: n + 1, source });
        }
    }
    ts.flush().map_err(io_err(&ts_path))?;

    log.line(format!(
        "done: energy_drift={} invariant_drift={} max_escaped={} max_cg_iterations={} max_cg_residual={} max_mass_defect={}",
        summary.energy_drift().map(fmt_real).unwrap_or_else(|| "n/a".into()),
        summary.invariant_drift().map(fmt_real).unwrap_or_else(|| "n/a".into()),
        summary.max_escaped(),
        summary.max_cg_iterations,
        fmt_real(summary.max_cg_residual),
        fmt_real(summary.max_mass_defect)
    ))?;
    Ok(summary)
}
