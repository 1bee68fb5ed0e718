//! Single-particle error sweeps over `(ε, Δt, order)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::ExperimentConfig;
use crate::diagnostics::{l1_trajectory_error, ErrorReport};
use crate::fields::{FieldModel, Vec2};
use crate::integrators::{
    limit_reference_trajectory, particle_trajectory, reference_trajectory, GuidingCenterState, ParticleState,
    SchemeOrder, SchemeParams, Trajectory,
};
use crate::pic::fmt_real;

pub const ERRORS_HEADER: &str =
    "family,order,epsilon,dt,x_err_ref,w_err_ref_scaled,e_err_ref,x_err_limit,w_err_drift,e_err_limit,status";

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Ok(ErrorReport),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub order: SchemeOrder,
    pub epsilon: f64,
    pub dt: f64,
    pub outcome: CellOutcome,
}

impl SweepRow {
    pub fn csv_line(&self, family: &str) -> String {
        let mut line = format!("{family},{},{},{}", self.order, fmt_real(self.epsilon), fmt_real(self.dt));
        match &self.outcome {
            CellOutcome::Ok(r) => {
                for v in r.values() {
                    let _ = write!(line, ",{}", fmt_real(v));
                }
                line.push_str(",ok");
            }
            CellOutcome::Failed(_) => line.push_str(",,,,,,,failed"),
        }
        line
    }
}

/// Everything computed for one `(ε, Δt)` pair, shared by all orders.
pub struct References {
    pub particle: Trajectory<ParticleState>,
    pub limit: Trajectory<GuidingCenterState>,
    /// `U⁰(tⁿ) = F + g ∇⊥b / b²` along the limit reference.
    pub drift: Vec<Vec2>,
}

pub fn references<M: FieldModel + ?Sized>(
    cfg: &ExperimentConfig,
    model: &M,
    epsilon: f64,
    dt: f64,
) -> Result<References, String> {
    let initial = ParticleState::from_velocity(cfg.x0, cfg.v0, 1.0);
    let particle = reference_trajectory(initial, 0.0, cfg.t_final, dt, cfg.reference_dt(epsilon, dt), epsilon, model)
        .map_err(|e| format!("reference: {e}"))?;
    let limit = limit_reference_trajectory(GuidingCenterState::from(&initial), 0.0, cfg.t_final, dt, cfg.limit_substeps, model)
        .map_err(|e| format!("limit reference: {e}"))?;
    let drift = limit
        .states
        .iter()
        .zip(&limit.times)
        .map(|(gc, &t)| model.sample(t, gc.y).map(|s| s.full_drift(gc.g)))
        .collect::<Result<_, _>>()
        .map_err(|e| format!("drift: {e}"))?;
    Ok(References { particle, limit, drift })
}

/// Errors of the scheme trajectory against both references. The drift error
/// skips `n = 0`, where `ε⁻¹ w⁰ = ε⁻¹ v⁰` is the (unprepared) initial datum.
pub fn error_report(
    traj: &Trajectory<ParticleState>,
    refs: &References,
    params: &SchemeParams,
    t_final: f64,
) -> Result<ErrorReport, String> {
    let (eps, dt) = (params.epsilon, params.dt);
    let n = traj.len();
    if refs.particle.len() != n || refs.limit.len() != n {
        return Err(format!(
            "sample counts differ: scheme {n}, reference {}, limit {}",
            refs.particle.len(),
            refs.limit.len()
        ));
    }
    let xs = traj.map(|s| s.x);
    let ws = traj.map(|s| s.w);
    let es = traj.map(|s| s.e);
    let l1v = |a: &[Vec2], b: &[Vec2]| l1_trajectory_error(a, b, dt, t_final).map_err(|e| e.to_string());
    let l1s = |a: &[f64], b: &[f64]| l1_trajectory_error(a, b, dt, t_final).map_err(|e| e.to_string());

    let scaled: Vec<Vec2> = ws.iter().skip(1).map(|w| *w / eps).collect();
    let report = ErrorReport {
        epsilon: eps,
        dt,
        order: params.order,
        x_err_ref: l1v(&xs, &refs.particle.map(|s| s.x))?,
        w_err_ref_scaled: l1v(&ws, &refs.particle.map(|s| s.w))? / eps,
        e_err_ref: l1s(&es, &refs.particle.map(|s| s.e))?,
        x_err_limit: l1v(&xs, &refs.limit.map(|s| s.y))?,
        w_err_drift: l1v(&scaled, &refs.drift[1..])?,
        e_err_limit: l1s(&es, &refs.limit.map(|s| s.g))?,
    };
    if report.is_valid() {
        Ok(report)
    } else {
        Err("non-finite error norm".into())
    }
}

/// Rows for one `(ε, Δt)` pair and every configured order, plus the scheme
/// trajectories when requested.
pub fn evaluate_pair<M: FieldModel + ?Sized>(
    cfg: &ExperimentConfig,
    model: &M,
    epsilon: f64,
    dt: f64,
) -> Vec<(SweepRow, Option<String>)> {
    let refs = references(cfg, model, epsilon, dt);
    let initial = ParticleState::from_velocity(cfg.x0, cfg.v0, 1.0);
    cfg.orders
        .iter()
        .map(|&order| {
            let mut dump = None;
            let outcome = match &refs {
                Err(msg) => CellOutcome::Failed(msg.clone()),
                Ok(refs) => {
                    let result = SchemeParams::new(epsilon, dt, order)
                        .map_err(|e| e.to_string())
                        .and_then(|p| {
                            let traj = particle_trajectory(initial, 0.0, cfg.t_final, &p, model).map_err(|e| e.to_string())?;
                            let report = error_report(&traj, refs, &p, cfg.t_final)?;
                            if cfg.write_trajectories {
                                dump = Some(trajectory_csv(&traj, refs));
                            }
                            Ok(report)
                        });
                    match result {
                        Ok(r) => CellOutcome::Ok(r),
                        Err(msg) => CellOutcome::Failed(msg),
                    }
                }
            };
            (SweepRow { order, epsilon, dt, outcome }, dump)
        })
        .collect()
}

/// All cells, sorted by `(order, ε, Δt)`.
pub fn run_sweep<M: FieldModel + ?Sized>(cfg: &ExperimentConfig, model: &M) -> Vec<(SweepRow, Option<String>)> {
    let pairs: Vec<(f64, f64)> = cfg.epsilons.iter().flat_map(|&e| cfg.dts.iter().map(move |&d| (e, d))).collect();
    let mut rows: Vec<_> = pairs
        .par_iter()
        .flat_map_iter(|&(eps, dt)| evaluate_pair(cfg, model, eps, dt))
        .collect();
    rows.sort_by(|(a, _), (b, _)| {
        a.order
            .cmp(&b.order)
            .then(a.epsilon.total_cmp(&b.epsilon))
            .then(a.dt.total_cmp(&b.dt))
    });
    rows
}

pub fn trajectory_file_name(row: &SweepRow) -> String {
    format!("trajectory_order{}_eps{}_dt{}.csv", row.order, fmt_real(row.epsilon), fmt_real(row.dt))
}

fn trajectory_csv(traj: &Trajectory<ParticleState>, refs: &References) -> String {
    let mut out = String::from("t,x1,x2,e,w1,w2,ref_x1,ref_x2,ref_e,limit_y1,limit_y2,limit_g\n");
    for (k, s) in traj.states.iter().enumerate() {
        let r = &refs.particle.states[k];
        let l = &refs.limit.states[k];
        let vals = [
            traj.times[k], s.x.v1, s.x.v2, s.e, s.w.v1, s.w.v2, r.x.v1, r.x.v2, r.e, l.y.v1, l.y.v2, l.g,
        ];
        let line: Vec<String> = vals.iter().map(|&v| fmt_real(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
