//! Whole-trajectory integration on the uniform grid `tⁿ = t₀ + n Δt`,
//! `0 ≤ n ≤ N_T = ⌊(T − t₀) / Δt⌋`.

use super::{
    step, step_limit, step_limit_reference, step_reference, GuidingCenterState, IntegrationError,
    ParticleState, SchemeOrder, SchemeParams,
};
use crate::fields::{FieldError, FieldModel};

/// Relative slack when flooring `(T − t₀) / Δt`, so that e.g. `2 / 0.04`
/// counts 50 steps even if the quotient rounds to `49.999…`.
const STEP_COUNT_SLACK: f64 = 1e-9;

pub trait FiniteState {
    fn is_finite(&self) -> bool;
}

impl FiniteState for ParticleState {
    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.e.is_finite() && self.w.is_finite() && self.weight.is_finite()
    }
}

impl FiniteState for GuidingCenterState {
    fn is_finite(&self) -> bool {
        self.y.is_finite() && self.g.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    /// Projects every state through `f`, e.g. to pull out positions.
    pub fn map<T>(&self, f: impl FnMut(&S) -> T) -> Vec<T> {
        self.states.iter().map(f).collect()
    }
}

/// `N_T = ⌊(T − t₀) / Δt⌋`.
pub fn step_count(t0: f64, t_final: f64, dt: f64) -> Result<usize, IntegrationError> {
    let span = t_final - t0;
    if !(dt > 0.0) || !dt.is_finite() || !span.is_finite() || span < 0.0 {
        return Err(IntegrationError::TimeGrid { t0, t_final, dt });
    }
    Ok((span / dt * (1.0 + STEP_COUNT_SLACK)).floor() as usize)
}

/// Runs `step(state, tⁿ)` for `n = 0 .. N_T` and keeps every state.
///
/// Stops at the first field error or non-finite state and reports the index
/// of the step that produced it (1-based: step `n` maps `tⁿ⁻¹ → tⁿ`).
pub fn integrate_trajectory<S, F>(
    initial: S,
    t0: f64,
    t_final: f64,
    dt: f64,
    mut step_fn: F,
) -> Result<Trajectory<S>, IntegrationError>
where
    S: Clone + FiniteState,
    F: FnMut(&S, f64) -> Result<S, FieldError>,
{
    let n_steps = step_count(t0, t_final, dt)?;
    if !initial.is_finite() {
        return Err(IntegrationError::NonFinite { step: 0 });
    }
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(t0);
    states.push(initial);
    for n in 0..n_steps {
        let t = t0 + n as f64 * dt;
        let next = step_fn(&states[n], t)
            .map_err(|source| IntegrationError::Field { step: n + 1, source })?;
        if !next.is_finite() {
            return Err(IntegrationError::NonFinite { step: n + 1 });
        }
        times.push(t0 + (n + 1) as f64 * dt);
        states.push(next);
    }
    Ok(Trajectory { times, states })
}

/// Semi-implicit trajectory with the scheme selected by `params.order`.
pub fn particle_trajectory<M: FieldModel + ?Sized>(
    initial: ParticleState,
    t0: f64,
    t_final: f64,
    params: &SchemeParams,
    model: &M,
) -> Result<Trajectory<ParticleState>, IntegrationError> {
    integrate_trajectory(initial, t0, t_final, params.dt, |s, t| step(s, t, params, model))
}

/// RK4 oracle sampled every `dt_sample`. The fine step is the largest
/// `dt_sample / k ≤ dt_fine_max`, so samples land exactly on `tⁿ`.
pub fn reference_trajectory<M: FieldModel + ?Sized>(
    initial: ParticleState,
    t0: f64,
    t_final: f64,
    dt_sample: f64,
    dt_fine_max: f64,
    epsilon: f64,
    model: &M,
) -> Result<Trajectory<ParticleState>, IntegrationError> {
    let substeps = substeps_for(dt_sample, dt_fine_max);
    let h = dt_sample / substeps as f64;
    integrate_trajectory(initial, t0, t_final, dt_sample, |s, t| {
        let mut cur = *s;
        for k in 0..substeps {
            cur = step_reference(&cur, t + k as f64 * h, h, epsilon, model)?;
        }
        Ok(cur)
    })
}

/// Explicit limit scheme of the given order.
pub fn limit_trajectory<M: FieldModel + ?Sized>(
    initial: GuidingCenterState,
    t0: f64,
    t_final: f64,
    dt: f64,
    order: SchemeOrder,
    model: &M,
) -> Result<Trajectory<GuidingCenterState>, IntegrationError> {
    integrate_trajectory(initial, t0, t_final, dt, |s, t| step_limit(s, t, dt, order, model))
}

/// RK4 on the guiding-center system with `substeps` fine steps per sample.
pub fn limit_reference_trajectory<M: FieldModel + ?Sized>(
    initial: GuidingCenterState,
    t0: f64,
    t_final: f64,
    dt_sample: f64,
    substeps: usize,
    model: &M,
) -> Result<Trajectory<GuidingCenterState>, IntegrationError> {
    let substeps = substeps.max(1);
    let h = dt_sample / substeps as f64;
    integrate_trajectory(initial, t0, t_final, dt_sample, |s, t| {
        let mut cur = *s;
        for k in 0..substeps {
            cur = step_limit_reference(&cur, t + k as f64 * h, h, model)?;
        }
        Ok(cur)
    })
}

/// Smallest `k ≥ 1` with `dt_sample / k ≤ dt_fine_max`.
pub(crate) fn substeps_for(dt_sample: f64, dt_fine_max: f64) -> usize {
    let k = (dt_sample / dt_fine_max * (1.0 - STEP_COUNT_SLACK)).ceil();
    if k.is_finite() && k >= 1.0 {
        k as usize
    } else {
        1
    }
}
