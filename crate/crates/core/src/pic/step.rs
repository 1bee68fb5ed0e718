use rayon::prelude::*;

use super::{solve_poisson, Grid, ParticleEnsemble, PicError, PoissonSettings, SolveStats};
use crate::fields::{FieldError, FieldModel, FieldSample, Vec2};
use crate::integrators::{step, FiniteState, SchemeParams};

/// External magnetic model plus the gathered self-consistent field, frozen
/// for the duration of one time step.
pub struct SelfConsistentField<'a, M: ?Sized> {
    pub grid: &'a Grid,
    pub external: &'a M,
}

impl<M: FieldModel + ?Sized> FieldModel for SelfConsistentField<'_, M> {
    fn sample(&self, t: f64, x: Vec2) -> Result<FieldSample, FieldError> {
        let mut s = self.external.sample(t, x)?;
        s.electric += self.grid.gather(x);
        Ok(s)
    }

    fn b_floor(&self) -> f64 {
        self.external.b_floor()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldUpdate {
    /// Particles outside the bounding square, which deposit nothing.
    pub outside_square: usize,
    pub solve: SolveStats,
}

/// Deposits the ensemble and solves for the potential and field.
pub fn prepare_fields(
    ensemble: &ParticleEnsemble,
    grid: &mut Grid,
    settings: &PoissonSettings,
) -> Result<FieldUpdate, PicError> {
    let outside_square = grid.deposit(&ensemble.particles);
    let solve = solve_poisson(grid, settings)?;
    Ok(FieldUpdate { outside_square, solve })
}

/// Advances every particle one step in the field currently held by `grid`.
/// On failure the ensemble is left untouched and the lowest failing particle
/// index is reported.
pub fn push_ensemble<M: FieldModel + ?Sized>(
    ensemble: &mut ParticleEnsemble,
    grid: &Grid,
    t: f64,
    params: &SchemeParams,
    external: &M,
) -> Result<(), PicError> {
    let field = SelfConsistentField { grid, external };
    let next: Vec<_> = ensemble
        .particles
        .par_iter()
        .map(|p| step(p, t, params, &field))
        .collect();
    let mut out = Vec::with_capacity(next.len());
    for (particle, res) in next.into_iter().enumerate() {
        let s = res.map_err(|source| PicError::Push { particle, source })?;
        if !s.is_finite() {
            return Err(PicError::NonFinite { particle });
        }
        out.push(s);
    }
    ensemble.particles = out;
    Ok(())
}

/// Deposit, solve, push.
pub fn vp_step<M: FieldModel + ?Sized>(
    ensemble: &mut ParticleEnsemble,
    grid: &mut Grid,
    t: f64,
    params: &SchemeParams,
    external: &M,
    settings: &PoissonSettings,
) -> Result<FieldUpdate, PicError> {
    let update = prepare_fields(ensemble, grid, settings)?;
    push_ensemble(ensemble, grid, t, params, external)?;
    Ok(update)
}
