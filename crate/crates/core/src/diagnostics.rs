//! Trajectory error norms, conserved quantities and oscillation observables.

use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{FieldError, FieldModel, Vec2};
use crate::integrators::{ParticleState, SchemeOrder};
use crate::pic::{fmt_real, reconstruct_velocity, Grid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("time step and horizon must be positive, got dt = {dt}, T = {t_final}")]
    Horizon { dt: f64, t_final: f64 },
}

/// Distance used by [`l1_trajectory_error`].
pub trait Deviation: Copy {
    fn deviation(self, other: Self) -> f64;
}

impl Deviation for f64 {
    fn deviation(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Deviation for Vec2 {
    fn deviation(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

/// `(Δt / T) Σₙ ‖aⁿ − bⁿ‖` over all common samples.
pub fn l1_trajectory_error<T: Deviation>(a: &[T], b: &[T], dt: f64, t_final: f64) -> Result<f64, DiagnosticsError> {
    if a.len() != b.len() {
        return Err(DiagnosticsError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if !(dt > 0.0 && t_final > 0.0) {
        return Err(DiagnosticsError::Horizon { dt, t_final });
    }
    let sum: f64 = a.iter().zip(b).map(|(&p, &q)| p.deviation(q)).sum();
    Ok(dt / t_final * sum)
}

/// The six error norms of one `(ε, Δt, order)` sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub epsilon: f64,
    pub dt: f64,
    pub order: SchemeOrder,
    pub x_err_ref: f64,
    /// `ε⁻¹ ‖w_Δt − w_ref‖`
    pub w_err_ref_scaled: f64,
    pub e_err_ref: f64,
    pub x_err_limit: f64,
    /// `‖ε⁻¹ w_Δt − U⁰‖`
    pub w_err_drift: f64,
    pub e_err_limit: f64,
}

impl ErrorReport {
    pub fn values(&self) -> [f64; 6] {
        [
            self.x_err_ref,
            self.w_err_ref_scaled,
            self.e_err_ref,
            self.x_err_limit,
            self.w_err_drift,
            self.e_err_limit,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.values().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub field: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic + self.field
    }
}

/// `Σ ωₖ eₖ` plus `½ h² Σ_inside ‖E‖²`.
pub fn total_energy(particles: &[ParticleState], grid: &Grid) -> EnergyBreakdown {
    let kinetic = particles.iter().map(|p| p.weight * p.e).sum();
    let field_sq: f64 = grid
        .electric
        .iter()
        .zip(&grid.inside)
        .filter(|(_, &inside)| inside)
        .map(|(e, _)| e.norm_sq())
        .sum();
    EnergyBreakdown { kinetic, field: 0.5 * grid.h * grid.h * field_sq }
}

/// `μ = Σ ωₖ eₖ / b(t, xₖ)` over the particles accepted by `include`.
pub fn adiabatic_invariant<'a, M, I, F>(particles: I, model: &M, t: f64, include: F) -> Result<f64, FieldError>
where
    M: FieldModel + ?Sized,
    I: IntoIterator<Item = &'a ParticleState>,
    F: Fn(&ParticleState) -> bool,
{
    let mut mu = 0.0;
    for p in particles.into_iter().filter(|p| include(p)) {
        mu += p.weight * p.e / model.b(t, p.x)?;
    }
    Ok(mu)
}

/// `(2 v₁ v₂, v₁² − v₂²)` of the reconstructed velocity.
pub fn oscillation_observables(s: &ParticleState) -> (f64, f64) {
    let v = reconstruct_velocity(s.e, s.w);
    (2.0 * v.v1 * v.v2, v.v1 * v.v1 - v.v2 * v.v2)
}

/// One row of `timeseries.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub energy: EnergyBreakdown,
    pub adiabatic_invariant: f64,
    pub escaped: usize,
}

impl TimeSeriesRow {
    pub const HEADER: &'static str = "t,total_energy,kinetic,field,adiabatic_invariant,escaped_count";

    /// Energy of the whole ensemble; `μ` of the particles in the disk only,
    /// the rest being counted as escaped.
    pub fn measure<M: FieldModel + ?Sized>(
        t: f64,
        particles: &[ParticleState],
        grid: &Grid,
        model: &M,
    ) -> Result<Self, FieldError> {
        let escaped = particles.par_iter().filter(|p| !grid.in_disk(p.x)).count();
        let energy = total_energy(particles, grid);
        let adiabatic_invariant = adiabatic_invariant(particles, model, t, |p| grid.in_disk(p.x))?;
        Ok(Self { t, energy, adiabatic_invariant, escaped })
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_real(self.t),
            fmt_real(self.energy.total()),
            fmt_real(self.energy.kinetic),
            fmt_real(self.energy.field),
            fmt_real(self.adiabatic_invariant),
            self.escaped
        )
    }
}

/// `max |qₙ − q₀| / |q₀|` over a series.
pub fn relative_drift(series: &[f64]) -> Option<f64> {
    let first = *series.first()?;
    if first == 0.0 {
        return None;
    }
    Some(series.iter().map(|q| ((q - first) / first).abs()).fold(0.0, f64::max))
}
