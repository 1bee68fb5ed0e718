//! Self-consistent particle-in-cell machinery on the disk `‖x‖ < 6`.
//!
//! Charge is deposited with cloud-in-cell weights on a uniform node grid over
//! the bounding square, the potential solves `−Δφ = ρ` on the nodes inside
//! the disk with `φ = 0` elsewhere, and `E = −∇φ` is interpolated back
//! bilinearly. Within one time step the field is frozen at its `tⁿ` value.

mod grid;
mod io;
mod poisson;
mod sampling;
mod step;

use thiserror::Error;

use crate::fields::{FieldError, Vec2};
use crate::integrators::ParticleState;

pub use grid::{Grid, DEPOSIT_CHUNK, DOMAIN_RADIUS};
pub use io::{fmt_real, write_density_snapshot, write_particles};
pub use poisson::{solve_poisson, PoissonSettings, SolveStats};
pub use sampling::{sample_initial, InitialDataSpec};
pub use step::{prepare_fields, push_ensemble, vp_step, FieldUpdate, SelfConsistentField};

/// Below this `‖w‖` the direction is undefined and the velocity is zero.
pub const MIN_DIRECTION_NORM: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PicError {
    #[error("grid needs at least 3 nodes per side, got {0}")]
    GridSize(usize),
    #[error("grid half-width must be positive, got {0}")]
    HalfWidth(f64),
    #[error("ensemble must contain at least one particle")]
    EmptyEnsemble,
    #[error("invalid standard deviation {0}")]
    Spread(f64),
    #[error("Poisson solve did not converge in {iterations} iterations (relative residual {relative_residual:e})")]
    PoissonNotConverged { iterations: usize, relative_residual: f64 },
    #[error("particle {particle}: {source}")]
    Push {
        particle: usize,
        #[source]
        source: FieldError,
    },
    #[error("particle {particle} became non-finite")]
    NonFinite { particle: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub particles: Vec<ParticleState>,
    pub seed: u64,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }
}

/// `v = √(2e) w / ‖w‖`, with negative `e` treated as zero.
pub fn reconstruct_velocity(e: f64, w: Vec2) -> Vec2 {
    let norm = w.norm();
    if norm <= MIN_DIRECTION_NORM {
        return Vec2::ZERO;
    }
    w * ((2.0 * e.max(0.0)).sqrt() / norm)
}
