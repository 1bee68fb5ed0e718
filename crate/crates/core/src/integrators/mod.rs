//! Time integrators for single macro-particles.
//!
//! The particle state is the augmented `(x, e, w)` triple: position,
//! microscopic kinetic energy and a velocity-direction carrier `w` whose norm
//! is allowed to drift away from `√(2e)`. The semi-implicit schemes treat the
//! stiff rotation `−b w⊥ / ε²` implicitly (one closed-form 2×2 solve per
//! stage) and everything else explicitly. As `ε → 0` with `Δt` fixed they
//! degenerate into explicit schemes for the guiding-center system, which are
//! provided by [`step_limit`].

mod limit;
mod reference;
mod semi_implicit;
mod trajectory;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use thiserror::Error;

use crate::fields::{FieldError, Vec2};

pub use limit::{step_limit, step_limit_reference};
pub use reference::step_reference;
pub use semi_implicit::{step, step_order1, step_order2, step_order3};
pub use trajectory::{
    integrate_trajectory, limit_reference_trajectory, limit_trajectory, particle_trajectory,
    reference_trajectory, step_count, FiniteState, Trajectory,
};

/// SDIRK coefficient of the two-stage scheme, smallest root of `X² − 2X + 1/2`.
pub const GAMMA2: f64 = 1.0 - FRAC_1_SQRT_2;

/// Diagonal coefficient of the four-stage third-order scheme.
pub const ALPHA3: f64 = 0.24169426078821;
pub const ETA3: f64 = 0.12915286960590;
pub const BETA3: f64 = ALPHA3 / 4.0;
pub const GAMMA3: f64 = 0.5 - ALPHA3 - BETA3 - ETA3;

/// One macro-particle in the augmented phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleState {
    pub x: Vec2,
    /// Microscopic kinetic energy.
    pub e: f64,
    pub w: Vec2,
    pub weight: f64,
}

impl ParticleState {
    /// Starts on the constraint manifold `e = ‖v‖²/2`, `w = v`.
    pub fn from_velocity(x: Vec2, v: Vec2, weight: f64) -> Self {
        Self {
            x,
            e: 0.5 * v.norm_sq(),
            w: v,
            weight,
        }
    }

    /// Distance from the constraint, `e − ‖w‖²/2`.
    pub fn constraint_defect(&self) -> f64 {
        self.e - 0.5 * self.w.norm_sq()
    }
}

/// State of the limiting guiding-center system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidingCenterState {
    pub y: Vec2,
    pub g: f64,
}

impl From<&ParticleState> for GuidingCenterState {
    fn from(s: &ParticleState) -> Self {
        Self { y: s.x, g: s.e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeOrder {
    First = 1,
    Second = 2,
    Third = 3,
}

impl SchemeOrder {
    pub const ALL: [SchemeOrder; 3] = [SchemeOrder::First, SchemeOrder::Second, SchemeOrder::Third];

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for SchemeOrder {
    type Error = ParamError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(SchemeOrder::First),
            2 => Ok(SchemeOrder::Second),
            3 => Ok(SchemeOrder::Third),
            other => Err(ParamError::Order(other)),
        }
    }
}

impl fmt::Display for SchemeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("scheme order must be 1, 2 or 3, got {0}")]
    Order(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub dt: f64,
    pub order: SchemeOrder,
}

impl SchemeParams {
    pub fn new(epsilon: f64, dt: f64, order: SchemeOrder) -> Result<Self, ParamError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(ParamError::Epsilon(epsilon));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ParamError::TimeStep(dt));
        }
        Ok(Self { epsilon, dt, order })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step {step}: {source}")]
    Field {
        step: usize,
        #[source]
        source: FieldError,
    },
    #[error("state became non-finite at step {step}")]
    NonFinite { step: usize },
    #[error("invalid time grid: t0 = {t0}, t_final = {t_final}, dt = {dt}")]
    TimeGrid { t0: f64, t_final: f64, dt: f64 },
}

impl IntegrationError {
    /// Index of the step that failed, when there is one.
    pub fn step(&self) -> Option<usize> {
        match self {
            IntegrationError::Field { step, .. } | IntegrationError::NonFinite { step } => Some(*step),
            IntegrationError::TimeGrid { .. } => None,
        }
    }
}

/// Solves `w + β w⊥ = a` in closed form.
///
/// The matrix `[[1, −β], [β, 1]]` has determinant `1 + β² > 0`, so the solve
/// always succeeds; `‖w‖ = ‖a‖ / √(1 + β²)`.
#[inline]
pub fn solve_rotation_system(a: Vec2, beta: f64) -> Vec2 {
    let det = 1.0 + beta * beta;
    Vec2::new((a.v1 + beta * a.v2) / det, (a.v2 - beta * a.v1) / det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gamma2_is_smallest_root() {
        let residual = GAMMA2 * GAMMA2 - 2.0 * GAMMA2 + 0.5;
        assert!(residual.abs() < 1e-14);
        assert!(GAMMA2 > 0.0 && GAMMA2 < 1.0);
    }

    #[test]
    fn third_order_constants() {
        assert_eq!(ALPHA3, 0.24169426078821);
        assert_eq!(ETA3, 0.12915286960590);
        assert_eq!(BETA3, ALPHA3 / 4.0);
        assert_relative_eq!(ALPHA3 + BETA3 + ETA3 + GAMMA3, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rotation_solve_examples() {
        assert_eq!(solve_rotation_system(Vec2::new(1.0, 0.0), 0.0), Vec2::new(1.0, 0.0));
        assert_eq!(solve_rotation_system(Vec2::new(1.0, 0.0), 1.0), Vec2::new(0.5, -0.5));
        let w = solve_rotation_system(Vec2::new(3.0, 4.0), 2.0);
        assert_relative_eq!(w.norm(), 5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(SchemeParams::new(0.0, 0.1, SchemeOrder::First).is_err());
        assert!(SchemeParams::new(1.0, -0.1, SchemeOrder::First).is_err());
        assert!(SchemeParams::new(f64::NAN, 0.1, SchemeOrder::First).is_err());
        assert!(SchemeOrder::try_from(4).is_err());
        assert_eq!(SchemeOrder::try_from(2).unwrap(), SchemeOrder::Second);
    }

    proptest! {
        #[test]
        fn rotation_solve_residual(a1 in -1e6f64..1e6, a2 in -1e6f64..1e6, beta in -1e8f64..1e8) {
            let a = Vec2::new(a1, a2);
            let w = solve_rotation_system(a, beta);
            let residual = (w + w.perp() * beta - a).norm();
            prop_assert!(residual <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn rotation_solve_norm_identity(a1 in -1e3f64..1e3, a2 in -1e3f64..1e3, beta in -1e6f64..1e6) {
            let a = Vec2::new(a1, a2);
            prop_assume!(a.norm() > 1e-9);
            let w = solve_rotation_system(a, beta);
            let ratio = w.norm() * (1.0 + beta * beta).sqrt() / a.norm();
            prop_assert!((ratio - 1.0).abs() <= 1e-12);
        }
    }
}
