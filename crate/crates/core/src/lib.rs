//! Asymptotic-preserving particle-in-cell toolkit for the two-dimensional
//! Vlasov–Poisson system in a strong, inhomogeneous magnetic field.
//!
//! * [`fields`]: field models, drift velocities and the `χ` weight.
//! * [`integrators`]: semi-implicit particle schemes (orders 1–3), their
//!   guiding-center limits, and RK4 oracles.
//! * [`pic`]: sampling, deposition, masked-disk Poisson solve, gather, and
//!   the self-consistent step.
//! * [`diagnostics`]: error norms and conserved quantities.
//! * [`harness`]: experiment configuration, sweeps and output files.

pub mod fields;
pub mod integrators;
pub mod pic;
pub mod diagnostics;
pub mod harness;

pub use fields::{AnalyticModel, FieldError, FieldModel, FieldSample, Vec2};
pub use integrators::{GuidingCenterState, ParticleState, SchemeOrder, SchemeParams};
