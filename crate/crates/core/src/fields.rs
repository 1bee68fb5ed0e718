//! Electromagnetic environment for the poloidal-plane dynamics.
//!
//! The magnetic field points out of the plane with magnitude `b(t, x) / ε`;
//! everything here works with the rescaled magnitude `b`. A [`FieldModel`]
//! returns `b`, `∇ln b` and the electric field `E` at a point, which is all
//! the particle schemes and the guiding-center drifts need.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Denominator guard for [`chi`].
const CHI_DENOMINATOR_FLOOR: f64 = 1e-300;

/// Radius of the disk on which [`AnalyticModel::DiskConfinement`] is defined.
pub const DISK_FIELD_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub v1: f64,
    pub v2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { v1: 0.0, v2: 0.0 };

    #[inline]
    pub const fn new(v1: f64, v2: f64) -> Self {
        Self { v1, v2 }
    }

    /// Rotation by +π/2: `(v1, v2) ↦ (−v2, v1)`.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.v2, self.v1)
    }

    #[inline]
    pub fn dot(self, other: Self) -> f64 {
        self.v1 * other.v1 + self.v2 * other.v2
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.v1.hypot(self.v2)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.v1.is_finite() && self.v2.is_finite()
    }
}

/// Free-function form of [`Vec2::perp`].
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    v.perp()
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.v1 + rhs.v1, self.v2 + rhs.v2)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.v1 += rhs.v1;
        self.v2 += rhs.v2;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.v1 - rhs.v1, self.v2 - rhs.v2)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.v1, -self.v2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.v1 * s, self.v2 * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.v1 / s, self.v2 / s)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.v1, self.v2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FieldError {
    #[error("{model}: point {x} lies outside the field's domain")]
    OutsideDomain { model: &'static str, x: Vec2 },
}

/// Field values at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub b: f64,
    pub grad_log_b: Vec2,
    pub electric: Vec2,
}

impl FieldSample {
    /// `∇⊥b / b²`, computed as `(∇ln b)⊥ / b`.
    #[inline]
    pub fn grad_b_perp_over_b2(&self) -> Vec2 {
        self.grad_log_b.perp() / self.b
    }

    /// `F = −E⊥ / b`.
    #[inline]
    pub fn electric_drift(&self) -> Vec2 {
        -self.electric.perp() / self.b
    }

    /// `F + g ∇⊥b / b²`.
    #[inline]
    pub fn full_drift(&self, g: f64) -> Vec2 {
        self.electric_drift() + self.grad_b_perp_over_b2() * g
    }

    /// `g (∇⊥b / b²) · E`.
    #[inline]
    pub fn energy_drift_rate(&self, g: f64) -> f64 {
        g * self.grad_b_perp_over_b2().dot(self.electric)
    }
}

/// An evaluatable environment `(b, ∇ln b, E)` as a function of `(t, x)`.
///
/// Implementations must be pure: the same `(t, x)` always gives the same
/// sample, and evaluation may happen concurrently from many threads.
pub trait FieldModel: Sync {
    fn sample(&self, t: f64, x: Vec2) -> Result<FieldSample, FieldError>;

    /// Lower bound `b₀` on `b` over the model's domain.
    fn b_floor(&self) -> f64;

    fn b(&self, t: f64, x: Vec2) -> Result<f64, FieldError> {
        self.sample(t, x).map(|s| s.b)
    }

    fn grad_log_b(&self, t: f64, x: Vec2) -> Result<Vec2, FieldError> {
        self.sample(t, x).map(|s| s.grad_log_b)
    }

    fn electric(&self, t: f64, x: Vec2) -> Result<Vec2, FieldError> {
        self.sample(t, x).map(|s| s.electric)
    }
}

impl<M: FieldModel + ?Sized> FieldModel for &M {
    fn sample(&self, t: f64, x: Vec2) -> Result<FieldSample, FieldError> {
        (**self).sample(t, x)
    }

    fn b_floor(&self) -> f64 {
        (**self).b_floor()
    }
}

/// The closed-form configurations used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticModel {
    /// `b = 1 + α x₁²`, `E = 0`.
    ParabolicNoE { alpha: f64 },
    /// `b = 1 + α x₁²`, `E = (0, −x₂)`.
    ParabolicLinearE { alpha: f64 },
    /// `b = 10 / √(100 − ‖x‖²)`, `E = 0`; only defined for `‖x‖ < 10`.
    DiskConfinement,
    /// Spatially constant `b` and `E`.
    Uniform { b: f64, electric: Vec2 },
}

impl AnalyticModel {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticModel::ParabolicNoE { .. } => "parabolic_b_no_e",
            AnalyticModel::ParabolicLinearE { .. } => "parabolic_b_linear_e",
            AnalyticModel::DiskConfinement => "disk_confinement_b",
            AnalyticModel::Uniform { .. } => "uniform",
        }
    }

    /// `b` alone, without the gradient. Used by the finite-difference checks.
    pub fn magnitude(&self, x: Vec2) -> Result<f64, FieldError> {
        match *self {
            AnalyticModel::ParabolicNoE { alpha } | AnalyticModel::ParabolicLinearE { alpha } => {
                Ok(1.0 + alpha * x.v1 * x.v1)
            }
            AnalyticModel::DiskConfinement => {
                let gap = DISK_FIELD_RADIUS * DISK_FIELD_RADIUS - x.norm_sq();
                if gap > 0.0 {
                    Ok(DISK_FIELD_RADIUS / gap.sqrt())
                } else {
                    Err(FieldError::OutsideDomain { model: self.name(), x })
                }
            }
            AnalyticModel::Uniform { b, .. } => Ok(b),
        }
    }
}

impl FieldModel for AnalyticModel {
    fn sample(&self, _t: f64, x: Vec2) -> Result<FieldSample, FieldError> {
        match *self {
            AnalyticModel::ParabolicNoE { alpha } => {
                let b = 1.0 + alpha * x.v1 * x.v1;
                Ok(FieldSample {
                    b,
                    grad_log_b: Vec2::new(2.0 * alpha * x.v1 / b, 0.0),
                    electric: Vec2::ZERO,
                })
            }
            AnalyticModel::ParabolicLinearE { alpha } => {
                let b = 1.0 + alpha * x.v1 * x.v1;
                Ok(FieldSample {
                    b,
                    grad_log_b: Vec2::new(2.0 * alpha * x.v1 / b, 0.0),
                    electric: Vec2::new(0.0, -x.v2),
                })
            }
            AnalyticModel::DiskConfinement => {
                let gap = DISK_FIELD_RADIUS * DISK_FIELD_RADIUS - x.norm_sq();
                if !(gap > 0.0) {
                    return Err(FieldError::OutsideDomain { model: self.name(), x });
                }
                // ln b = ln 10 − ½ ln(100 − ‖x‖²)  ⇒  ∇ln b = x / (100 − ‖x‖²)
                Ok(FieldSample {
                    b: DISK_FIELD_RADIUS / gap.sqrt(),
                    grad_log_b: x / gap,
                    electric: Vec2::ZERO,
                })
            }
            AnalyticModel::Uniform { b, electric } => Ok(FieldSample {
                b,
                grad_log_b: Vec2::ZERO,
                electric,
            }),
        }
    }

    fn b_floor(&self) -> f64 {
        match *self {
            AnalyticModel::ParabolicNoE { .. }
            | AnalyticModel::ParabolicLinearE { .. }
            | AnalyticModel::DiskConfinement => 1.0,
            AnalyticModel::Uniform { b, .. } => b,
        }
    }
}

/// Electric drift `F(t, x) = −E⊥(t, x) / b(t, x)`.
pub fn electric_drift<M: FieldModel + ?Sized>(model: &M, t: f64, x: Vec2) -> Result<Vec2, FieldError> {
    model.sample(t, x).map(|s| s.electric_drift())
}

/// Guiding-center velocity `F + g ∇⊥b / b²`.
pub fn full_drift<M: FieldModel + ?Sized>(
    model: &M,
    t: f64,
    x: Vec2,
    g: f64,
) -> Result<Vec2, FieldError> {
    model.sample(t, x).map(|s| s.full_drift(g))
}

/// Rate of change of the guiding-center energy, `g (∇⊥b / b²) · E`.
///
/// This is the curl-free form used by the limiting schemes; it differs from
/// `−g Div F` by `g Rot(E) / b` when `E` is not a gradient.
pub fn energy_drift_rate<M: FieldModel + ?Sized>(
    model: &M,
    t: f64,
    x: Vec2,
    g: f64,
) -> Result<f64, FieldError> {
    model.sample(t, x).map(|s| s.energy_drift_rate(g))
}

/// Constraint-restoring weight `χ(e, w) = e / (e + ‖w‖²/2) · (e − ‖w‖²/2)⁺`.
///
/// Total on all of `ℝ × ℝ²`: it is 0 when the denominator vanishes or `e < 0`,
/// and the prefactor is clamped into `[0, 1]` so that `0 ≤ χ ≤ max(e, 0)`.
#[inline]
pub fn chi(e: f64, w: Vec2) -> f64 {
    let half_w2 = 0.5 * w.norm_sq();
    let excess = e - half_w2;
    if excess <= 0.0 {
        return 0.0;
    }
    let denom = e + half_w2;
    if denom <= CHI_DENOMINATOR_FLOOR {
        return 0.0;
    }
    (e / denom).clamp(0.0, 1.0) * excess
}
