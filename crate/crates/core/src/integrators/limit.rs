//! Explicit schemes for the guiding-center system
//!
//! ```text
//! Y' = F(t, Y) + g ∇⊥b / b² (t, Y),    g' = g (∇⊥b / b²)(t, Y) · E(t, Y)
//! ```
//!
//! Orders 1–3 are the `ε → 0` limits of the semi-implicit schemes with the
//! same `Δt`; the RK4 step is a non-stiff reference.

use super::{GuidingCenterState, SchemeOrder, GAMMA2};
use crate::fields::{FieldError, FieldModel, Vec2};

#[inline]
fn velocity<M: FieldModel + ?Sized>(
    model: &M,
    t: f64,
    y: Vec2,
    g: f64,
) -> Result<(Vec2, f64), FieldError> {
    let s = model.sample(t, y)?;
    Ok((s.full_drift(g), s.energy_drift_rate(g)))
}

pub fn step_limit<M: FieldModel + ?Sized>(
    gc: &GuidingCenterState,
    t: f64,
    dt: f64,
    order: SchemeOrder,
    model: &M,
) -> Result<GuidingCenterState, FieldError> {
    let (u0, r0) = velocity(model, t, gc.y, gc.g)?;
    match order {
        SchemeOrder::First => Ok(GuidingCenterState {
            y: gc.y + u0 * dt,
            g: gc.g + dt * r0,
        }),
        SchemeOrder::Second => {
            let lead = dt / (2.0 * GAMMA2);
            let (u1, r1) = velocity(model, t + lead, gc.y + u0 * lead, gc.g + lead * r0)?;
            Ok(GuidingCenterState {
                y: gc.y + u0 * ((1.0 - GAMMA2) * dt) + u1 * (GAMMA2 * dt),
                g: gc.g + (1.0 - GAMMA2) * dt * r0 + GAMMA2 * dt * r1,
            })
        }
        SchemeOrder::Third => {
            let (u1, r1) = velocity(model, t + dt, gc.y + u0 * dt, gc.g + dt * r0)?;
            let q = 0.25 * dt;
            let (u2, r2) = velocity(model, t + 0.5 * dt, gc.y + (u0 + u1) * q, gc.g + q * (r0 + r1))?;
            let sixth = dt / 6.0;
            Ok(GuidingCenterState {
                y: gc.y + (u0 + u1 + u2 * 4.0) * sixth,
                g: gc.g + (r0 + r1 + 4.0 * r2) * sixth,
            })
        }
    }
}

/// Classical RK4 on the guiding-center system.
pub fn step_limit_reference<M: FieldModel + ?Sized>(
    gc: &GuidingCenterState,
    t: f64,
    dt: f64,
    model: &M,
) -> Result<GuidingCenterState, FieldError> {
    let half = 0.5 * dt;
    let (u1, r1) = velocity(model, t, gc.y, gc.g)?;
    let (u2, r2) = velocity(model, t + half, gc.y + u1 * half, gc.g + half * r1)?;
    let (u3, r3) = velocity(model, t + half, gc.y + u2 * half, gc.g + half * r2)?;
    let (u4, r4) = velocity(model, t + dt, gc.y + u3 * dt, gc.g + dt * r3)?;
    let sixth = dt / 6.0;
    Ok(GuidingCenterState {
        y: gc.y + (u1 + u2 * 2.0 + u3 * 2.0 + u4) * sixth,
        g: gc.g + (r1 + 2.0 * r2 + 2.0 * r3 + r4) * sixth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::AnalyticModel;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_without_electric_field() {
        let model = AnalyticModel::ParabolicNoE { alpha: 0.5 };
        let gc = GuidingCenterState { y: Vec2::new(5.0, 4.0), g: 30.5 };
        let next = step_limit(&gc, 0.0, 0.01, SchemeOrder::First, &model).unwrap();
        assert_eq!(next.g, gc.g);
        assert_eq!(next.y.v1, 5.0);
        assert_relative_eq!(next.y.v2, 4.0 + 0.01 * 30.5 * 5.0 / 182.25, epsilon = 1e-14);
        assert_relative_eq!(next.y.v2, 4.0083676268861455, epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_field_reduces_to_electric_drift() {
        let model = AnalyticModel::Uniform { b: 2.0, electric: Vec2::new(0.5, -1.0) };
        let gc = GuidingCenterState { y: Vec2::new(1.0, 2.0), g: 4.0 };
        let next = step_limit(&gc, 0.0, 0.1, SchemeOrder::First, &model).unwrap();
        let f = -Vec2::new(0.5, -1.0).perp() / 2.0;
        assert_eq!(next.y, gc.y + f * 0.1);
        assert_eq!(next.g, 4.0);
    }

    #[test]
    fn limit_schemes_converge_at_their_order() {
        let model = AnalyticModel::ParabolicLinearE { alpha: 0.5 };
        let gc0 = GuidingCenterState { y: Vec2::new(1.0, 2.0), g: 3.0 };
        let t_final = 1.0;
        let exact = {
            let mut s = gc0;
            let n = 20_000;
            let h = t_final / n as f64;
            for i in 0..n {
                s = step_limit_reference(&s, i as f64 * h, h, &model).unwrap();
            }
            s
        };
        for (order, lo, hi) in [
            (SchemeOrder::First, 0.8, 1.2),
            (SchemeOrder::Second, 1.8, 2.2),
            (SchemeOrder::Third, 2.7, 3.3),
        ] {
            let err = |n: usize| {
                let h = t_final / n as f64;
                let mut s = gc0;
                for i in 0..n {
                    s = step_limit(&s, i as f64 * h, h, order, &model).unwrap();
                }
                (s.y - exact.y).norm() + (s.g - exact.g).abs()
            };
            let observed = (err(100) / err(200)).log2();
            assert!((lo..=hi).contains(&observed), "order {order}: {observed}");
        }
    }
}
