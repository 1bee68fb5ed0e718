//! Explicit RK4 on the χ-free augmented system, used as a fine-step oracle:
//!
//! ```text
//! ε x' = w,   ε e' = E · w,   ε w' = −b w⊥ / ε + E
//! ```

use super::ParticleState;
use crate::fields::{FieldError, FieldModel, Vec2};

#[derive(Clone, Copy)]
struct Rate {
    x: Vec2,
    e: f64,
    w: Vec2,
}

fn rate<M: FieldModel + ?Sized>(
    model: &M,
    t: f64,
    x: Vec2,
    w: Vec2,
    epsilon: f64,
) -> Result<Rate, FieldError> {
    let s = model.sample(t, x)?;
    let inv = 1.0 / epsilon;
    Ok(Rate {
        x: w * inv,
        e: s.electric.dot(w) * inv,
        w: (s.electric - w.perp() * (s.b * inv)) * inv,
    })
}

/// One classical RK4 step of size `dt_fine`. Stable only for `dt_fine ≲ ε²/b`.
pub fn step_reference<M: FieldModel + ?Sized>(
    s: &ParticleState,
    t: f64,
    dt_fine: f64,
    epsilon: f64,
    model: &M,
) -> Result<ParticleState, FieldError> {
    let h = dt_fine;
    let k1 = rate(model, t, s.x, s.w, epsilon)?;
    let k2 = rate(model, t + 0.5 * h, s.x + k1.x * (0.5 * h), s.w + k1.w * (0.5 * h), epsilon)?;
    let k3 = rate(model, t + 0.5 * h, s.x + k2.x * (0.5 * h), s.w + k2.w * (0.5 * h), epsilon)?;
    let k4 = rate(model, t + h, s.x + k3.x * h, s.w + k3.w * h, epsilon)?;
    let sixth = h / 6.0;
    Ok(ParticleState {
        x: s.x + (k1.x + k2.x * 2.0 + k3.x * 2.0 + k4.x) * sixth,
        e: s.e + (k1.e + 2.0 * k2.e + 2.0 * k3.e + k4.e) * sixth,
        w: s.w + (k1.w + k2.w * 2.0 + k3.w * 2.0 + k4.w) * sixth,
        weight: s.weight,
    })
}
