//! Semi-implicit schemes of orders 1, 2 and 3 for the augmented system.
//!
//! Every stage has the same shape: the fields (and `χ`) are frozen at an
//! explicitly computed point, and the stage velocity solves
//! `w = base + c (G − b w⊥ / ε)` with `G = E − χ ∇ln b` and `c = a Δt / ε`,
//! i.e. one call to [`solve_rotation_system`].

use super::{
    solve_rotation_system, ParticleState, SchemeOrder, SchemeParams, ALPHA3, BETA3, ETA3, GAMMA2,
    GAMMA3,
};
use crate::fields::{chi, FieldError, FieldModel, Vec2};

/// Fields frozen for one implicit stage.
#[derive(Clone, Copy)]
struct StageField {
    b: f64,
    electric: Vec2,
    /// `E − χ ∇ln b`
    forcing: Vec2,
}

impl StageField {
    fn at<M: FieldModel + ?Sized>(
        model: &M,
        t: f64,
        x: Vec2,
        e: f64,
        w: Vec2,
    ) -> Result<Self, FieldError> {
        let s = model.sample(t, x)?;
        Ok(Self {
            b: s.b,
            electric: s.electric,
            forcing: s.electric - s.grad_log_b * chi(e, w),
        })
    }
}

/// Result of one implicit stage: the stage velocity, the full right-hand side
/// of the `w` equation and of the `e` equation.
#[derive(Clone, Copy)]
struct Stage {
    w: Vec2,
    f: Vec2,
    s: f64,
}

/// Solves `w = base + c (G − b w⊥ / ε)`.
#[inline]
fn implicit_stage(base: Vec2, c: f64, field: &StageField, epsilon: f64) -> Stage {
    let w = solve_rotation_system(base + field.forcing * c, c * field.b / epsilon);
    Stage {
        w,
        f: field.forcing - w.perp() * (field.b / epsilon),
        s: field.electric.dot(w),
    }
}

/// Backward/forward Euler combination: only `w` is implicit.
pub fn step_order1<M: FieldModel + ?Sized>(
    s: &ParticleState,
    t: f64,
    p: &SchemeParams,
    model: &M,
) -> Result<ParticleState, FieldError> {
    let h = p.dt / p.epsilon;
    let field = StageField::at(model, t, s.x, s.e, s.w)?;
    let st = implicit_stage(s.w, h, &field, p.epsilon);
    Ok(ParticleState {
        x: s.x + st.w * h,
        e: s.e + h * st.s,
        w: st.w,
        weight: s.weight,
    })
}

/// Two-stage scheme: explicit RK for the slow part, L-stable SDIRK(γ) for the
/// rotation. The second stage sees fields at `t + Δt / (2γ)`.
pub fn step_order2<M: FieldModel + ?Sized>(
    s: &ParticleState,
    t: f64,
    p: &SchemeParams,
    model: &M,
) -> Result<ParticleState, FieldError> {
    let h = p.dt / p.epsilon;
    let g = GAMMA2;

    let f0 = StageField::at(model, t, s.x, s.e, s.w)?;
    let st1 = implicit_stage(s.w, g * h, &f0, p.epsilon);

    let lead = h / (2.0 * g);
    let t_hat = t + p.dt / (2.0 * g);
    let x_hat = s.x + st1.w * lead;
    let e_hat = s.e + lead * st1.s;
    let w_hat = s.w + st1.f * lead;

    let f1 = StageField::at(model, t_hat, x_hat, e_hat, w_hat)?;
    let st2 = implicit_stage(s.w + st1.f * ((1.0 - g) * h), g * h, &f1, p.epsilon);

    Ok(ParticleState {
        x: s.x + st1.w * ((1.0 - g) * h) + st2.w * (g * h),
        e: s.e + (1.0 - g) * h * st1.s + g * h * st2.s,
        w: st2.w,
        weight: s.weight,
    })
}

/// Four-stage third-order scheme. Stages 1 and 2 both use fields and `χ` at
/// `(tⁿ, xⁿ, eⁿ, wⁿ)`; stage 3 is evaluated at `tⁿ⁺¹`, stage 4 at `tⁿ + Δt/2`.
pub fn step_order3<M: FieldModel + ?Sized>(
    s: &ParticleState,
    t: f64,
    p: &SchemeParams,
    model: &M,
) -> Result<ParticleState, FieldError> {
    let h = p.dt / p.epsilon;
    let a = ALPHA3 * h;
    let eps = p.epsilon;

    let f0 = StageField::at(model, t, s.x, s.e, s.w)?;
    let st1 = implicit_stage(s.w, a, &f0, eps);
    let st2 = implicit_stage(s.w - st1.f * a, a, &f0, eps);

    let x_hat2 = s.x + st2.w * h;
    let e_hat2 = s.e + h * st2.s;
    let w_hat2 = s.w + st2.f * h;
    let f2 = StageField::at(model, t + p.dt, x_hat2, e_hat2, w_hat2)?;
    let st3 = implicit_stage(s.w + st2.f * ((1.0 - ALPHA3) * h), a, &f2, eps);

    let quarter = 0.25 * h;
    let x_hat3 = s.x + (st2.w + st3.w) * quarter;
    let e_hat3 = s.e + quarter * (st2.s + st3.s);
    let w_hat3 = s.w + (st2.f + st3.f) * quarter;
    let f3 = StageField::at(model, t + 0.5 * p.dt, x_hat3, e_hat3, w_hat3)?;
    let base4 = s.w + st1.f * (BETA3 * h) + st2.f * (ETA3 * h) + st3.f * (GAMMA3 * h);
    let st4 = implicit_stage(base4, a, &f3, eps);

    let sixth = h / 6.0;
    Ok(ParticleState {
        x: s.x + (st2.w + st3.w + st4.w * 4.0) * sixth,
        e: s.e + sixth * (st2.s + st3.s + 4.0 * st4.s),
        w: s.w + (st2.f + st3.f + st4.f * 4.0) * sixth,
        weight: s.weight,
    })
}

/// Dispatches on `p.order`.
pub fn step<M: FieldModel + ?Sized>(
    s: &ParticleState,
    t: f64,
    p: &SchemeParams,
    model: &M,
) -> Result<ParticleState, FieldError> {
    match p.order {
        SchemeOrder::First => step_order1(s, t, p, model),
        SchemeOrder::Second => step_order2(s, t, p, model),
        SchemeOrder::Third => step_order3(s, t, p, model),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::AnalyticModel;
    use approx::assert_relative_eq;

    const UNIT_B: AnalyticModel = AnalyticModel::Uniform { b: 1.0, electric: Vec2::ZERO };

    fn params(eps: f64, dt: f64, order: SchemeOrder) -> SchemeParams {
        SchemeParams::new(eps, dt, order).unwrap()
    }

    #[test]
    fn order1_hand_computed_step() {
        let s = ParticleState { x: Vec2::ZERO, e: 0.5, w: Vec2::new(1.0, 0.0), weight: 1.0 };
        let next = step_order1(&s, 0.0, &params(1.0, 1.0, SchemeOrder::First), &UNIT_B).unwrap();
        assert_eq!(next.w, Vec2::new(0.5, -0.5));
        assert_eq!(next.x, Vec2::new(0.5, -0.5));
        assert_eq!(next.e, 0.5);
        assert_eq!(next.weight, 1.0);
    }

    #[test]
    fn order1_damps_w_by_rotation_norm() {
        let s = ParticleState { x: Vec2::new(0.3, 0.1), e: 2.0, w: Vec2::new(1.5, -0.5), weight: 1.0 };
        for (eps, dt) in [(1.0, 0.1), (0.1, 0.05), (1e-3, 0.01)] {
            let next = step_order1(&s, 0.0, &params(eps, dt, SchemeOrder::First), &UNIT_B).unwrap();
            let expected = s.w.norm() / (1.0 + (dt / (eps * eps)).powi(2)).sqrt();
            assert_relative_eq!(next.w.norm(), expected, max_relative = 1e-13);
        }
    }

    /// Straight-line transcription of the two-stage scheme for `b ≡ 1`, `E ≡ 0`,
    /// where `∇ln b = 0` removes `χ` from every stage.
    fn order2_by_hand(w0: Vec2, x0: Vec2, e0: f64, eps: f64, dt: f64) -> (Vec2, f64, Vec2) {
        let g = 1.0 - 1.0 / 2f64.sqrt();
        let c = g * dt / eps;
        let beta = c / eps;
        let w1 = solve_rotation_system(w0, beta);
        let f1 = Vec2::new(w1.v2, -w1.v1) / eps; // −w1⊥/ε
        let base = w0 + f1 * ((1.0 - g) * dt / eps);
        let w2 = solve_rotation_system(base, beta);
        let x = x0 + w1 * ((1.0 - g) * dt / eps) + w2 * (g * dt / eps);
        (x, e0, w2)
    }

    #[test]
    fn order2_matches_hand_transcription() {
        let s = ParticleState { x: Vec2::new(0.2, -0.4), e: 0.5, w: Vec2::new(1.0, 0.0), weight: 1.0 };
        for dt in [0.5, 0.1, 0.01] {
            let next = step_order2(&s, 0.0, &params(1.0, dt, SchemeOrder::Second), &UNIT_B).unwrap();
            let (x, e, w) = order2_by_hand(s.w, s.x, s.e, 1.0, dt);
            assert!((next.x - x).norm() <= 1e-14);
            assert!((next.w - w).norm() <= 1e-14);
            assert_eq!(next.e, e);
        }
    }

    /// Independent transcription of the four printed stages for `b ≡ 1`, `E ≡ 0`.
    fn order3_by_hand(w0: Vec2, x0: Vec2, eps: f64, dt: f64) -> (Vec2, Vec2) {
        let alpha = 0.24169426078821;
        let eta = 0.12915286960590;
        let beta = alpha / 4.0;
        let gamma = 0.5 - alpha - beta - eta;
        let k = dt / eps;
        let rot = alpha * k / eps;
        let force = |w: Vec2| Vec2::new(w.v2 / eps, -w.v1 / eps);
        let w1 = solve_rotation_system(w0, rot);
        let f1 = force(w1);
        let w2 = solve_rotation_system(w0 - f1 * (alpha * k), rot);
        let f2 = force(w2);
        let w3 = solve_rotation_system(w0 + f2 * ((1.0 - alpha) * k), rot);
        let f3 = force(w3);
        let w4 = solve_rotation_system(w0 + f1 * (beta * k) + f2 * (eta * k) + f3 * (gamma * k), rot);
        let f4 = force(w4);
        let x = x0 + (w2 + w3 + w4 * 4.0) * (k / 6.0);
        let w = w0 + (f2 + f3 + f4 * 4.0) * (k / 6.0);
        (x, w)
    }

    #[test]
    fn order3_matches_hand_transcription() {
        let s = ParticleState { x: Vec2::new(-1.0, 2.0), e: 0.5, w: Vec2::new(1.0, 0.0), weight: 0.25 };
        for (eps, dt) in [(1.0, 0.1), (1.0, 0.7), (0.5, 0.01)] {
            let next = step_order3(&s, 0.0, &params(eps, dt, SchemeOrder::Third), &UNIT_B).unwrap();
            let (x, w) = order3_by_hand(s.w, s.x, eps, dt);
            assert!((next.x - x).norm() <= 1e-13, "x {} vs {}", next.x, x);
            assert!((next.w - w).norm() <= 1e-13, "w {} vs {}", next.w, w);
            assert_eq!(next.e, s.e);
            assert_eq!(next.weight, s.weight);
        }
    }

    #[test]
    fn energy_frozen_without_sources() {
        let model = AnalyticModel::Uniform { b: 2.5, electric: Vec2::ZERO };
        let mut s = ParticleState { x: Vec2::new(1.0, 1.0), e: 3.7, w: Vec2::new(-0.2, 2.0), weight: 1.0 };
        for order in SchemeOrder::ALL {
            let p = params(0.3, 0.05, order);
            for n in 0..50 {
                let next = step(&s, n as f64 * p.dt, &p, &model).unwrap();
                assert_eq!(next.e.to_bits(), s.e.to_bits());
                s = next;
            }
        }
    }

    #[test]
    fn field_domain_error_propagates() {
        let s = ParticleState { x: Vec2::new(11.0, 0.0), e: 1.0, w: Vec2::new(1.0, 0.0), weight: 1.0 };
        for order in SchemeOrder::ALL {
            let p = params(1.0, 0.1, order);
            assert!(step(&s, 0.0, &p, &AnalyticModel::DiskConfinement).is_err());
        }
    }
}
