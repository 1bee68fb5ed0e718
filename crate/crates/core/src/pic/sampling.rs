use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ParticleEnsemble, PicError};
use crate::fields::Vec2;
use crate::integrators::ParticleState;

/// Two Gaussian blobs at `±center` in space, Maxwellian in velocity, total
/// mass 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub center: Vec2,
    /// Per-component standard deviation of each blob.
    pub position_std: f64,
    /// Per-component standard deviation of the velocity.
    pub velocity_std: f64,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self {
            center: Vec2::new(1.5, -1.5),
            position_std: 1.0,
            velocity_std: std::f64::consts::SQRT_2,
        }
    }
}

/// Draws `n` particles of weight `1/n`, sequentially from a ChaCha8 stream.
pub fn sample_initial(spec: &InitialDataSpec, n: usize, seed: u64) -> Result<ParticleEnsemble, PicError> {
    if n == 0 {
        return Err(PicError::EmptyEnsemble);
    }
    let pos = Normal::new(0.0, spec.position_std).map_err(|_| PicError::Spread(spec.position_std))?;
    let vel = Normal::new(0.0, spec.velocity_std).map_err(|_| PicError::Spread(spec.velocity_std))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = 1.0 / n as f64;
    let particles = (0..n)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let x = spec.center * sign + Vec2::new(pos.sample(&mut rng), pos.sample(&mut rng));
            let v = Vec2::new(vel.sample(&mut rng), vel.sample(&mut rng));
            ParticleState::from_velocity(x, v, weight)
        })
        .collect();
    Ok(ParticleEnsemble { particles, seed })
}
