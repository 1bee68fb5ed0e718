//! Uniform node grid over `[−L, L]²` with a disk mask, CIC deposition and
//! bilinear gather.

use rayon::prelude::*;

use super::PicError;
use crate::fields::Vec2;
use crate::integrators::ParticleState;

/// Half-width of the computational square and radius of the disk domain.
pub const DOMAIN_RADIUS: f64 = 6.0;

/// Particles per deposition partition. Fixed so that the merge order, and
/// hence every bit of `rho`, does not depend on the number of workers.
pub const DEPOSIT_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub half_width: f64,
    pub h: f64,
    /// `true` for nodes strictly inside the disk, where `φ` is unknown.
    pub inside: Vec<bool>,
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    pub electric: Vec<Vec2>,
}

/// Bilinear stencil: lower-left node and the in-cell fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Stencil {
    pub i: usize,
    pub j: usize,
    pub fx: f64,
    pub fy: f64,
}

impl Stencil {
    /// Node indices and weights of the four corners.
    #[inline]
    pub fn corners(&self, nx: usize) -> [(usize, f64); 4] {
        let k = self.j * nx + self.i;
        let (gx, gy) = (1.0 - self.fx, 1.0 - self.fy);
        [
            (k, gx * gy),
            (k + 1, self.fx * gy),
            (k + nx, gx * self.fy),
            (k + nx + 1, self.fx * self.fy),
        ]
    }
}

impl Grid {
    /// Square `nx × nx` grid on `[−L, L]²` with `L = 6`.
    pub fn new(nx: usize) -> Result<Self, PicError> {
        Self::with_half_width(nx, DOMAIN_RADIUS)
    }

    pub fn with_half_width(nx: usize, half_width: f64) -> Result<Self, PicError> {
        if nx < 3 {
            return Err(PicError::GridSize(nx));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(PicError::HalfWidth(half_width));
        }
        let ny = nx;
        let h = 2.0 * half_width / (nx - 1) as f64;
        let mut grid = Self {
            nx,
            ny,
            half_width,
            h,
            inside: vec![false; nx * ny],
            rho: vec![0.0; nx * ny],
            phi: vec![0.0; nx * ny],
            electric: vec![Vec2::ZERO; nx * ny],
        };
        for j in 0..ny {
            for i in 0..nx {
                let x = grid.node(i, j);
                grid.inside[j * nx + i] = x.norm() < half_width;
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Node coordinate along one axis. Written as `L (2i − (n−1)) / (n−1)` so
    /// that mirrored nodes have exactly opposite coordinates.
    #[inline]
    pub fn coordinate(&self, i: usize, n: usize) -> f64 {
        let m = (n - 1) as f64;
        self.half_width * (2.0 * i as f64 - m) / m
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.coordinate(i, self.nx), self.coordinate(j, self.ny))
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&m| m).count()
    }

    /// Closed bounding square `[−L, L]²`.
    #[inline]
    pub fn in_square(&self, x: Vec2) -> bool {
        x.v1.abs() <= self.half_width && x.v2.abs() <= self.half_width
    }

    /// Open disk `‖x‖ < L`, the physical domain.
    #[inline]
    pub fn in_disk(&self, x: Vec2) -> bool {
        x.norm() < self.half_width
    }

    #[inline]
    pub(crate) fn stencil(&self, x: Vec2) -> Option<Stencil> {
        if !self.in_square(x) {
            return None;
        }
        let (i, fx) = cell(x.v1, self.half_width, self.h, self.nx);
        let (j, fy) = cell(x.v2, self.half_width, self.h, self.ny);
        Some(Stencil { i, j, fx, fy })
    }

    /// `h² Σ ρ` over all nodes.
    pub fn deposited_mass(&self) -> f64 {
        self.h * self.h * self.rho.iter().sum::<f64>()
    }

    /// Bilinear interpolation of the node field; zero outside the square.
    pub fn gather(&self, x: Vec2) -> Vec2 {
        match self.stencil(x) {
            Some(st) => st
                .corners(self.nx)
                .iter()
                .fold(Vec2::ZERO, |acc, &(k, wgt)| acc + self.electric[k] * wgt),
            None => Vec2::ZERO,
        }
    }

    /// Replaces `rho` by the CIC density of the particles in the square and
    /// returns how many particles fell outside it.
    pub fn deposit(&mut self, particles: &[ParticleState]) -> usize {
        let n = self.len();
        let partial: Vec<(Vec<f64>, usize)> = particles
            .par_chunks(DEPOSIT_CHUNK)
            .map(|chunk| {
                let mut buf = vec![0.0; n];
                let mut outside = 0;
                for p in chunk {
                    match self.stencil(p.x) {
                        Some(st) => {
                            for (k, wgt) in st.corners(self.nx) {
                                buf[k] += p.weight * wgt;
                            }
                        }
                        None => outside += 1,
                    }
                }
                (buf, outside)
            })
            .collect();

        let inv_area = 1.0 / (self.h * self.h);
        self.rho.iter_mut().for_each(|r| *r = 0.0);
        let mut outside = 0;
        for (buf, out) in &partial {
            for (r, b) in self.rho.iter_mut().zip(buf) {
                *r += b;
            }
            outside += out;
        }
        for r in &mut self.rho {
            *r *= inv_area;
        }
        outside
    }

    /// `E = −∇φ`: central differences, one-sided on the edges of the square.
    pub fn update_electric(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        let inv2h = 0.5 / self.h;
        let invh = 1.0 / self.h;
        let phi = &self.phi;
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let dx = if i == 0 {
                    (phi[k + 1] - phi[k]) * invh
                } else if i == nx - 1 {
                    (phi[k] - phi[k - 1]) * invh
                } else {
                    (phi[k + 1] - phi[k - 1]) * inv2h
                };
                let dy = if j == 0 {
                    (phi[k + nx] - phi[k]) * invh
                } else if j == ny - 1 {
                    (phi[k] - phi[k - nx]) * invh
                } else {
                    (phi[k + nx] - phi[k - nx]) * inv2h
                };
                self.electric[k] = Vec2::new(-dx, -dy);
            }
        }
    }
}

/// Lower node index and fraction of `x` in its cell; the last cell is closed
/// on the right so that `x = L` lands on the final node with fraction 1.
#[inline]
fn cell(x: f64, half_width: f64, h: f64, n: usize) -> (usize, f64) {
    let s = (x + half_width) / h;
    let i = (s.floor().max(0.0) as usize).min(n - 2);
    (i, (s - i as f64).clamp(0.0, 1.0))
}
