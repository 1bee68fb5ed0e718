//! `−Δ_h φ = ρ` on the inside nodes with `φ = 0` elsewhere, by conjugate
//! gradients on the 5-point stencil.

use super::{Grid, PicError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSettings {
    /// Stop when `‖r‖ ≤ tol ‖ρ‖` (Euclidean norms over inside nodes).
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PoissonSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `‖ρ + Δ_h φ‖ / ‖ρ‖`, recomputed from the returned `φ`
    /// (0 when `ρ` vanishes on the inside nodes).
    pub relative_residual: f64,
}

/// Inside-node numbering and neighbour table of the masked 5-point operator.
struct Operator {
    nodes: Vec<usize>,
    /// Compressed index of the four neighbours, `None` for Dirichlet nodes.
    neighbours: Vec<[Option<usize>; 4]>,
    scale: f64,
}

impl Operator {
    fn new(grid: &Grid) -> Self {
        let nx = grid.nx;
        let mut compressed = vec![None; grid.len()];
        let mut nodes = Vec::with_capacity(grid.inside_count());
        for (k, &inside) in grid.inside.iter().enumerate() {
            if inside {
                compressed[k] = Some(nodes.len());
                nodes.push(k);
            }
        }
        // The disk lies strictly inside the square, so inside nodes are never
        // on its edge and all four neighbour indices exist.
        let neighbours = nodes
            .iter()
            .map(|&k| [compressed[k - 1], compressed[k + 1], compressed[k - nx], compressed[k + nx]])
            .collect();
        Self { nodes, neighbours, scale: 1.0 / (grid.h * grid.h) }
    }

    /// `out = −Δ_h u`.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (m, nb) in self.neighbours.iter().enumerate() {
            let sum: f64 = nb.iter().flatten().map(|&q| u[q]).sum();
            out[m] = (4.0 * u[m] - sum) * self.scale;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves for `grid.phi` from `grid.rho`, then refreshes `grid.electric`.
pub fn solve_poisson(grid: &mut Grid, settings: &PoissonSettings) -> Result<SolveStats, PicError> {
    let op = Operator::new(grid);
    let n = op.nodes.len();
    let rhs: Vec<f64> = op.nodes.iter().map(|&k| grid.rho[k]).collect();
    let rhs_norm = dot(&rhs, &rhs).sqrt();

    grid.phi.iter_mut().for_each(|p| *p = 0.0);
    if rhs_norm == 0.0 {
        grid.update_electric();
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }

    let target = settings.tolerance * rhs_norm;
    let mut u = vec![0.0; n];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while rr.sqrt() > target {
        if iterations == settings.max_iterations {
            return Err(PicError::PoissonNotConverged {
                iterations,
                relative_residual: rr.sqrt() / rhs_norm,
            });
        }
        op.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for m in 0..n {
            u[m] += alpha * p[m];
            r[m] -= alpha * ap[m];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for m in 0..n {
            p[m] = r[m] + beta * p[m];
        }
        rr = rr_next;
        iterations += 1;
    }

    op.apply(&u, &mut ap);
    let true_residual = ap.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    for (m, &k) in op.nodes.iter().enumerate() {
        grid.phi[k] = u[m];
    }
    grid.update_electric();
    Ok(SolveStats { iterations, relative_residual: true_residual / rhs_norm })
}
