//! Plain-text density snapshots and particle dumps.

use std::io::{self, Write};

use super::Grid;
use crate::integrators::ParticleState;

/// Shortest round-trip decimal; exponent form for very small or large values.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Header `nx ny L t`, then `ny` rows of `nx` densities, lowest `x₂` first.
pub fn write_density_snapshot<W: Write>(grid: &Grid, t: f64, out: &mut W) -> io::Result<()> {
    writeln!(out, "{} {} {} {}", grid.nx, grid.ny, fmt_real(grid.half_width), fmt_real(t))?;
    for row in grid.rho.chunks(grid.nx) {
        let line: Vec<String> = row.iter().map(|&r| fmt_real(r)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn write_particles<W: Write>(particles: &[ParticleState], out: &mut W) -> io::Result<()> {
    writeln!(out, "id,x1,x2,e,w1,w2,weight")?;
    for (id, p) in particles.iter().enumerate() {
        writeln!(
            out,
            "{id},{},{},{},{},{},{}",
            fmt_real(p.x.v1),
            fmt_real(p.x.v2),
            fmt_real(p.e),
            fmt_real(p.w.v1),
            fmt_real(p.w.v2),
            fmt_real(p.weight)
        )?;
    }
    Ok(())
}
