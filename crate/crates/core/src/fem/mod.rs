//! Conforming P1 discretisation of the flat, mixed and tube quadratic forms.

mod assemble;
mod mesh;

pub use assemble::{
    assemble, assemble_flat, assemble_mixed_dn, assemble_tube, element_matrices, tube_intervals, tube_mesh,
    tube_problem, ElementPair,
};
pub use mesh::{mesh, mesh_with_counts, subdivision_counts, Columns, NodeTag, TriMesh};

use thiserror::Error;

use crate::geometry::{CounterexampleDomain, GeometryError, Region};
use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("mesh width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("mesh width {h} exceeds the smallest patch side {min_side}")]
    WidthTooLarge { h: f64, min_side: f64 },
    #[error("triangle {0} has nonpositive area")]
    InvertedTriangle(usize),
    #[error("no free degrees of freedom")]
    NoFreeDofs,
    #[error("tube coefficients need a strip frame")]
    MissingFrame,
    #[error("cutoff {cutoff}·ε exceeds the strip length")]
    CutoffTooLong { cutoff: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Nodal interpolant of `ε^{−1/2} χ(x) cos(πy/2)` on a counterexample mesh,
/// with `χ = 1` on the vertex pieces, `cos(πx/(2cε))` on `0 ≤ x ≤ cε` and zero beyond.
pub fn trial_field<T: Real>(domain: &CounterexampleDomain<T>, mesh: &TriMesh<T>, c: T) -> Result<Vec<T>, FemError> {
    let eps = domain.eps;
    for a in &domain.arms {
        if !(c * eps < domain.length - a.x0) {
            return Err(FemError::CutoffTooLong { cutoff: c.as_f64() });
        }
    }
    let amp = T::one() / eps.sqrt();
    let half_pi = T::FRAC_PI_2();
    Ok(mesh
        .nodes
        .iter()
        .zip(&mesh.node_patch)
        .map(|(&p, &pi)| {
            let patch = &mesh.patches[pi];
            let arm = patch.arm.expect("counterexample patches carry their arm");
            let (x, y) = domain.frame(arm).local(p);
            let chi = match patch.region {
                Region::Vertex(_) => T::one(),
                Region::Edge(_) if x <= T::zero() => T::one(),
                Region::Edge(_) if x >= c * eps => T::zero(),
                Region::Edge(_) => (half_pi * x / (c * eps)).cos(),
            };
            let y = y.max(-T::one()).min(T::one());
            amp * chi * (half_pi * y).cos()
        })
        .collect())
}

#[cfg(test)]
mod tests;
