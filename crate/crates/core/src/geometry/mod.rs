//! ε-dependent computational domains built from mapped quadrilateral patches.

mod counterexample;
mod domain;
mod patch;
mod shape;

pub use counterexample::{
    build_counterexample_domain, build_counterexample_domain_with_cutoff, counterexample_gap_factor, Arm,
    CounterexampleDomain, DEFAULT_CUTOFF,
};
pub use domain::{build_domain, epsilon_limit};
pub use patch::{fan_quads, Coefficients, Patch, PatchComplex, Region, SideSpec, SideState, StripFrame};
pub use shape::{make_vertex_shape, shape_complex, ShapeSegment, VertexShape, R_MIN};

use thiserror::Error;

use crate::graph::CurvatureProfile;
use crate::num::Real;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("curvature-induced potential undefined: 1 + εyκ = {0} <= 0")]
    CoefficientDomain(f64),
    #[error("vertex shape needs at least two distinct directions")]
    TooFewDirections,
    #[error("directions {0} and {1} coincide")]
    DuplicateDirection(usize, usize),
    #[error("zero direction vector at index {0}")]
    ZeroDirection(usize),
    #[error("attachment distance must exceed 1, got {0}")]
    AttachmentTooSmall(f64),
    #[error("interface segments {0} and {1} intersect")]
    InterfacesIntersect(usize, usize),
    #[error("vertex polygon self-intersects")]
    SelfIntersecting,
    #[error("vertex polygon is not star-shaped with respect to its centroid")]
    NotStarShaped,
    #[error("ε = {eps} too large (limit {limit})")]
    EpsTooLarge { eps: f64, limit: f64 },
    #[error("edge {edge}: curvature support clipped by the vertex neighbourhoods")]
    CurvatureClipped { edge: usize },
    #[error("vertex {vertex} has degree {degree} but no vertex shape")]
    MissingShape { vertex: usize, degree: usize },
    #[error("vertex {vertex}: shape directions do not match the incident edges")]
    ShapeMismatch { vertex: usize },
    #[error("edge {edge}: endpoint distance differs from its length; build_domain needs the straightened layout")]
    NotStraightened { edge: usize },
    #[error("edge {edge} is a loop")]
    LoopEdge { edge: usize },
    #[error("patch {patch} is not positively oriented")]
    Orientation { patch: usize },
    #[error("side {side} of patch {patch} matches more than one other side")]
    NonManifold { patch: usize, side: usize },
    #[error("side {side} of patch {patch} must be identified but has no partner")]
    UnmatchedInterface { patch: usize, side: usize },
    #[error("pole of the gap factor: denominator {0:e}")]
    Pole(f64),
    #[error("degenerate counterexample geometry: {0}")]
    Degenerate(String),
}

/// `(κ, κ′, κ″)` of a profile at arclength `x`.
pub fn curvature_triple<T: Real>(p: &CurvatureProfile<T>, x: T) -> (T, T, T) {
    p.triple(x)
}

/// Curvature-induced potential
/// `−κ²/(4(1+εyκ)²) + εyκ″/(2(1+εyκ)³) − 5ε²y²κ′²/(4(1+εyκ)⁴)`.
pub fn k_eps<T: Real>(triple: (T, T, T), y: T, eps: T) -> Result<T, GeometryError> {
    let (k, dk, ddk) = triple;
    let s = T::one() + eps * y * k;
    if !(s > T::zero()) {
        return Err(GeometryError::CoefficientDomain(s.as_f64()));
    }
    let s2 = s * s;
    let four = T::lit(4.0);
    Ok(-k * k / (four * s2) + eps * y * ddk / (T::lit(2.0) * s2 * s)
        - T::lit(5.0) * eps * eps * y * y * dk * dk / (four * s2 * s2))
}

/// Weights of the transformed tube form on the reference rectangle `(0, ℓ) × (−1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeCoefficients<T> {
    pub stiffness_x: T,
    pub stiffness_y: T,
    pub potential: T,
    pub measure: T,
}

pub fn tube_coefficients<T: Real>(
    profile: &CurvatureProfile<T>,
    eps: T,
    x: T,
    y: T,
) -> Result<TubeCoefficients<T>, GeometryError> {
    let triple = profile.triple(x);
    let s = T::one() + eps * y * triple.0;
    let pot = k_eps(triple, y, eps)?;
    Ok(TubeCoefficients {
        stiffness_x: eps / (s * s),
        stiffness_y: T::one() / eps,
        potential: eps * pot,
        measure: eps,
    })
}
