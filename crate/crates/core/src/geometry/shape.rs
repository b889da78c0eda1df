//! Unscaled vertex neighbourhoods with fixed edge interfaces and a one-parameter
//! family shrinking towards the graph.

use crate::num::{add, cross, norm, perp, scale, shoelace_area, sub, Point, Real};

use super::patch::{fan_quads, Patch, PatchComplex, Region, SideSpec};
use super::GeometryError;

/// Floor for the distance of the bisector control points from the vertex.
pub const R_MIN: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeSegment {
    /// Outer boundary `∂₀V`.
    Outer,
    /// Interface `∂ⱼV` to the edge with the given input direction index.
    Interface(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexShape<T> {
    /// Counter-clockwise polygon around the vertex at the origin.
    pub polygon: Vec<Point<T>>,
    /// `segments[i]` tags the segment from `polygon[i]` to `polygon[i + 1]`.
    pub segments: Vec<ShapeSegment>,
    /// Unit outgoing directions in input order.
    pub directions: Vec<Point<T>>,
    pub d_attach: T,
    pub tau: T,
}

impl<T: Real> VertexShape<T> {
    pub fn area(&self) -> T {
        shoelace_area(&self.polygon)
    }

    pub fn centroid(&self) -> Point<T> {
        polygon_centroid(&self.polygon)
    }

    /// Midpoint of the interface of direction `j`.
    pub fn interface_midpoint(&self, j: usize) -> Point<T> {
        scale(self.d_attach, self.directions[j])
    }

    pub fn interface_segment(&self, j: usize) -> (Point<T>, Point<T>) {
        let i = self
            .segments
            .iter()
            .position(|s| *s == ShapeSegment::Interface(j))
            .expect("every direction has an interface");
        (self.polygon[i], self.polygon[(i + 1) % self.polygon.len()])
    }

    /// Index of the direction matching `dir` within `tol`.
    pub fn find_direction(&self, dir: Point<T>, tol: T) -> Option<usize> {
        self.directions.iter().position(|d| norm(sub(*d, dir)) <= tol)
    }
}

pub(crate) fn polygon_centroid<T: Real>(poly: &[Point<T>]) -> Point<T> {
    let a = shoelace_area(poly);
    let n = poly.len();
    let mut cx = T::zero();
    let mut cy = T::zero();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let w = cross(p, q);
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    let s = T::one() / (T::lit(6.0) * a);
    [cx * s, cy * s]
}

fn segments_intersect<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>) -> bool {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    (o1 > T::zero()) != (o2 > T::zero()) && (o3 > T::zero()) != (o4 > T::zero())
}

/// Builds the vertex neighbourhood for the given outgoing directions.
///
/// Interfaces are the length-2 segments perpendicular to each direction,
/// centred at `d_attach · direction`. Between consecutive interfaces the outer
/// boundary runs through a control point on the angular bisector at distance
/// `max(R_MIN, r₀ e^{−τ})`, where `r₀` puts it on the chord joining the two
/// interface ends. Gaps of angle ≥ π keep their control point at unit
/// distance for every τ.
pub fn make_vertex_shape<T: Real>(
    directions: &[Point<T>],
    tau: T,
    d_attach: T,
) -> Result<VertexShape<T>, GeometryError> {
    if directions.len() < 2 {
        return Err(GeometryError::TooFewDirections);
    }
    if !(d_attach > T::one()) {
        return Err(GeometryError::AttachmentTooSmall(d_attach.as_f64()));
    }
    let mut dirs = Vec::with_capacity(directions.len());
    for (i, d) in directions.iter().enumerate() {
        let n = norm(*d);
        if !(n > T::zero()) {
            return Err(GeometryError::ZeroDirection(i));
        }
        dirs.push(scale(T::one() / n, *d));
    }
    let angle = |d: &Point<T>| {
        let a = d[1].atan2(d[0]);
        if a < T::zero() {
            a + T::lit(2.0) * T::PI()
        } else {
            a
        }
    };
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| angle(&dirs[a]).partial_cmp(&angle(&dirs[b])).unwrap());
    for w in 0..order.len() {
        let i = order[w];
        let j = order[(w + 1) % order.len()];
        if norm(sub(dirs[i], dirs[j])) < T::lit(1e-9) {
            return Err(GeometryError::DuplicateDirection(i.min(j), i.max(j)));
        }
    }
    let ends: Vec<(Point<T>, Point<T>)> = dirs
        .iter()
        .map(|&u| {
            let m = scale(d_attach, u);
            let n = perp(u);
            (sub(m, n), add(m, n))
        })
        .collect();
    for i in 0..dirs.len() {
        for j in (i + 1)..dirs.len() {
            let (a, b) = ends[i];
            let (c, d) = ends[j];
            if segments_intersect(a, b, c, d) {
                return Err(GeometryError::InterfacesIntersect(i, j));
            }
        }
    }

    let two_pi = T::lit(2.0) * T::PI();
    let mut polygon = Vec::new();
    let mut segments = Vec::new();
    for w in 0..order.len() {
        let j = order[w];
        let next = order[(w + 1) % order.len()];
        let (lo, hi) = ends[j];
        let (next_lo, _) = ends[next];
        let mut gap = angle(&dirs[next]) - angle(&dirs[j]);
        if gap <= T::zero() {
            gap += two_pi;
        }
        let theta = angle(&dirs[j]) + gap * T::lit(0.5);
        let bis = [theta.cos(), theta.sin()];
        let r = if gap < T::PI() - T::lit(1e-12) {
            // bisector ray meets the chord hi → next_lo at t·bis
            let chord = sub(next_lo, hi);
            let r0 = cross(hi, chord) / cross(bis, chord);
            (r0 * (-tau).exp()).max(T::lit(R_MIN))
        } else {
            T::one()
        };
        polygon.push(lo);
        segments.push(ShapeSegment::Interface(j));
        polygon.push(hi);
        segments.push(ShapeSegment::Outer);
        polygon.push(scale(r, bis));
        segments.push(ShapeSegment::Outer);
    }

    let n = polygon.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]) {
                return Err(GeometryError::SelfIntersecting);
            }
        }
    }
    let c = polygon_centroid(&polygon);
    for i in 0..n {
        if !(cross(sub(polygon[i], c), sub(polygon[(i + 1) % n], c)) > T::zero()) {
            return Err(GeometryError::NotStarShaped);
        }
    }
    // star-shaped about the vertex too, so every ray from it leaves once
    if !(0..n).all(|i| cross(polygon[i], polygon[(i + 1) % n]) > T::zero()) {
        return Err(GeometryError::NotStarShaped);
    }
    Ok(VertexShape {
        polygon,
        segments,
        directions: dirs,
        d_attach,
        tau,
    })
}

/// Quadrilateral patches of an (ε-scaled, translated) vertex shape.
pub(crate) fn shape_patches<T: Real>(
    shape: &VertexShape<T>,
    eps: T,
    center: Point<T>,
    vertex: usize,
    interface_spec: SideSpec,
) -> Vec<Patch<T>> {
    let poly: Vec<Point<T>> = shape.polygon.iter().map(|&p| add(center, scale(eps, p))).collect();
    let specs: Vec<SideSpec> = shape
        .segments
        .iter()
        .map(|s| match s {
            ShapeSegment::Outer => SideSpec::Dirichlet,
            ShapeSegment::Interface(_) => interface_spec,
        })
        .collect();
    let c = add(center, scale(eps, shape.centroid()));
    fan_quads(&poly, &specs, c)
        .into_iter()
        .map(|(corners, sides)| Patch::flat(corners, Region::Vertex(vertex), sides))
        .collect()
}

/// Standalone unscaled shape: Dirichlet on `∂₀V`, Neumann on the interfaces.
pub fn shape_complex<T: Real>(shape: &VertexShape<T>) -> Result<PatchComplex<T>, GeometryError> {
    PatchComplex::new(
        shape_patches(shape, T::one(), [T::zero(), T::zero()], 0, SideSpec::Neumann),
        T::one(),
    )
}
