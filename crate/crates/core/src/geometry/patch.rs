//! Mapped quadrilateral patches and their conforming assembly into a complex.

use std::fmt::Write as _;

use crate::graph::CurvatureProfile;
use crate::num::{cross, dot, midpoint, norm, perp, shoelace_area, sub, Point, Real};

use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Edge(usize),
    Vertex(usize),
}

/// Boundary condition a side receives when it is not identified with another side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideSpec {
    Dirichlet,
    Neumann,
    /// Must be identified with a side of another patch.
    Internal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideState {
    Identified { patch: usize, side: usize },
    Dirichlet,
    Neumann,
}

/// Local straightened coordinates of a strip: `x = x_offset + (p − origin)·dir`,
/// `y = ((p − origin)·dir⊥) / y_scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripFrame<T> {
    pub origin: Point<T>,
    pub dir: Point<T>,
    pub x_offset: T,
    pub y_scale: T,
}

impl<T: Real> StripFrame<T> {
    #[inline]
    pub fn local(&self, p: Point<T>) -> (T, T) {
        let d = sub(p, self.origin);
        (self.x_offset + dot(d, self.dir), dot(d, perp(self.dir)) / self.y_scale)
    }
}

/// Coefficient fields of the quadratic form on a patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficients<T> {
    /// `∫ |∇u|²` and `∫ u²`.
    Flat,
    /// Straightened curved strip in physical units: in frame coordinates `(x, Y)`
    /// the x-stiffness is `(1 + Yκ)⁻²`, the potential `K_ε(x, Y/ε)`.
    Tube { profile: CurvatureProfile<T>, eps: T },
    /// Reference rectangle `(0, ℓ) × (−1, 1)` with the tube weights.
    TubeReference { profile: CurvatureProfile<T>, eps: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Patch<T> {
    /// Counter-clockwise corners; side `s` runs from corner `s` to corner `s + 1`.
    pub corners: [Point<T>; 4],
    pub region: Region,
    pub sides: [SideSpec; 4],
    pub coefficients: Coefficients<T>,
    pub frame: Option<StripFrame<T>>,
    /// Edge the patch is attached to, used by the counterexample trial field.
    pub arm: Option<usize>,
}

impl<T: Real> Patch<T> {
    pub fn flat(corners: [Point<T>; 4], region: Region, sides: [SideSpec; 4]) -> Self {
        Self {
            corners,
            region,
            sides,
            coefficients: Coefficients::Flat,
            frame: None,
            arm: None,
        }
    }

    /// Bilinear chart on `[0,1]²`.
    pub fn map(&self, u: T, v: T) -> Point<T> {
        let [c0, c1, c2, c3] = self.corners;
        let one = T::one();
        let w = [(one - u) * (one - v), u * (one - v), u * v, (one - u) * v];
        [
            w[0] * c0[0] + w[1] * c1[0] + w[2] * c2[0] + w[3] * c3[0],
            w[0] * c0[1] + w[1] * c1[1] + w[2] * c2[1] + w[3] * c3[1],
        ]
    }

    pub fn side_endpoints(&self, side: usize) -> (Point<T>, Point<T>) {
        (self.corners[side], self.corners[(side + 1) % 4])
    }

    pub fn side_length(&self, side: usize) -> T {
        let (a, b) = self.side_endpoints(side);
        norm(sub(b, a))
    }

    pub fn area(&self) -> T {
        shoelace_area(&self.corners)
    }

    fn min_corner_cross(&self) -> T {
        (0..4)
            .map(|i| {
                let prev = self.corners[(i + 3) % 4];
                let cur = self.corners[i];
                let next = self.corners[(i + 1) % 4];
                cross(sub(next, cur), sub(prev, cur))
            })
            .fold(T::infinity(), T::min)
    }
}

/// Conforming complex of patches: every side is either identified with exactly
/// one side of another patch (with identical trace) or tagged as boundary.
#[derive(Clone, Debug)]
pub struct PatchComplex<T> {
    pub patches: Vec<Patch<T>>,
    pub states: Vec<[SideState; 4]>,
    pub eps: T,
}

impl<T: Real> PatchComplex<T> {
    /// Identifies sides with coincident endpoints (in opposite direction) and checks invariants.
    pub fn new(patches: Vec<Patch<T>>, eps: T) -> Result<Self, GeometryError> {
        let scale = patches
            .iter()
            .flat_map(|p| p.corners.iter())
            .map(|c| c[0].abs().max(c[1].abs()))
            .fold(T::one(), T::max);
        let tol = T::lit(1e-9) * scale;
        let close = |a: Point<T>, b: Point<T>| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;

        for (i, p) in patches.iter().enumerate() {
            if !(p.min_corner_cross() > T::zero()) {
                return Err(GeometryError::Orientation { patch: i });
            }
        }

        let mut states: Vec<[Option<SideState>; 4]> = vec![[None; 4]; patches.len()];
        // bucket sides by rounded midpoint to avoid the quadratic scan on big complexes
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<(usize, usize)>> = std::collections::HashMap::new();
        let key = |p: Point<T>| {
            let q = T::lit(1e-6) * scale;
            ((p[0] / q).round().as_f64() as i64, (p[1] / q).round().as_f64() as i64)
        };
        for (i, p) in patches.iter().enumerate() {
            for s in 0..4 {
                let (a, b) = p.side_endpoints(s);
                let (kx, ky) = key(midpoint(a, b));
                buckets.entry((kx, ky)).or_default().push((i, s));
            }
        }
        for (i, p) in patches.iter().enumerate() {
            for s in 0..4 {
                let (a, b) = p.side_endpoints(s);
                let (kx, ky) = key(midpoint(a, b));
                let mut partner = None;
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(list) = buckets.get(&(kx + dx, ky + dy)) {
                            for &(j, t) in list {
                                if (j, t) == (i, s) {
                                    continue;
                                }
                                let (c, d) = patches[j].side_endpoints(t);
                                if close(a, d) && close(b, c) {
                                    if partner.is_some() {
                                        return Err(GeometryError::NonManifold { patch: i, side: s });
                                    }
                                    partner = Some((j, t));
                                }
                            }
                        }
                    }
                }
                states[i][s] = Some(match (partner, p.sides[s]) {
                    (Some((j, t)), _) => SideState::Identified { patch: j, side: t },
                    (None, SideSpec::Dirichlet) => SideState::Dirichlet,
                    (None, SideSpec::Neumann) => SideState::Neumann,
                    (None, SideSpec::Internal) => return Err(GeometryError::UnmatchedInterface { patch: i, side: s }),
                });
            }
        }
        let states = states
            .into_iter()
            .map(|s| s.map(|x| x.expect("every side classified")))
            .collect();
        Ok(Self { patches, states, eps })
    }

    pub fn area(&self) -> T {
        self.patches.iter().map(Patch::area).sum()
    }

    /// Sum of patch areas per region.
    pub fn region_area(&self, region: Region) -> T {
        self.patches
            .iter()
            .filter(|p| p.region == region)
            .map(Patch::area)
            .sum()
    }

    pub fn min_side_length(&self) -> T {
        self.patches
            .iter()
            .flat_map(|p| (0..4).map(move |s| p.side_length(s)))
            .fold(T::infinity(), T::min)
    }

    /// Plain-text listing, one patch per line: tag and the four corners.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.patches {
            let tag = match p.region {
                Region::Edge(j) => format!("edge{j}"),
                Region::Vertex(k) => format!("vertex{k}"),
            };
            let _ = write!(out, "{tag}");
            for c in &p.corners {
                let _ = write!(out, " {:.12e} {:.12e}", c[0].as_f64(), c[1].as_f64());
            }
            out.push('\n');
        }
        out
    }
}

/// Splits a counter-clockwise polygon, star-shaped about `c`, into
/// quadrilaterals: a fan of triangles from `c`, each triangle cut into three quads through its
/// edge midpoints and centroid. `seg` gives the side spec of polygon segment `i`
/// (from vertex `i` to `i + 1`); fan-internal sides are `Internal`.
pub fn fan_quads<T: Real>(poly: &[Point<T>], seg: &[SideSpec], c: Point<T>) -> Vec<([Point<T>; 4], [SideSpec; 4])> {
    assert_eq!(poly.len(), seg.len());
    let n = poly.len();
    let third = T::one() / T::lit(3.0);
    let mut out = Vec::with_capacity(3 * n);
    use SideSpec::Internal as I;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let mca = midpoint(c, a);
        let mab = midpoint(a, b);
        let mbc = midpoint(b, c);
        let g = [(c[0] + a[0] + b[0]) * third, (c[1] + a[1] + b[1]) * third];
        out.push(([c, mca, g, mbc], [I, I, I, I]));
        out.push(([mca, a, mab, g], [I, seg[i], I, I]));
        out.push(([g, mab, b, mbc], [I, seg[i], I, I]));
    }
    out
}
