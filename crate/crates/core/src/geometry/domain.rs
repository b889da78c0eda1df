//! The fattened graph `M_ε`: edge strips glued to ε-scaled vertex shapes.

use std::collections::BTreeMap;

use crate::graph::MetricGraph;
use crate::num::{add, norm, perp, scale, sub, Point, Real};

use super::patch::{Coefficients, Patch, PatchComplex, Region, SideSpec, StripFrame};
use super::shape::{shape_patches, VertexShape};
use super::GeometryError;

const DIRECTION_TOL: f64 = 1e-6;

fn outgoing<T: Real>(g: &MetricGraph<T>, edge: usize, from: usize) -> Point<T> {
    let e = g.edge(edge).expect("incident edge exists");
    let (a, b) = if e.start == from {
        (e.start, e.end)
    } else {
        (e.end, e.start)
    };
    let pa = g.vertex(a).expect("validated").position;
    let pb = g.vertex(b).expect("validated").position;
    let d = sub(pb, pa);
    scale(T::one() / norm(d), d)
}

/// Attachment distance of edge `edge` at vertex `v`, zero for shapeless (degree-1) ends.
fn attachment<T: Real>(
    g: &MetricGraph<T>,
    shapes: &BTreeMap<usize, VertexShape<T>>,
    edge: usize,
    v: usize,
) -> Result<T, GeometryError> {
    match shapes.get(&v) {
        Some(s) => {
            let dir = outgoing(g, edge, v);
            s.find_direction(dir, T::lit(DIRECTION_TOL))
                .map(|_| s.d_attach)
                .ok_or(GeometryError::ShapeMismatch { vertex: v })
        }
        None if g.degree(v) <= 1 => Ok(T::zero()),
        None => Err(GeometryError::MissingShape {
            vertex: v,
            degree: g.degree(v),
        }),
    }
}

fn check_layout<T: Real>(g: &MetricGraph<T>, shapes: &BTreeMap<usize, VertexShape<T>>) -> Result<(), GeometryError> {
    for e in g.edges() {
        if e.start == e.end {
            return Err(GeometryError::LoopEdge { edge: e.id });
        }
        let a = g.vertex(e.start).expect("validated").position;
        let b = g.vertex(e.end).expect("validated").position;
        if (norm(sub(b, a)) - e.length).abs() > T::lit(1e-9) * e.length {
            return Err(GeometryError::NotStraightened { edge: e.id });
        }
    }
    for v in g.vertices() {
        if let Some(s) = shapes.get(&v.id) {
            let inc = g.incident(v.id);
            if inc.len() != s.directions.len() {
                return Err(GeometryError::ShapeMismatch { vertex: v.id });
            }
            let mut used = vec![false; inc.len()];
            for &e in inc {
                let j = s
                    .find_direction(outgoing(g, e, v.id), T::lit(DIRECTION_TOL))
                    .ok_or(GeometryError::ShapeMismatch { vertex: v.id })?;
                if used[j] {
                    return Err(GeometryError::ShapeMismatch { vertex: v.id });
                }
                used[j] = true;
            }
        }
    }
    Ok(())
}

/// Largest admissible ε: `1/(2 sup|κⱼ|)` and `ℓⱼ / (d_start + d_end)` over all edges
/// (the second bound is strict).
pub fn epsilon_limit<T: Real>(
    g: &MetricGraph<T>,
    shapes: &BTreeMap<usize, VertexShape<T>>,
) -> Result<T, GeometryError> {
    check_layout(g, shapes)?;
    let mut limit = T::infinity();
    for e in g.edges() {
        let k = e.curvature.sup_norms().0;
        if k > T::zero() {
            limit = limit.min(T::one() / (T::lit(2.0) * k));
        }
        let d = attachment(g, shapes, e.id, e.start)? + attachment(g, shapes, e.id, e.end)?;
        if d > T::zero() {
            limit = limit.min(e.length / d);
        }
    }
    Ok(limit)
}

/// Builds `M_ε` for a graph drawn in its straightened layout (every edge a
/// segment of its own length; curvature enters only through the tube coefficients).
pub fn build_domain<T: Real>(
    g: &MetricGraph<T>,
    shapes: &BTreeMap<usize, VertexShape<T>>,
    eps: T,
) -> Result<PatchComplex<T>, GeometryError> {
    check_layout(g, shapes)?;
    let too_large = |limit: T| GeometryError::EpsTooLarge {
        eps: eps.as_f64(),
        limit: limit.as_f64(),
    };
    if !(eps > T::zero()) {
        return Err(too_large(T::zero()));
    }
    let mut patches = Vec::new();
    for e in g.edges() {
        let k = e.curvature.sup_norms().0;
        if k > T::zero() && eps > T::one() / (T::lit(2.0) * k) {
            return Err(too_large(T::one() / (T::lit(2.0) * k)));
        }
        let ds = attachment(g, shapes, e.id, e.start)?;
        let de = attachment(g, shapes, e.id, e.end)?;
        let x0 = eps * ds;
        let x1 = e.length - eps * de;
        if !(x1 > x0) {
            return Err(too_large(e.length / (ds + de)));
        }
        if let Some((lo, hi)) = e.curvature.support() {
            if lo < x0 || hi > x1 {
                return Err(GeometryError::CurvatureClipped { edge: e.id });
            }
        }
        let origin = g.vertex(e.start).expect("validated").position;
        let u = outgoing(g, e.id, e.start);
        let n = perp(u);
        let p0 = add(origin, scale(x0, u));
        let p1 = add(origin, scale(x1, u));
        let end_spec = |d: T| {
            if d > T::zero() {
                SideSpec::Internal
            } else {
                SideSpec::Dirichlet
            }
        };
        let (s_start, s_end) = (end_spec(ds), end_spec(de));
        let coefficients = if e.curvature.is_zero() {
            Coefficients::Flat
        } else {
            Coefficients::Tube {
                profile: e.curvature,
                eps,
            }
        };
        let frame = StripFrame {
            origin,
            dir: u,
            x_offset: T::zero(),
            y_scale: T::one(),
        };
        let lo = |p: Point<T>| sub(p, scale(eps, n));
        let hi = |p: Point<T>| add(p, scale(eps, n));
        let halves: Vec<([Point<T>; 4], [SideSpec; 4])> =
            if s_start == SideSpec::Dirichlet && s_end == SideSpec::Dirichlet {
                vec![([lo(p0), lo(p1), hi(p1), hi(p0)], [SideSpec::Dirichlet; 4])]
            } else {
                // split along the axis so the strip ends match the halved interfaces
                vec![
                    (
                        [lo(p0), lo(p1), p1, p0],
                        [SideSpec::Dirichlet, s_end, SideSpec::Internal, s_start],
                    ),
                    (
                        [p0, p1, hi(p1), hi(p0)],
                        [SideSpec::Internal, s_end, SideSpec::Dirichlet, s_start],
                    ),
                ]
            };
        for (corners, sides) in halves {
            patches.push(Patch {
                corners,
                region: Region::Edge(e.id),
                sides,
                coefficients,
                frame: Some(frame),
                arm: Some(e.id),
            });
        }
    }
    for v in g.vertices() {
        if let Some(s) = shapes.get(&v.id) {
            patches.extend(shape_patches(s, eps, v.position, v.id, SideSpec::Internal));
        }
    }
    PatchComplex::new(patches, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_vertex_shape, SideState};
    use crate::graph::{Edge, Vertex};
    use crate::num::shoelace_area;

    fn star3() -> (MetricGraph<f64>, BTreeMap<usize, VertexShape<f64>>) {
        let dirs: Vec<[f64; 2]> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let g = MetricGraph::star(&dirs, &[1.0, 1.2, 1.5]).unwrap();
        let mut shapes = BTreeMap::new();
        shapes.insert(0, make_vertex_shape(&dirs, 3.0, 1.5).unwrap());
        (g, shapes)
    }

    #[test]
    fn single_edge_is_one_rectangle() {
        let g = MetricGraph::new(
            vec![
                Vertex {
                    id: 0,
                    position: [0.0, 0.0],
                },
                Vertex {
                    id: 1,
                    position: [1.0, 0.0],
                },
            ],
            vec![Edge::straight(0, 0, 1, 1.0)],
        )
        .unwrap();
        let c = build_domain(&g, &BTreeMap::new(), 0.1).unwrap();
        assert_eq!(c.patches.len(), 1);
        let p = &c.patches[0];
        assert_eq!(p.corners, [[0.0, -0.1], [1.0, -0.1], [1.0, 0.1], [0.0, 0.1]]);
        assert!(c.states[0].iter().all(|s| *s == SideState::Dirichlet));
    }

    #[test]
    fn star_area_and_boundary_partition() {
        let (g, shapes) = star3();
        let eps = 0.1;
        let c = build_domain(&g, &shapes, eps).unwrap();
        let strips: f64 = g.edges().iter().map(|e| (e.length - eps * 1.5) * 2.0 * eps).sum();
        let expected = strips + eps * eps * shoelace_area(&shapes[&0].polygon);
        let oracle: f64 = c.patches.iter().map(|p| shoelace_area(&p.corners)).sum();
        assert!((oracle - expected).abs() < 1e-12);
        assert_eq!(
            c.patches.iter().filter(|p| matches!(p.region, Region::Edge(_))).count(),
            6
        );
        for st in &c.states {
            for s in st {
                assert!(!matches!(s, SideState::Neumann));
            }
        }
    }

    #[test]
    fn vertex_patches_scale_homothetically() {
        let (g, shapes) = star3();
        let a = build_domain(&g, &shapes, 0.1).unwrap();
        let b = build_domain(&g, &shapes, 0.05).unwrap();
        let va: Vec<_> = a.patches.iter().filter(|p| p.region == Region::Vertex(0)).collect();
        let vb: Vec<_> = b.patches.iter().filter(|p| p.region == Region::Vertex(0)).collect();
        assert_eq!(va.len(), vb.len());
        for (p, q) in va.iter().zip(&vb) {
            for (x, y) in p.corners.iter().zip(&q.corners) {
                assert!((x[0] * 0.5 - y[0]).abs() < 1e-15 && (x[1] * 0.5 - y[1]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn errors() {
        let (g, shapes) = star3();
        assert!(matches!(
            build_domain(&g, &shapes, 0.7),
            Err(GeometryError::EpsTooLarge { .. })
        ));
        assert!(matches!(
            build_domain(&g, &BTreeMap::new(), 0.1),
            Err(GeometryError::MissingShape { vertex: 0, degree: 3 })
        ));
        let lim = epsilon_limit(&g, &shapes).unwrap();
        assert!((lim - 1.0 / 1.5).abs() < 1e-15);
    }
}
