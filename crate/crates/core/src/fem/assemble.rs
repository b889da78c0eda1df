//! P1 stiffness/mass assembly with Dirichlet elimination.

use crate::geometry::{k_eps, shape_complex, Coefficients, Patch, PatchComplex, Region, SideSpec, VertexShape};
use crate::graph::CurvatureProfile;
use crate::num::{cross, dot, midpoint, perp, sub, Point, Real};
use crate::sparse::{SparsePair, TripletBuilder};

use super::mesh::{mesh, mesh_with_counts, Columns, NodeTag, TriMesh};
use super::FemError;

/// `(stiffness + potential, mass)` of one triangle.
pub type ElementPair<T> = ([[T; 3]; 3], [[T; 3]; 3]);

/// Element matrices of triangle `t`.
pub fn element_matrices<T: Real>(mesh: &TriMesh<T>, t: usize) -> Result<ElementPair<T>, FemError> {
    let tri = mesh.triangles[t];
    let p = tri.map(|i| mesh.nodes[i]);
    let patch = &mesh.patches[mesh.triangle_patch[t]];
    element(&p, patch)
}

fn element<T: Real>(p: &[Point<T>; 3], patch: &Patch<T>) -> Result<ElementPair<T>, FemError> {
    let det = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let area = det * T::lit(0.5);
    // ∇φ_i = perp(p_{i+2} − p_{i+1}) / det, with perp rotating clockwise
    let grads: [Point<T>; 3] = std::array::from_fn(|i| {
        let e = sub(p[(i + 2) % 3], p[(i + 1) % 3]);
        [-e[1] / det, e[0] / det]
    });
    // midpoints m_k of edge (k, k+1); φ_i(m_k) = 1/2 for i ∈ {k, k+1}
    let mids: [Point<T>; 3] = std::array::from_fn(|k| midpoint(p[k], p[(k + 1) % 3]));
    let half = T::lit(0.5);
    let phi_at = |i: usize, k: usize| if i == k || i == (k + 1) % 3 { half } else { T::zero() };

    let twelfth = area / T::lit(12.0);
    let mut mass = [[twelfth; 3]; 3];
    for (i, row) in mass.iter_mut().enumerate() {
        row[i] = twelfth * T::lit(2.0);
    }
    let mut stiff = [[T::zero(); 3]; 3];

    match patch.coefficients {
        Coefficients::Flat => {
            for i in 0..3 {
                for j in 0..3 {
                    stiff[i][j] = area * dot(grads[i], grads[j]);
                }
            }
        }
        Coefficients::Tube { profile, eps } | Coefficients::TubeReference { profile, eps } => {
            let reference = matches!(patch.coefficients, Coefficients::TubeReference { .. });
            let frame = patch.frame.ok_or(FemError::MissingFrame)?;
            let tx = frame.dir;
            let ty = perp(frame.dir);
            let mut ax = T::zero();
            let mut pot = [T::zero(); 3];
            for (k, m) in mids.iter().enumerate() {
                let (x, y) = frame.local(*m);
                let yref = if reference { y } else { y / eps };
                let triple = profile.triple(x);
                let s = T::one() + eps * yref * triple.0;
                if !(s > T::zero()) {
                    return Err(FemError::Geometry(crate::geometry::GeometryError::CoefficientDomain(
                        s.as_f64(),
                    )));
                }
                ax += T::one() / (s * s);
                pot[k] = k_eps(triple, yref, eps)?;
            }
            ax /= T::lit(3.0);
            let (wx, wy, wv) = if reference {
                (eps * ax, T::one() / eps, eps)
            } else {
                (ax, T::one(), T::one())
            };
            for i in 0..3 {
                for j in 0..3 {
                    let gx = dot(grads[i], tx) * dot(grads[j], tx);
                    let gy = dot(grads[i], ty) * dot(grads[j], ty);
                    let mut v = T::zero();
                    for (k, pk) in pot.iter().enumerate() {
                        v += *pk * phi_at(i, k) * phi_at(j, k);
                    }
                    stiff[i][j] = area * (wx * gx + wy * gy) + wv * area / T::lit(3.0) * v;
                }
            }
            if reference {
                for row in mass.iter_mut() {
                    for m in row.iter_mut() {
                        *m *= eps;
                    }
                }
            }
        }
    }
    Ok((stiff, mass))
}

/// Assembles over all nodes, then deletes rows/columns of nodes whose tag is in `eliminate`.
pub fn assemble<T: Real>(mesh: &TriMesh<T>, eliminate: &[NodeTag]) -> Result<SparsePair<T>, FemError> {
    let n = mesh.node_count();
    let mut dof = vec![usize::MAX; n];
    let mut dof_nodes = Vec::new();
    for (i, tag) in mesh.node_tags.iter().enumerate() {
        if !eliminate.contains(tag) {
            dof[i] = dof_nodes.len();
            dof_nodes.push(i);
        }
    }
    if dof_nodes.is_empty() {
        return Err(FemError::NoFreeDofs);
    }
    let mut kb = TripletBuilder::new(dof_nodes.len());
    let mut mb = TripletBuilder::new(dof_nodes.len());
    for t in 0..mesh.triangles.len() {
        let (ke, me) = element_matrices(mesh, t)?;
        let tri = mesh.triangles[t];
        for a in 0..3 {
            let r = dof[tri[a]];
            if r == usize::MAX {
                continue;
            }
            for b in 0..3 {
                let c = dof[tri[b]];
                if c == usize::MAX {
                    continue;
                }
                kb.add(r, c, ke[a][b]);
                mb.add(r, c, me[a][b]);
            }
        }
    }
    let mut pair = SparsePair::new(kb.build(), mb.build());
    pair.dof_nodes = dof_nodes;
    Ok(pair)
}

/// Flat-form assembly; Neumann-tagged nodes stay free unless listed.
pub fn assemble_flat<T: Real>(mesh: &TriMesh<T>, dirichlet_on: &[NodeTag]) -> Result<SparsePair<T>, FemError> {
    assemble(mesh, dirichlet_on)
}

/// Mixed problem on the unscaled vertex shape: Dirichlet on the outer boundary,
/// Neumann on the interfaces.
pub fn assemble_mixed_dn<T: Real>(shape: &VertexShape<T>, h: T) -> Result<(TriMesh<T>, SparsePair<T>), FemError> {
    let complex = shape_complex(shape)?;
    let m = mesh(&complex, h)?;
    let pair = assemble(&m, &[NodeTag::Dirichlet])?;
    Ok((m, pair))
}

/// Cross-section interval count of tube meshes of width `h` (reference units).
pub fn tube_intervals<T: Real>(length: T, eps: T, h: T) -> (usize, usize) {
    let ny = ((T::lit(2.0) / h).ceil().as_f64() as usize).max(8);
    let dy = T::lit(2.0) / T::from_usize_lossy(ny);
    // physical cell is dx × ε·dy; dx ≤ ε·dy/2 keeps the x–y coupling error of
    // the P1 discretisation well below the transversal one
    let by_h = (length / h).ceil().as_f64() as usize;
    let by_aspect = (length / (T::lit(0.5) * eps * dy)).ceil().as_f64() as usize;
    (by_h.max(by_aspect).max(1), ny)
}

/// Structured mesh of the reference rectangle `(0, ℓ) × (−1, 1)` with tube
/// coefficients and column structure.
pub fn tube_mesh<T: Real>(length: T, profile: CurvatureProfile<T>, eps: T, h: T) -> Result<TriMesh<T>, FemError> {
    let k = profile.sup_norms().0;
    if k > T::zero() && eps > T::one() / (T::lit(2.0) * k) {
        return Err(FemError::Geometry(crate::geometry::GeometryError::EpsTooLarge {
            eps: eps.as_f64(),
            limit: (T::one() / (T::lit(2.0) * k)).as_f64(),
        }));
    }
    let (nx, ny) = tube_intervals(length, eps, h);
    let z = T::zero();
    let one = T::one();
    let patch = Patch {
        corners: [[z, -one], [length, -one], [length, one], [z, one]],
        region: Region::Edge(0),
        sides: [SideSpec::Dirichlet; 4],
        coefficients: Coefficients::TubeReference { profile, eps },
        frame: Some(crate::geometry::StripFrame {
            origin: [z, z],
            dir: [one, z],
            x_offset: z,
            y_scale: one,
        }),
        arm: Some(0),
    };
    let complex = PatchComplex::new(vec![patch], eps)?;
    let mut m = mesh_with_counts(&complex, &[[nx, ny]])?;
    // grid nodes are created column by column in a single patch
    let x = (0..=nx)
        .map(|i| length * T::from_usize_lossy(i) / T::from_usize_lossy(nx))
        .collect();
    let y = (0..=ny)
        .map(|j| -one + T::lit(2.0) * T::from_usize_lossy(j) / T::from_usize_lossy(ny))
        .collect();
    let nodes = (0..=nx).map(|i| (0..=ny).map(|j| i * (ny + 1) + j).collect()).collect();
    m.columns = Some(Columns { x, y, nodes });
    Ok(m)
}

/// Transformed tube form on `(0, ℓ) × (−1, 1)`, Dirichlet on the whole boundary.
/// Generalized eigenvalues are those of the Dirichlet Laplacian on the curved strip.
pub fn assemble_tube<T: Real>(
    length: T,
    profile: CurvatureProfile<T>,
    eps: T,
    h: T,
) -> Result<SparsePair<T>, FemError> {
    Ok(tube_problem(length, profile, eps, h)?.1)
}

pub fn tube_problem<T: Real>(
    length: T,
    profile: CurvatureProfile<T>,
    eps: T,
    h: T,
) -> Result<(TriMesh<T>, SparsePair<T>), FemError> {
    let m = tube_mesh(length, profile, eps, h)?;
    let pair = assemble(&m, &[NodeTag::Dirichlet])?;
    Ok((m, pair))
}
