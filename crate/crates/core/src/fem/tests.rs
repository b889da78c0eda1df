use std::f64::consts::PI;

use super::*;
use crate::eigen::{dense_eigen_reference, lowest_eigenpairs};
use crate::geometry::{make_vertex_shape, Patch, PatchComplex, Region, SideSpec};
use crate::graph::CurvatureProfile;

fn square(sides: [SideSpec; 4]) -> PatchComplex<f64> {
    PatchComplex::new(
        vec![Patch::flat(
            [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            Region::Edge(0),
            sides,
        )],
        1.0,
    )
    .unwrap()
}

fn lowest(pair: &crate::sparse::SparsePair<f64>, k: usize) -> Vec<f64> {
    lowest_eigenpairs(pair, k, 1e-10, 1).unwrap().values
}

#[test]
fn counting() {
    let m = mesh_with_counts(&square([SideSpec::Dirichlet; 4]), &[[2, 2]]).unwrap();
    assert_eq!(m.node_count(), 9);
    assert_eq!(m.triangles.len(), 8);
    assert_eq!(m.count_tag(NodeTag::Interior), 1);
    assert!((m.area() - 1.0).abs() < 1e-15);
}

#[test]
fn strip_mesh() {
    let c = PatchComplex::new(
        vec![Patch::flat(
            [[0.0, -0.1], [1.0, -0.1], [1.0, 0.1], [0.0, 0.1]],
            Region::Edge(0),
            [SideSpec::Dirichlet; 4],
        )],
        0.1,
    )
    .unwrap();
    let m = mesh(&c, 0.05).unwrap();
    assert!((0..m.triangles.len()).all(|t| m.triangle_area(t) > 0.0));
    // perimeter 2.4 at width 0.05
    assert_eq!(m.count_tag(NodeTag::Dirichlet), 48);
    assert!(m.max_edge() <= 0.05 * 2f64.sqrt() + 1e-12);
    assert!(matches!(mesh(&c, 0.3), Err(FemError::WidthTooLarge { .. })));
}

#[test]
fn shared_sides_have_no_duplicate_nodes() {
    let left = Patch::flat(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        Region::Edge(0),
        [
            SideSpec::Dirichlet,
            SideSpec::Internal,
            SideSpec::Dirichlet,
            SideSpec::Dirichlet,
        ],
    );
    let right = Patch::flat(
        [[1.0, 0.0], [3.0, 0.0], [3.0, 1.0], [1.0, 1.0]],
        Region::Edge(1),
        [
            SideSpec::Dirichlet,
            SideSpec::Dirichlet,
            SideSpec::Dirichlet,
            SideSpec::Internal,
        ],
    );
    let c = PatchComplex::new(vec![left, right], 1.0).unwrap();
    let m: TriMesh<f64> = mesh(&c, 0.25).unwrap();
    // the shared side gets a common count; coordinate scan for duplicates
    assert_eq!(m.counts[0][1], m.counts[1][1]);
    let mut keys: Vec<(i64, i64)> = m
        .nodes
        .iter()
        .map(|p| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    assert_eq!(keys.len(), m.node_count());
    assert_eq!(m.node_count(), 13 * 5);
}

#[test]
fn constants_in_kernel() {
    let m = mesh_with_counts(&square([SideSpec::Dirichlet; 4]), &[[3, 4]]).unwrap();
    let pair = assemble_flat(&m, &[]).unwrap();
    let r = pair.stiffness.mul_vec(&vec![1.0; pair.dim()]);
    assert!(r.iter().all(|v| v.abs() < 1e-12));
    let (ke, _) = element_matrices(&m, 0).unwrap();
    for row in ke {
        assert!(row.iter().sum::<f64>().abs() < 1e-14);
    }
}

#[test]
fn unit_square_spectra() {
    let h = 1.0 / 64.0;
    let d = mesh(&square([SideSpec::Dirichlet; 4]), h).unwrap();
    let l = lowest(&assemble_flat(&d, &[NodeTag::Dirichlet]).unwrap(), 1)[0];
    assert!((l / (2.0 * PI * PI) - 1.0).abs() < 1e-3, "{l}");

    use SideSpec::{Dirichlet as D, Neumann as N};
    let mixed = mesh(&square([N, D, N, D]), h).unwrap();
    let l = lowest(&assemble_flat(&mixed, &[NodeTag::Dirichlet]).unwrap(), 1)[0];
    assert!((l / (PI * PI) - 1.0).abs() < 1e-3, "{l}");

    let one = mesh(&square([D, D, N, D]), h).unwrap();
    let l = lowest(&assemble_flat(&one, &[NodeTag::Dirichlet]).unwrap(), 1)[0];
    assert!((l / (1.25 * PI * PI) - 1.0).abs() < 5e-3, "{l}");
}

#[test]
fn refinement_ratio() {
    let c = square([SideSpec::Dirichlet; 4]);
    let err = |h: f64| {
        let m = mesh(&c, h).unwrap();
        lowest(&assemble_flat(&m, &[NodeTag::Dirichlet]).unwrap(), 1)[0] - 2.0 * PI * PI
    };
    let ratio = err(1.0 / 8.0) / err(1.0 / 16.0);
    assert!((3.0..=5.0).contains(&ratio), "{ratio}");
}

#[test]
fn degenerate_rectangle_shape_is_borderline() {
    let s = make_vertex_shape(&[[1.0, 0.0], [-1.0, 0.0]], 0.0, 1.5).unwrap();
    let (_, pair) = assemble_mixed_dn(&s, 1.0 / 16.0).unwrap();
    let l = lowest(&pair, 1)[0];
    assert!((l / (PI * PI / 4.0) - 1.0).abs() < 5e-3, "{l}");
}

#[test]
fn flat_tube_matches_rectangle() {
    let eps = 0.1;
    let pair = assemble_tube(1.0, CurvatureProfile::Zero, eps, 1.0 / 64.0).unwrap();
    let l = lowest(&pair, 1)[0];
    let exact = PI * PI / (4.0 * eps * eps) + PI * PI;
    assert!((l / exact - 1.0).abs() < 2e-3, "{l}");
}

#[test]
fn flat_tube_equals_physical_rectangle() {
    let eps = 0.1;
    let t = tube_mesh(1.0, CurvatureProfile::Zero, eps, 0.25).unwrap();
    let [nx, ny] = t.counts[0];
    let rect = PatchComplex::new(
        vec![Patch::flat(
            [[0.0, -eps], [1.0, -eps], [1.0, eps], [0.0, eps]],
            Region::Edge(0),
            [SideSpec::Dirichlet; 4],
        )],
        eps,
    )
    .unwrap();
    let r = mesh_with_counts(&rect, &[[nx, ny]]).unwrap();
    let a: Vec<f64> = dense_eigen_reference(&assemble(&t, &[NodeTag::Dirichlet]).unwrap()).unwrap();
    let b = dense_eigen_reference(&assemble_flat(&r, &[NodeTag::Dirichlet]).unwrap()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x / y - 1.0).abs() < 1e-10);
    }
}

#[test]
fn bump_changes_only_local_columns() {
    let eps = 0.05f64;
    let bump = CurvatureProfile::Bump {
        center: 0.5,
        half_width: 0.2,
        amplitude: 2.0,
    };
    let m: TriMesh<f64> = tube_mesh(1.0, bump, eps, 0.25).unwrap();
    let flat = assemble(
        &tube_mesh(1.0, CurvatureProfile::Zero, eps, 0.25).unwrap(),
        &[NodeTag::Dirichlet],
    )
    .unwrap();
    let curved = assemble(&m, &[NodeTag::Dirichlet]).unwrap();
    let cols = m.columns.as_ref().unwrap();
    let dx = cols.x[1] - cols.x[0];
    let kf = flat.stiffness.to_dense();
    let kc = curved.stiffness.to_dense();
    let mut changed_inside = false;
    for (r, &node) in curved.dof_nodes.iter().enumerate() {
        let x = m.nodes[node][0];
        let differs = (0..curved.dim()).any(|c| (kf[r][c] - kc[r][c]).abs() > 0.0);
        if (x - 0.5).abs() > 0.2 + dx {
            assert!(!differs, "x = {x}");
        }
        changed_inside |= differs;
    }
    assert!(changed_inside);
}

#[test]
fn assembled_pairs_are_symmetric_and_definite() {
    let s = make_vertex_shape(&[[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]], 1.0, 2.0).unwrap();
    let (_, pair) = assemble_mixed_dn(&s, 0.2).unwrap();
    assert!(pair.stiffness.asymmetry() <= 1e-12 * pair.stiffness.norm_fro());
    assert!(pair.mass.asymmetry() <= 1e-12 * pair.mass.norm_fro());
    let x: Vec<f64> = (0..pair.dim()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
    assert!(pair.mass.bilinear(&x, &x) > 0.0);
}

#[test]
fn no_free_dofs() {
    let m = mesh_with_counts(&square([SideSpec::Dirichlet; 4]), &[[1, 1]]).unwrap();
    assert_eq!(
        assemble_flat(&m, &[NodeTag::Dirichlet]).unwrap_err(),
        FemError::NoFreeDofs
    );
}
