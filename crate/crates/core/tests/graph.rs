use std::f64::consts::PI;

use qwg::graph::{
    dirichlet_interval_eigenvalue, limit_spectrum_1d, merged_limit_spectrum, straight_limit_spectrum, CurvatureProfile,
    Edge, MetricGraph, Vertex,
};

fn bump() -> CurvatureProfile<f64> {
    CurvatureProfile::Bump {
        center: 0.5,
        half_width: 0.2,
        amplitude: 2.0,
    }
}

fn star3() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0], [-0.5, 0.75f64.sqrt()], [-0.5, -0.75f64.sqrt()]]
}

#[test]
fn straight_star_merge_matches_closed_form() {
    let g = MetricGraph::star(&star3(), &[1.0, 1.0, 1.0]).unwrap();
    let a = merged_limit_spectrum(&g, 2000, 6).unwrap().values();
    let b = straight_limit_spectrum(&g, 6).unwrap().values();
    for (x, y) in a.iter().zip(&b) {
        assert!((x / y - 1.0).abs() < 1e-5);
    }
    assert!(merged_limit_spectrum(&g, 2000, 0).unwrap().entries.is_empty());
}

#[test]
fn one_curved_edge_interleaves_with_straight_ones() {
    let mut g_edges = vec![
        Edge::straight(0, 0, 1, 1.0),
        Edge::straight(1, 0, 2, 0.8),
        Edge::straight(2, 0, 3, 1.3),
    ];
    g_edges[0].curvature = bump();
    let verts = vec![
        Vertex {
            id: 0,
            position: [0.0, 0.0],
        },
        Vertex {
            id: 1,
            position: [0.9, 0.0],
        },
        Vertex {
            id: 2,
            position: [-0.4, 0.6],
        },
        Vertex {
            id: 3,
            position: [-0.6, -1.1],
        },
    ];
    let g = MetricGraph::new(verts, g_edges.clone()).unwrap();
    let count = 7;
    let got = merged_limit_spectrum(&g, 3000, count).unwrap();

    // concatenate-and-sort oracle
    let mut all = limit_spectrum_1d(&g_edges[0], 3000, count).unwrap();
    for l in [0.8, 1.3] {
        all.extend((1..=count).map(|n| dirichlet_interval_eigenvalue(l, n)));
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got.values(), all[..count].to_vec());
    assert!(got.values().windows(2).all(|w| w[0] <= w[1]));
    assert!(got.entries.iter().any(|e| e.edge == 0));
    assert!(got.entries.iter().any(|e| e.edge != 0));
}

#[test]
fn edge_ids_do_not_change_the_spectrum() {
    let dirs = star3();
    let lengths = [1.0, 1.2, 1.4];
    let g = MetricGraph::star(&dirs, &lengths).unwrap();
    let base = merged_limit_spectrum(&g, 1000, 5).unwrap().values();

    let verts: Vec<Vertex<f64>> = g.vertices().to_vec();
    let edges: Vec<Edge<f64>> = g
        .edges()
        .iter()
        .map(|e| Edge::straight(10 - e.id, e.start, e.end, e.length))
        .rev()
        .collect();
    let permuted = MetricGraph::new(verts, edges).unwrap();
    assert_eq!(merged_limit_spectrum(&permuted, 1000, 5).unwrap().values(), base);
}

#[test]
fn curved_limit_is_below_pi_squared() {
    let mut e = Edge::straight(0, 0, 1, 1.0);
    e.curvature = bump();
    let l = limit_spectrum_1d(&e, 4000, 3).unwrap();
    assert!(l[0] < PI * PI);
    // the potential is supported away from the ends, so higher modes stay close
    assert!((l[2] / (9.0 * PI * PI) - 1.0).abs() < 0.05);
}
