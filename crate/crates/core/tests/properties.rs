use std::collections::BTreeMap;

use proptest::prelude::*;

use qwg::fem::{assemble, mesh, FemError, NodeTag};
use qwg::geometry::{build_domain, make_vertex_shape};
use qwg::graph::{eta_bound, MetricGraph};
use qwg::lab::{fit_rate, shifted_spectrum, threshold, vertex_mass_fraction, ShiftMode};

fn star_angles() -> impl Strategy<Value = Vec<f64>> {
    // three directions with every gap at least 0.6 rad
    (0.6f64..2.5, 0.6f64..2.5, 0.0f64..std::f64::consts::TAU)
        .prop_filter("third gap", |(a, b, _)| std::f64::consts::TAU - a - b >= 0.6)
        .prop_map(|(a, b, rot)| vec![rot, rot + a, rot + a + b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eta_is_monotone(l in 0.0f64..50.0, d1 in 0.0f64..0.01, d2 in 0.0f64..1.0, big in 0.0f64..50.0,
                       dl in 0.0f64..1.0, dd in 0.0f64..0.001) {
        let base = eta_bound(l, d1, d2, big).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!(eta_bound(l + dl, d1, d2, big).unwrap() >= base);
        prop_assert!(eta_bound(l, d1 + dd, d2, big).unwrap() >= base);
        prop_assert!(eta_bound(l, d1, d2 + dl, big).unwrap() >= base);
        prop_assert!(eta_bound(l, d1, d2, big + dl).unwrap() >= base);
        prop_assert_eq!(eta_bound(l, 0.0, 0.0, big).unwrap(), 0.0);
    }

    #[test]
    fn shift_round_trips(v in 0.0f64..1e6, eps in 0.01f64..0.5, ny in 4usize..200, exact in any::<bool>()) {
        let mode = if exact { ShiftMode::Exact } else { ShiftMode::Mesh };
        let s = shifted_spectrum(&[v], eps, mode, Some(ny))[0];
        let back = s + threshold(eps, mode, Some(ny));
        prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(threshold(eps, mode, Some(ny))));
    }

    #[test]
    fn rate_ignores_gap_scale(c in 1e-3f64..1e3, p in 0.1f64..3.0) {
        let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&e: &f64| (e, e.powf(p))).collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(e, g)| (e, c * g)).collect();
        prop_assert!((fit_rate(&pts).unwrap() - fit_rate(&scaled).unwrap()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn star_meshes_are_conforming(angles in star_angles(), tau in 0.0f64..3.0, d in 1.3f64..2.5,
                                  eps in 0.05f64..0.15) {
        let dirs: Vec<[f64; 2]> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
        let shape = match make_vertex_shape(&dirs, tau, d) {
            Ok(s) => s,
            Err(_) => return Err(TestCaseError::reject("shape")),
        };
        let g = MetricGraph::star(&dirs, &[1.0, 1.0, 1.0]).unwrap();
        let shapes = BTreeMap::from([(0, shape.clone())]);
        let dom = build_domain(&g, &shapes, eps).unwrap();
        let m = match mesh(&dom, eps / 6.0) {
            Ok(m) => m,
            Err(FemError::WidthTooLarge { .. }) => return Err(TestCaseError::reject("short side")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!((0..m.triangles.len()).all(|t| m.triangle_area(t) > 0.0));
        let strips = 3.0 * 2.0 * eps;
        prop_assert!(m.area() > shape.area() * eps * eps);
        prop_assert!(m.area() < shape.area() * eps * eps + strips * 1.0 + 1e-12);
        let frac = vertex_mass_fraction(&m, &vec![1.0; m.node_count()]).unwrap();
        prop_assert!((frac - shape.area() * eps * eps / m.area()).abs() < 1e-10);
        let pair = assemble(&m, &[NodeTag::Dirichlet]).unwrap();
        prop_assert!(pair.stiffness.asymmetry() <= 1e-12 * pair.stiffness.norm_fro());
        prop_assert!(pair.mass.asymmetry() <= 1e-12 * pair.mass.norm_fro());
    }
}
