use proptest::prelude::*;
use stagcalc::fields::{inner_cell, inner_edge, inner_vertex};
use stagcalc::mesh::{build_quad_mesh, build_tri_hex_mesh, mesh_to_string, parse_mesh, Rect};
use stagcalc::operators::{curl, div, grad, skew_grad};
use stagcalc::{CellField, EdgeField, StaggeredMesh, VertexField};

fn mesh(kind: u8, size: usize) -> StaggeredMesh {
    match kind {
        0 => build_quad_mesh(size + 2, size + 3, Rect::new(0.0, 0.0, 1.0, 0.7).unwrap()).unwrap(),
        _ => build_tri_hex_mesh(1 + (size % 2) as u32).unwrap(),
    }
}

fn values(n: usize, seed: u64) -> Vec<f64> {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * (a.abs().max(b.abs()) + 1e-2 * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_by_parts(kind in 0u8..2, size in 0usize..6, seed in any::<u64>()) {
        let m = mesh(kind, size);
        let u = EdgeField::new(&m, values(m.num_edges(), seed)).unwrap();
        let phi = CellField::new(&m, values(m.num_cells(), seed ^ 1)).unwrap();
        let psi = VertexField::new(&m, values(m.n_v(), seed ^ 2)).unwrap();
        let lhs = inner_edge(&u, &grad(&phi)).unwrap();
        let rhs = -0.5 * inner_cell(&div(&u), &phi).unwrap();
        prop_assert!(close(lhs, rhs, u.norm() * grad(&phi).norm()), "{} {}", lhs, rhs);
        let lhs = inner_edge(&u, &skew_grad(&psi)).unwrap();
        let rhs = -0.5 * inner_vertex(&curl(&u), &psi).unwrap();
        prop_assert!(close(lhs, rhs, u.norm() * skew_grad(&psi).norm()), "{} {}", lhs, rhs);
    }

    #[test]
    fn exact_sequence(kind in 0u8..2, size in 0usize..6, seed in any::<u64>()) {
        let m = mesh(kind, size);
        let phi = CellField::new(&m, values(m.num_cells(), seed)).unwrap();
        let psi = VertexField::new(&m, values(m.n_v(), seed ^ 7)).unwrap();
        prop_assert!(curl(&grad(&phi)).max_abs() <= 1e-11 * phi.max_abs());
        prop_assert!(div(&skew_grad(&psi)).max_abs() <= 1e-11 * psi.max_abs());
    }

    #[test]
    fn operators_are_linear(seed in any::<u64>(), a in -3.0f64..3.0) {
        let m = mesh(0, 3);
        let x = CellField::new(&m, values(m.num_cells(), seed)).unwrap();
        let y = CellField::new(&m, values(m.num_cells(), seed ^ 5)).unwrap();
        let lhs = grad(&(&x.scaled(a) + &y));
        let rhs = &grad(&x).scaled(a) + &grad(&y);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn text_format_round_trip(n in 2usize..7, m in 2usize..7) {
        let mesh = build_quad_mesh(n, m, Rect::unit()).unwrap();
        let text = mesh_to_string(&mesh);
        let back = parse_mesh(&text).unwrap();
        prop_assert_eq!(back.to_parts(), mesh.to_parts());
        prop_assert_eq!(mesh_to_string(&back), text);
    }
}
