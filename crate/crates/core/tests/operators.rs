use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagcalc::fields::*;
use stagcalc::linalg::{solve_cg, Constraint, SparseSystem};
use stagcalc::mesh::{build_quad_mesh, build_tri_hex_mesh, Rect};
use stagcalc::operators::*;
use stagcalc::Point;

#[test]
fn norms_of_simple_fields() {
    let m = build_quad_mesh(2, 2, Rect::unit()).unwrap();
    assert_eq!(norm_l2_cell(&CellField::zeros(&m)), 0.0);
    assert!((norm_l2_cell(&CellField::constant(&m, 1.0)) - 1.0).abs() < 1e-15);
    assert!((norm_l2_vertex(&VertexField::constant(&m, 1.0)) - 1.0).abs() < 1e-15);
    // the 2x2 lattice has four dual cells of area 1/4 and one interior cell of area 1/4
    let one = CellField::from_index_fn(&m, |i| if i == 0 { 1.0 } else { 0.0 });
    assert!((norm_l2_cell(&one) - 0.5).abs() < 1e-15);
    let ones = EdgeField::constant(&m, 1.0);
    assert!((norm_l2_edge(&ones) - m.diamond_areas().iter().sum::<f64>().sqrt()).abs() < 1e-15);
}

#[test]
fn single_interior_edge_norm() {
    let m = build_quad_mesh(2, 2, Rect::unit()).unwrap();
    let e = (0..m.n_e()).find(|&e| (m.edge(e).diamond_area - 0.125).abs() < 1e-15).unwrap();
    let u = EdgeField::from_index_fn(&m, |k| if k == e { 2.0 } else { 0.0 });
    assert!((norm_l2_edge(&u) - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn inner_products() {
    let m = build_tri_hex_mesh(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (a, b) = (EdgeField::random(&m, &mut rng), EdgeField::random(&m, &mut rng));
        assert!(inner_edge(&a, &b).unwrap().abs() <= norm_l2_edge(&a) * norm_l2_edge(&b));
        assert!((inner_edge(&a, &a).unwrap() - norm_l2_edge(&a).powi(2)).abs() <= 1e-15 * norm_l2_edge(&a).powi(2));
        assert_eq!(inner_edge(&a, &EdgeField::zeros(&m)).unwrap(), 0.0);
    }
}

#[test]
fn fields_on_other_meshes_are_rejected() {
    let a = build_quad_mesh(2, 2, Rect::unit()).unwrap();
    let b = build_quad_mesh(2, 2, Rect::unit()).unwrap();
    assert!(inner_cell(&CellField::zeros(&a), &CellField::zeros(&b)).is_err());
}

#[test]
fn exact_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for m in [build_quad_mesh(12, 9, Rect::unit()).unwrap(), build_tri_hex_mesh(2).unwrap()] {
        for _ in 0..20 {
            let phi = CellField::random(&m, &mut rng);
            let psi = VertexField::random(&m, &mut rng);
            assert!(curl(&grad(&phi)).max_abs() <= 1e-11 * phi.max_abs());
            assert!(div(&skew_grad(&psi)).max_abs() <= 1e-11 * psi.max_abs());
        }
    }
}

#[test]
fn gradient_of_x() {
    let m = build_quad_mesh(8, 8, Rect::unit()).unwrap();
    let u = grad(&CellField::from_fn(&m, |p| p.x));
    for e in 0..m.n_e() {
        let n = m.edge(e).normal;
        assert!((u[e] - n.x).abs() < 1e-12, "edge {e}");
    }
}

#[test]
fn laplacians_are_symmetric() {
    let m = build_tri_hex_mesh(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (CellField::random(&m, &mut rng), CellField::random(&m, &mut rng));
    let (l, r) = (inner_cell(&laplacian_cell(&a), &b).unwrap(), inner_cell(&a, &laplacian_cell(&b)).unwrap());
    assert!((l - r).abs() <= 1e-12 * l.abs().max(r.abs()));
    let (a, b) = (VertexField::random(&m, &mut rng), VertexField::random(&m, &mut rng));
    let (l, r) = (inner_vertex(&laplacian_vertex(&a), &b).unwrap(), inner_vertex(&a, &laplacian_vertex(&b)).unwrap());
    assert!((l - r).abs() <= 1e-12 * l.abs().max(r.abs()));
}

#[test]
fn vertex_laplacian_of_sine_converges() {
    let pi = std::f64::consts::PI;
    let mut errs = Vec::new();
    for n in [8, 16, 32] {
        let m = build_quad_mesh(n, n, Rect::unit()).unwrap();
        let flags = m.boundary_dual_flags();
        let f = |p: &Point| (pi * p.x).sin() * (pi * p.y).sin();
        // the zero exterior value sits on the boundary through the clipped boundary edges
        let psi = VertexField::from_fn(&m, f);
        let lap = laplacian_vertex(&psi);
        let err = (0..m.n_v()).filter(|&k| !flags[k]).map(|k| (lap[k] + 2.0 * pi * pi * f(&m.dual_cells()[k].center)).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    assert!((errs[1] / errs[2]).log2() >= 1.0, "{errs:?}");
}

#[test]
fn assembled_operators_match() {
    let m = build_tri_hex_mesh(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phi = CellField::random(&m, &mut rng);
    let g = assemble(&m, OpKind::Grad);
    assert_eq!(assemble(&m, OpKind::Div).matrix.nrows(), m.num_cells());
    let a = g.matrix.mul_vec(phi.values());
    let b = grad(&phi);
    assert!(a.iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-14 * (1.0 + y.abs())));
}

#[test]
fn cg_on_discrete_laplacians() {
    let m = build_quad_mesh(10, 10, Rect::unit()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = vertex_stiffness(&m);
    let psi = VertexField::random(&m, &mut rng);
    let (x, _) = solve_cg(&SparseSystem::new(k, k.mul_vec(psi.values())).with_tol(1e-13)).unwrap();
    assert!(x.iter().zip(psi.values()).all(|(a, b)| (a - b).abs() < 1e-8));

    let k = cell_stiffness(&m);
    let mut phi = CellField::random(&m, &mut rng);
    phi.remove_mean();
    let sys = SparseSystem::new(k, k.mul_vec(phi.values())).with_tol(1e-13).with_constraint(Constraint::zero_mean(m.cell_areas()));
    let (x, _) = solve_cg(&sys).unwrap();
    assert!(x.iter().zip(phi.values()).all(|(a, b)| (a - b).abs() < 1e-8));
    let mean: f64 = x.iter().zip(m.cell_areas()).map(|(a, w)| a * w).sum();
    assert!(mean.abs() <= 1e-13);
}
