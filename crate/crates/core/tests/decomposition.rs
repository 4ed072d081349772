use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagcalc::decomposition::*;
use stagcalc::mesh::{build_quad_mesh, build_tri_hex_mesh, build_voronoi_mesh, ConvexDomain, Rect};
use stagcalc::operators::{curl, div, grad, skew_grad};
use stagcalc::{CellField, EdgeField, Error, VertexField};

#[test]
fn pure_parts_are_recognized() {
    let m = build_quad_mesh(8, 8, Rect::unit()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let psi0 = VertexField::random(&m, &mut rng);
    let (psi, phi) = helmholtz_decompose(&skew_grad(&psi0)).unwrap();
    assert!(phi.max_abs() < 1e-8);
    assert!((&skew_grad(&psi) - &skew_grad(&psi0)).max_abs() < 1e-8);

    let mut phi0 = CellField::random(&m, &mut rng);
    phi0.remove_mean();
    let (psi, phi) = helmholtz_decompose(&grad(&phi0)).unwrap();
    assert!(skew_grad(&psi).max_abs() < 1e-8);
    assert!((&phi - &phi0).max_abs() < 1e-8);
}

#[test]
fn parts_are_orthogonal() {
    let m = build_quad_mesh(8, 8, Rect::unit()).unwrap();
    let u = EdgeField::random(&m, &mut ChaCha8Rng::seed_from_u64(8));
    let (psi, phi) = helmholtz_decompose(&u).unwrap();
    let (a, b) = (skew_grad(&psi), grad(&phi));
    assert!(a.inner(&b).unwrap().abs() <= 1e-10 * a.norm() * b.norm());
}

#[test]
fn reconstruction_round_trip() {
    for m in [build_quad_mesh(16, 16, Rect::unit()).unwrap(), build_tri_hex_mesh(2).unwrap(), build_voronoi_mesh(200, &ConvexDomain::unit_square(), 5, 3).unwrap()] {
        let u = EdgeField::random(&m, &mut ChaCha8Rng::seed_from_u64(6));
        let back = reconstruct_from_curl_div(&curl(&u), &div(&u)).unwrap();
        assert!((&back - &u).max_abs() <= 1e-8);
    }
}

#[test]
fn trivial_kernel_and_incompatible_data() {
    let m = build_tri_hex_mesh(1).unwrap();
    let u = reconstruct_from_curl_div(&VertexField::zeros(&m), &CellField::zeros(&m)).unwrap();
    assert_eq!(u.max_abs(), 0.0);
    let delta = CellField::constant(&m, 1.0);
    assert!(matches!(reconstruct_from_curl_div(&VertexField::zeros(&m), &delta), Err(Error::Incompatible { .. })));
}

#[test]
fn path_integration() {
    let m = build_tri_hex_mesh(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut psi0 = VertexField::random(&m, &mut rng);
    let anchor = psi0[0];
    psi0.values_mut().iter_mut().for_each(|v| *v -= anchor);
    let psi = integrate_stream(&skew_grad(&psi0)).unwrap();
    assert!((&psi - &psi0).max_abs() <= 1e-12);
    assert_eq!(integrate_stream(&EdgeField::zeros(&m)).unwrap().max_abs(), 0.0);

    let phi0 = CellField::random(&m, &mut rng);
    let phi = integrate_potential(&grad(&phi0)).unwrap();
    let shift = phi[0] - phi0[0];
    assert!(phi.values().iter().zip(phi0.values()).all(|(a, b)| (a - b - shift).abs() <= 1e-12));
    assert_eq!(integrate_potential(&EdgeField::zeros(&m)).unwrap().max_abs(), 0.0);
}

#[test]
fn path_integration_names_sources() {
    let m = build_quad_mesh(6, 6, Rect::unit()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // a source in one interior cell
    let mut u = skew_grad(&VertexField::random(&m, &mut rng));
    let e = m.ec(14)[0];
    u[e] += 1.0;
    match integrate_stream(&u) {
        Err(Error::CycleMismatch { sources, .. }) => assert!(sources.contains(&14) || m.ce(e).iter().any(|c| sources.contains(&c.index)), "{sources:?}"),
        other => panic!("{other:?}"),
    }
    let mut u = grad(&CellField::random(&m, &mut rng));
    u[m.ev(10)[0]] += 1.0;
    assert!(matches!(integrate_potential(&u), Err(Error::CycleMismatch { .. })));
}

#[test]
fn poincare_constants_are_mesh_uniform() {
    let mut prev: Option<[f64; 3]> = None;
    for n in [4, 8, 16] {
        let m = build_quad_mesh(n, n, Rect::unit()).unwrap();
        let c = [SpaceKind::Cell, SpaceKind::Vertex, SpaceKind::Edge].map(|k| poincare_constant(k, &m).unwrap());
        assert!(c[2] * c[2] <= 1.05 * (c[0] * c[0] + c[1] * c[1]));
        if let Some(p) = prev {
            for k in 0..3 {
                let r = c[k] / p[k];
                assert!((0.7..=1.25).contains(&r), "{r}");
            }
        }
        prev = Some(c);
    }
    let single = build_quad_mesh(2, 2, Rect::unit()).unwrap();
    for k in [SpaceKind::Cell, SpaceKind::Vertex, SpaceKind::Edge] {
        let c = poincare_constant(k, &single).unwrap();
        assert!(c.is_finite() && c > 0.0);
    }
}
