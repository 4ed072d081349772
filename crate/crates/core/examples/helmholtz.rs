//! Split an edge field into its rotational and gradient parts, recover it
//! from its curl and divergence, and integrate stream functions and
//! potentials along paths.
//!
//! cargo run --release --example helmholtz

use stagcalc::decomposition::{helmholtz_decompose, integrate_potential, integrate_stream, reconstruct_from_curl_div};
use stagcalc::mesh::{build_voronoi_mesh, ConvexDomain};
use stagcalc::operators::{curl, div, grad, skew_grad};
use stagcalc::{CellField, EdgeField, Point, VertexField};

fn main() -> stagcalc::Result<()> {
    let mesh = build_voronoi_mesh(400, &ConvexDomain::unit_square(), 10, 3)?;
    let u = EdgeField::from_vector_fn(&mesh, |p| Point::new(p.y.sin() + p.x * p.x, (3.0 * p.x).cos() - p.y));

    let (psi, phi) = helmholtz_decompose(&u)?;
    let rot = skew_grad(&psi);
    let pot = grad(&phi);
    let rest = &(&u - &rot) - &pot;
    println!("|u| = {:.6}, |skew_grad psi| = {:.6}, |grad phi| = {:.6}, remainder {:.2e}", u.norm(), rot.norm(), pot.norm(), rest.max_abs());
    println!("(skew_grad psi, grad phi) = {:.2e}", rot.inner(&pot)?);

    let back = reconstruct_from_curl_div(&curl(&u), &div(&u))?;
    println!("reconstruction from (curl u, div u): max error {:.2e}", (&back - &u).max_abs());

    let stream = integrate_stream(&rot)?;
    let potential = integrate_potential(&pot)?;
    let s = VertexField::from_index_fn(&mesh, |k| stream[k] - psi[k]);
    let c = CellField::from_index_fn(&mesh, |i| potential[i] - phi[i]);
    println!("path-integrated stream differs from psi by a constant: spread {:.2e}", spread(s.values()));
    println!("path-integrated potential differs from phi by a constant: spread {:.2e}", spread(c.values()));
    Ok(())
}

fn spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
    hi - lo
}
