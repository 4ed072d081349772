//! Discrete Poincare constants of the cell, vertex and edge spaces under
//! refinement. The edge constant is half the larger of the other two.
//! Edge norms see one normal component per edge, which halves the energy of
//! a smooth gradient, so the limits are sqrt(2) times the continuous ones.
//!
//! cargo run --release --example poincare

use stagcalc::decomposition::{poincare_constant, SpaceKind};
use stagcalc::mesh::{build_quad_mesh, Rect};

fn main() -> stagcalc::Result<()> {
    println!("{:>4} {:>10} {:>10} {:>10} {:>14}", "N", "C_c", "C_v", "C_e", "max(C_c,C_v)/2");
    for n in [4, 8, 16, 32] {
        let mesh = build_quad_mesh(n, n, Rect::unit())?;
        let cc = poincare_constant(SpaceKind::Cell, &mesh)?;
        let cv = poincare_constant(SpaceKind::Vertex, &mesh)?;
        let ce = poincare_constant(SpaceKind::Edge, &mesh)?;
        println!("{n:>4} {cc:>10.6} {cv:>10.6} {ce:>10.6} {:>14.6}", cc.max(cv) / 2.0);
    }
    let pi = std::f64::consts::PI;
    println!("limits: C_c -> sqrt 2/pi = {:.6}, C_v -> 1/pi = {:.6}, C_e -> 1/(sqrt 2 pi) = {:.6}", 2f64.sqrt() / pi, 1.0 / pi, 1.0 / (2f64.sqrt() * pi));
    Ok(())
}
