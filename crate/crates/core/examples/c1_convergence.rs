//! Strong consistency of the restriction/prolongation pairs: the distance
//! between `P_h R_h u` and `Pi u` on refined quad meshes, next to the a
//! priori bound for the general space.
//!
//! cargo run --release --example c1_convergence

use std::f64::consts::PI;

use stagcalc::approximation::{general_c1_bound, compact_stokes_field, general_test_field, stokes_test_field, Restriction};
use stagcalc::convergence::{c1_csv, c1_study, MeshFamily};

fn main() -> stagcalc::Result<()> {
    let levels = [8, 16, 32, 64];
    let general = c1_study(&general_test_field(), Restriction::General, MeshFamily::Quad, &levels)?;
    println!("general space");
    print!("{}", c1_csv(&general));
    let sup = 2.0 * PI.powi(3);
    for (n, r) in levels.iter().zip(&general) {
        let mesh = MeshFamily::Quad.build(*n)?;
        println!("N={n:<3} error {:.4e} <= bound {:.4e}", r.error, general_c1_bound(&mesh, sup, sup));
    }
    println!("\nstokes space");
    print!("{}", c1_csv(&c1_study(&compact_stokes_field(), Restriction::Stokes, MeshFamily::Quad, &levels)?));
    println!("\nstokes space, stream not compactly supported");
    print!("{}", c1_csv(&c1_study(&stokes_test_field(), Restriction::Stokes, MeshFamily::Quad, &levels)?));
    Ok(())
}
