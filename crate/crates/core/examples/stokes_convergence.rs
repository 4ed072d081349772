//! Manufactured Stokes flow on refined quad meshes: stream and vorticity
//! errors, energy bound and observed orders.
//!
//! cargo run --release --example stokes_convergence

use stagcalc::convergence::{stokes_csv, stokes_study, MeshFamily, StokesExact};
use stagcalc::linalg::SolveOptions;

fn main() -> stagcalc::Result<()> {
    let levels = [8, 16, 32, 64];
    let records = stokes_study(&StokesExact::bubble(), MeshFamily::Quad, &levels, &SolveOptions::default())?;
    print!("{}", stokes_csv(&records));
    println!();
    for r in &records {
        println!("N={:<3} pressure error {:.3e}  momentum residual {:.3e}", r.level, r.e_p, r.momentum_residual);
    }
    Ok(())
}
