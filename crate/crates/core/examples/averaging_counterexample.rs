//! Averaging normal components along edges is not a consistent restriction:
//! on tri-hex meshes the discrete divergence of a divergence-free linear
//! field takes a fixed set of nonzero values at every resolution.
//!
//! cargo run --release --example averaging_counterexample

use stagcalc::approximation::{averaging_counterexample, value_set};
use stagcalc::mesh::build_tri_hex_mesh;

fn main() -> stagcalc::Result<()> {
    let (a, b) = (1.0, 2.0);
    println!("expected divergence values 0, +-{:.10}", (a + b) / (2.0 * 3f64.sqrt()));
    println!("expected vorticity values  0, +-{:.10}", 2.0 * 3f64.sqrt() * a / 23.0);
    println!("{:>6} {:>10} {:>12} {:>12} {:>12}", "refine", "h", "|div|", "mean div", "|curl|");
    for r in 1..=4 {
        let mesh = build_tri_hex_mesh(r)?;
        let c = averaging_counterexample(&mesh, a, b);
        println!("{:>6} {:>10.4e} {:>12.6e} {:>12.3e} {:>12.6e}", r, c.h, c.divergence_norm, c.divergence_mean, c.vorticity_norm);
        println!("       divergence values {:?}", value_set(c.divergence.iter().copied(), 1e-10));
        println!("       vorticity values  {:?}", value_set(c.vorticity.iter().copied(), 1e-10));
    }
    Ok(())
}
