//! Lloyd-relaxed Voronoi meshes of a convex domain and the tri-hex family:
//! Euler characteristic, orthogonality and quasi-uniformity.
//!
//! cargo run --release --example voronoi_mesh

use stagcalc::geometry::Point;
use stagcalc::mesh::{build_tri_hex_mesh, build_voronoi_mesh, validate, ConvexDomain};

fn main() -> stagcalc::Result<()> {
    let hexagon = ConvexDomain::new((0..6).map(|k| {
        let t = std::f64::consts::PI * k as f64 / 3.0;
        Point::new(t.cos(), t.sin())
    }).collect())?;
    println!("{:<22} {:>6} {:>6} {:>6} {:>10} {:>10} {:>8} {:>6}", "mesh", "cells", "duals", "euler", "orth", "m", "M", "valid");
    for (name, domain) in [("square", ConvexDomain::unit_square()), ("hexagon", hexagon)] {
        for seeds in [16, 64, 256] {
            let mesh = build_voronoi_mesh(seeds, &domain, 10, 7)?;
            let r = validate(&mesh);
            println!("{:<22} {:>6} {:>6} {:>6} {:>10.2e} {:>10.4} {:>8.4} {:>6}", format!("voronoi {name} {seeds}"), mesh.n_c(), mesh.n_v(), r.euler_residual, r.max_orthogonality_defect, r.m, r.big_m, r.is_valid());
        }
    }
    for refine in 1..=4 {
        let mesh = build_tri_hex_mesh(refine)?;
        let r = validate(&mesh);
        println!("{:<22} {:>6} {:>6} {:>6} {:>10.2e} {:>10.4} {:>8.4} {:>6}", format!("trihex {refine}"), mesh.n_c(), mesh.n_v(), r.euler_residual, r.max_orthogonality_defect, r.m, r.big_m, r.is_valid());
    }
    Ok(())
}
