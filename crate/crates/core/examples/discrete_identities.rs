//! Integration by parts and the exact-sequence identities on random fields,
//! over all three mesh families.
//!
//! cargo run --release --example discrete_identities

use stagcalc::identities::check_identities;
use stagcalc::mesh::{build_quad_mesh, build_tri_hex_mesh, build_voronoi_mesh, ConvexDomain, Rect};

fn main() -> stagcalc::Result<()> {
    let meshes = [
        ("quad 32", build_quad_mesh(32, 32, Rect::unit())?),
        ("trihex 4", build_tri_hex_mesh(4)?),
        ("voronoi 256", build_voronoi_mesh(256, &ConvexDomain::unit_square(), 10, 0)?),
    ];
    for (name, mesh) in &meshes {
        let report = check_identities(mesh, 200, 1);
        println!("{name}: {}", if report.passes() { "pass" } else { "FAIL" });
        print!("{report}");
    }
    Ok(())
}
