//! Build a tensor-product mesh, validate it, write it to disk in the text
//! format and read it back.
//!
//! cargo run --release --example quad_mesh

use stagcalc::mesh::{build_quad_mesh, read_mesh, validate, write_mesh, Rect};

fn main() -> stagcalc::Result<()> {
    let mesh = build_quad_mesh(6, 4, Rect::new(0.0, 0.0, 1.5, 1.0)?)?;
    println!("cells {} (+{} boundary), dual cells {}, edges {} (+{} boundary), h = {:.4}", mesh.n_c(), mesh.n_cb(), mesh.n_v(), mesh.n_e(), mesh.n_eb(), mesh.h());
    print!("{}", validate(&mesh));

    let dir = std::env::temp_dir().join("stagcalc-quad-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("quad_6x4.mesh");
    write_mesh(&mesh, &path)?;
    let back = read_mesh(&path)?;
    println!("wrote {}; read back identical: {}", path.display(), back.to_parts() == mesh.to_parts());
    Ok(())
}
