//! Text mesh format `stagmesh v1`.
//!
//! ```text
//! stagmesh v1
//! Nc Ncb Nv Ne Neb h
//! [primary]
//! index cx cy area boundary-flag
//! [dual]
//! index cx cy area
//! [edges]
//! index nx ny le de diamond_area ix iy | cell:sign ... | dual:sign ...
//! ```
//!
//! Indices in the file are 1-based. Floats carry 17 significant digits so
//! a write/read cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use super::{DualCell, EdgePair, Incidence, MeshParts, PrimaryCell, StaggeredMesh};
use crate::error::{Error, Result};
use crate::geometry::{perp, Point};

const HEADER: &str = "stagmesh v1";

pub fn mesh_to_string(mesh: &StaggeredMesh) -> String {
    let mut s = String::new();
    let g = |x: f64| format!("{x:.16e}");
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "{} {} {} {} {} {}", mesh.n_c(), mesh.n_cb(), mesh.n_v(), mesh.n_e(), mesh.n_eb(), g(mesh.h())).unwrap();
    writeln!(s, "[primary]").unwrap();
    for (i, c) in mesh.primary_cells().iter().enumerate() {
        writeln!(s, "{} {} {} {} {}", i + 1, g(c.center.x), g(c.center.y), g(c.area), c.is_boundary as u8).unwrap();
    }
    writeln!(s, "[dual]").unwrap();
    for (nu, c) in mesh.dual_cells().iter().enumerate() {
        writeln!(s, "{} {} {} {}", nu + 1, g(c.center.x), g(c.center.y), g(c.area)).unwrap();
    }
    writeln!(s, "[edges]").unwrap();
    for (e, edge) in mesh.edges().iter().enumerate() {
        write!(
            s,
            "{} {} {} {} {} {} {} {} |",
            e + 1,
            g(edge.normal.x),
            g(edge.normal.y),
            g(edge.l),
            g(edge.d),
            g(edge.diamond_area),
            g(edge.intersection.x),
            g(edge.intersection.y)
        )
        .unwrap();
        for c in &edge.cells {
            write!(s, " {}:{:+}", c.index + 1, c.sign).unwrap();
        }
        write!(s, " |").unwrap();
        for v in &edge.vertices {
            write!(s, " {}:{:+}", v.index + 1, v.sign).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh(mesh: &StaggeredMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh))?;
    Ok(())
}

/// Read and structurally check a mesh file.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<StaggeredMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn parse_mesh(text: &str) -> Result<StaggeredMesh> {
    StaggeredMesh::from_parts(parse_parts(text)?)
}

/// Parse without the Euler and orientation checks, e.g. to inspect a
/// damaged file with [`validate`](super::validate).
pub fn parse_mesh_unchecked(text: &str) -> Result<StaggeredMesh> {
    StaggeredMesh::from_parts_unchecked(parse_parts(text)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (k, line) in self.inner.by_ref() {
            let t = line.trim();
            self.last = k + 1;
            if !t.is_empty() && !t.starts_with('#') {
                return Some((k + 1, t));
            }
        }
        None
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("bad {what} '{tok}'")))
}

fn index(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let k: usize = num(tok, line, what)?;
    k.checked_sub(1).ok_or_else(|| perr(line, format!("{what} must be 1-based")))
}

fn section(lines: &mut Lines, name: &str) -> Result<()> {
    match lines.next() {
        Some((_, t)) if t == format!("[{name}]") => Ok(()),
        Some((k, t)) => Err(perr(k, format!("expected section [{name}], found '{t}'"))),
        None => Err(perr(lines.last, format!("missing section [{name}]"))),
    }
}

fn entry<'a>(lines: &mut Lines<'a>, name: &str, k: usize, total: usize) -> Result<(usize, &'a str)> {
    match lines.next() {
        Some((n, t)) if t.starts_with('[') => Err(perr(n, format!("section [{name}] ends after {k} of {total} entries"))),
        Some(x) => Ok(x),
        None => Err(perr(lines.last, format!("section [{name}] truncated after {k} of {total} entries"))),
    }
}

fn incidences(part: Option<&str>, line: usize, what: &str) -> Result<Vec<Incidence>> {
    let part = part.ok_or_else(|| perr(line, format!("missing {what} list")))?;
    part.split_whitespace()
        .map(|tok| {
            let (i, s) = tok.split_once(':').ok_or_else(|| perr(line, format!("bad {what} entry '{tok}'")))?;
            let index = index(Some(i), line, what)?;
            let sign: i8 = s.parse().map_err(|_| perr(line, format!("bad indicator '{s}'")))?;
            Ok(Incidence::new(index, sign))
        })
        .collect()
}

fn parse_parts(text: &str) -> Result<MeshParts> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable(), last: 0 };
    match lines.next() {
        Some((_, t)) if t == HEADER => {}
        Some((k, t)) => return Err(perr(k, format!("expected header '{HEADER}', found '{t}'"))),
        None => return Err(perr(0, "empty mesh file")),
    }
    let (k, counts) = lines.next().ok_or_else(|| perr(lines.last, "missing counts line"))?;
    let mut tok = counts.split_whitespace();
    let n_c: usize = num(tok.next(), k, "Nc")?;
    let n_cb: usize = num(tok.next(), k, "Ncb")?;
    let n_v: usize = num(tok.next(), k, "Nv")?;
    let n_e: usize = num(tok.next(), k, "Ne")?;
    let n_eb: usize = num(tok.next(), k, "Neb")?;
    let h: f64 = num(tok.next(), k, "h")?;

    section(&mut lines, "primary")?;
    let mut primary = Vec::with_capacity(n_c + n_cb);
    for i in 0..n_c + n_cb {
        let (k, t) = entry(&mut lines, "primary", i, n_c + n_cb)?;
        let mut tok = t.split_whitespace();
        if index(tok.next(), k, "primary index")? != i {
            return Err(perr(k, format!("primary cells out of order at entry {}", i + 1)));
        }
        let x: f64 = num(tok.next(), k, "cx")?;
        let y: f64 = num(tok.next(), k, "cy")?;
        let area: f64 = num(tok.next(), k, "area")?;
        let flag: u8 = num(tok.next(), k, "boundary flag")?;
        primary.push(PrimaryCell { center: Point::new(x, y), area, is_boundary: flag != 0 });
    }
    section(&mut lines, "dual")?;
    let mut dual = Vec::with_capacity(n_v);
    for nu in 0..n_v {
        let (k, t) = entry(&mut lines, "dual", nu, n_v)?;
        let mut tok = t.split_whitespace();
        if index(tok.next(), k, "dual index")? != nu {
            return Err(perr(k, format!("dual cells out of order at entry {}", nu + 1)));
        }
        let x: f64 = num(tok.next(), k, "cx")?;
        let y: f64 = num(tok.next(), k, "cy")?;
        let area: f64 = num(tok.next(), k, "area")?;
        dual.push(DualCell { center: Point::new(x, y), area });
    }
    section(&mut lines, "edges")?;
    let mut edges = Vec::with_capacity(n_e + n_eb);
    for e in 0..n_e + n_eb {
        let (k, t) = entry(&mut lines, "edges", e, n_e + n_eb)?;
        let mut parts = t.split('|');
        let mut tok = parts.next().unwrap_or("").split_whitespace();
        if index(tok.next(), k, "edge index")? != e {
            return Err(perr(k, format!("edges out of order at entry {}", e + 1)));
        }
        let mut f = |what: &str| num::<f64>(tok.next(), k, what);
        let normal = Point::new(f("nx")?, f("ny")?);
        let l = f("le")?;
        let d = f("de")?;
        let diamond_area = f("diamond_area")?;
        let intersection = Point::new(f("ix")?, f("iy")?);
        let cells = incidences(parts.next(), k, "CE")?;
        let vertices = incidences(parts.next(), k, "VE")?;
        edges.push(EdgePair { normal, tangent: perp(&normal), l, d, diamond_area, intersection, cells, vertices });
    }
    if let Some((k, t)) = lines.next() {
        return Err(perr(k, format!("unexpected trailing content '{t}'")));
    }
    Ok(MeshParts { primary, dual, edges, n_c, n_e, h })
}
