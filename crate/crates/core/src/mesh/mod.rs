//! Staggered primal/dual mesh pairs.
//!
//! Every edge pair couples a primary edge (between two dual centers, length
//! `l`) with the orthogonal dual edge (between two primary centers, length
//! `d`). Primary cells on the boundary are clipped to the domain; dual cells
//! tile the domain exactly. Indices are 0-based, interior elements first.
//!
//! Direction indicators follow one rule for both families: `n_{e,i} = +1`
//! when `n_e` points away from primary cell `i`, and `t_{e,nu} = +1` when
//! `t_e = k x n_e` points away from dual cell `nu`.

mod build;
mod io;
mod quad;
mod trihex;
mod validate;
mod voronoi;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::Point;

pub use build::{build_from_dual, DualTessellation};
pub use io::{parse_mesh, parse_mesh_unchecked, read_mesh, write_mesh, mesh_to_string};
pub use quad::{build_quad_mesh, Rect};
pub use trihex::{build_tri_hex_mesh, TRIHEX_LAMBDA};
pub use validate::{validate, ValidationReport};
pub use voronoi::{build_voronoi_mesh, build_voronoi_mesh_from_points, ConvexDomain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    pub index: usize,
    /// Direction indicator, +1 or -1.
    pub sign: i8,
}

impl Incidence {
    pub fn new(index: usize, sign: i8) -> Self {
        Incidence { index, sign }
    }

    pub fn s(&self) -> f64 {
        self.sign as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryCell {
    pub center: Point,
    /// In-domain area; boundary cells are clipped.
    pub area: f64,
    pub is_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCell {
    pub center: Point,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePair {
    pub normal: Point,
    pub tangent: Point,
    /// Primary edge length (between dual centers, clipped on the boundary).
    pub l: f64,
    /// Dual edge length (between primary centers).
    pub d: f64,
    pub diamond_area: f64,
    pub intersection: Point,
    /// CE(e) with n-indicators.
    pub cells: Vec<Incidence>,
    /// VE(e) with t-indicators. A single entry on boundary edges.
    pub vertices: Vec<Incidence>,
}

/// Raw parts of a mesh, used by the builders and the file reader.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshParts {
    pub primary: Vec<PrimaryCell>,
    pub dual: Vec<DualCell>,
    pub edges: Vec<EdgePair>,
    pub n_c: usize,
    pub n_e: usize,
    pub h: f64,
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub struct StaggeredMesh {
    id: u64,
    primary: Vec<PrimaryCell>,
    dual: Vec<DualCell>,
    edges: Vec<EdgePair>,
    n_c: usize,
    n_e: usize,
    h: f64,
    ec: Vec<Vec<usize>>,
    vc: Vec<Vec<usize>>,
    cv: Vec<Vec<usize>>,
    ev: Vec<Vec<usize>>,
    cell_areas: Vec<f64>,
    dual_areas: Vec<f64>,
    diamond_areas: Vec<f64>,
    pub(crate) cache: OnceLock<crate::operators::Assembled>,
}

impl StaggeredMesh {
    /// Assemble a mesh after structural checks: index ranges, interior-first
    /// ordering, edge cardinalities, indicator values and the Euler identity.
    /// The first violation is reported by element.
    pub fn from_parts(parts: MeshParts) -> Result<Self> {
        check_structure(&parts)?;
        Ok(Self::assemble(parts))
    }

    /// Like [`from_parts`](Self::from_parts) but only checks what is needed
    /// to index safely. Use [`validate`] to inspect the result.
    pub fn from_parts_unchecked(parts: MeshParts) -> Result<Self> {
        check_ranges(&parts)?;
        Ok(Self::assemble(parts))
    }

    fn assemble(parts: MeshParts) -> Self {
        let MeshParts { primary, dual, mut edges, n_c, n_e, h } = parts;
        for edge in &mut edges {
            edge.cells.sort_by_key(|c| c.index);
            edge.vertices.sort_by_key(|v| v.index);
        }
        let mut ec = vec![Vec::new(); primary.len()];
        let mut ev = vec![Vec::new(); dual.len()];
        for (e, edge) in edges.iter().enumerate() {
            for c in &edge.cells {
                ec[c.index].push(e);
            }
            for v in &edge.vertices {
                ev[v.index].push(e);
            }
        }
        let mut vc = vec![Vec::new(); primary.len()];
        for (i, list) in ec.iter().enumerate() {
            let mut s: Vec<usize> = list.iter().flat_map(|&e| edges[e].vertices.iter().map(|v| v.index)).collect();
            s.sort_unstable();
            s.dedup();
            vc[i] = s;
        }
        let mut cv = vec![Vec::new(); dual.len()];
        for (nu, list) in ev.iter().enumerate() {
            let mut s: Vec<usize> = list.iter().flat_map(|&e| edges[e].cells.iter().map(|c| c.index)).collect();
            s.sort_unstable();
            s.dedup();
            cv[nu] = s;
        }
        let cell_areas = primary.iter().map(|c| c.area).collect();
        let dual_areas = dual.iter().map(|c| c.area).collect();
        let diamond_areas = edges.iter().map(|e| e.diamond_area).collect();
        StaggeredMesh {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            primary,
            dual,
            edges,
            n_c,
            n_e,
            h,
            ec,
            vc,
            cv,
            ev,
            cell_areas,
            dual_areas,
            diamond_areas,
            cache: OnceLock::new(),
        }
    }

    pub fn into_parts(self) -> MeshParts {
        MeshParts { primary: self.primary, dual: self.dual, edges: self.edges, n_c: self.n_c, n_e: self.n_e, h: self.h }
    }

    pub fn to_parts(&self) -> MeshParts {
        MeshParts {
            primary: self.primary.clone(),
            dual: self.dual.clone(),
            edges: self.edges.clone(),
            n_c: self.n_c,
            n_e: self.n_e,
            h: self.h,
        }
    }

    /// Identity token; fields compare it to make sure they share a mesh.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }
    pub fn n_cb(&self) -> usize {
        self.primary.len() - self.n_c
    }
    pub fn n_v(&self) -> usize {
        self.dual.len()
    }
    pub fn n_e(&self) -> usize {
        self.n_e
    }
    pub fn n_eb(&self) -> usize {
        self.edges.len() - self.n_e
    }
    /// Number of primary cells, interior and boundary.
    pub fn num_cells(&self) -> usize {
        self.primary.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn h(&self) -> f64 {
        self.h
    }

    /// `N_c + N_cb + N_v - (N_e + N_eb + 1)`; zero on a valid mesh.
    pub fn euler_residual(&self) -> i64 {
        (self.primary.len() + self.dual.len()) as i64 - (self.edges.len() + 1) as i64
    }

    pub fn primary_cells(&self) -> &[PrimaryCell] {
        &self.primary
    }
    pub fn dual_cells(&self) -> &[DualCell] {
        &self.dual
    }
    pub fn edges(&self) -> &[EdgePair] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> &EdgePair {
        &self.edges[e]
    }
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        e >= self.n_e
    }

    pub fn ce(&self, e: usize) -> &[Incidence] {
        &self.edges[e].cells
    }
    pub fn ve(&self, e: usize) -> &[Incidence] {
        &self.edges[e].vertices
    }
    pub fn ec(&self, i: usize) -> &[usize] {
        &self.ec[i]
    }
    pub fn vc(&self, i: usize) -> &[usize] {
        &self.vc[i]
    }
    pub fn cv(&self, nu: usize) -> &[usize] {
        &self.cv[nu]
    }
    pub fn ev(&self, nu: usize) -> &[usize] {
        &self.ev[nu]
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_areas
    }
    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_areas
    }
    pub fn diamond_areas(&self) -> &[f64] {
        &self.diamond_areas
    }

    /// Area of the domain as tiled by the dual cells.
    pub fn domain_area(&self) -> f64 {
        self.dual_areas.iter().sum()
    }

    /// Dual cells owning at least one boundary edge. Stream functions vanish there.
    pub fn boundary_dual_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.dual.len()];
        for e in self.n_e..self.edges.len() {
            for v in &self.edges[e].vertices {
                flags[v.index] = true;
            }
        }
        flags
    }

    /// Segments bounding primary cell `i`, ordered counter-clockwise as seen
    /// from its center. Boundary edges stop at the domain boundary.
    pub fn primary_segments(&self, i: usize) -> Vec<(Point, Point)> {
        self.ec[i]
            .iter()
            .filter_map(|&e| {
                let edge = &self.edges[e];
                let sign = edge.cells.iter().find(|c| c.index == i)?.s();
                let (a, b) = match edge.vertices.as_slice() {
                    [v] => (self.dual[v.index].center, edge.intersection),
                    [v, w] => (self.dual[v.index].center, self.dual[w.index].center),
                    _ => return None,
                };
                Some(if (b - a).dot(&edge.tangent) * sign >= 0.0 { (a, b) } else { (b, a) })
            })
            .collect()
    }

    /// Segments bounding dual cell `nu`, ordered counter-clockwise.
    pub fn dual_segments(&self, nu: usize) -> Vec<(Point, Point)> {
        self.ev[nu]
            .iter()
            .filter_map(|&e| {
                let edge = &self.edges[e];
                let sign = edge.vertices.iter().find(|v| v.index == nu)?.s();
                let (a, b) = match edge.cells.as_slice() {
                    [c, k] => (self.primary[c.index].center, self.primary[k.index].center),
                    _ => return None,
                };
                Some(if -(b - a).dot(&edge.normal) * sign >= 0.0 { (a, b) } else { (b, a) })
            })
            .collect()
    }

    /// Endpoints of the primary edge of `e` (the second is the boundary foot on boundary edges).
    pub fn primary_edge_endpoints(&self, e: usize) -> (Point, Point) {
        let edge = &self.edges[e];
        match edge.vertices.as_slice() {
            [v] => (self.dual[v.index].center, edge.intersection),
            [v, w, ..] => (self.dual[v.index].center, self.dual[w.index].center),
            [] => (edge.intersection, edge.intersection),
        }
    }

    /// Endpoints of the dual edge of `e`.
    pub fn dual_edge_endpoints(&self, e: usize) -> (Point, Point) {
        let edge = &self.edges[e];
        match edge.cells.as_slice() {
            [c, k, ..] => (self.primary[c.index].center, self.primary[k.index].center),
            [c] => (self.primary[c.index].center, edge.intersection),
            [] => (edge.intersection, edge.intersection),
        }
    }
}

fn check_ranges(p: &MeshParts) -> Result<()> {
    if p.n_c > p.primary.len() {
        return Err(Error::InvalidMesh(format!("interior cell count {} exceeds {} cells", p.n_c, p.primary.len())));
    }
    if p.n_e > p.edges.len() {
        return Err(Error::InvalidMesh(format!("interior edge count {} exceeds {} edges", p.n_e, p.edges.len())));
    }
    for (e, edge) in p.edges.iter().enumerate() {
        for c in &edge.cells {
            if c.index >= p.primary.len() {
                return Err(Error::InvalidMesh(format!("edge {e}: primary cell {} out of range", c.index)));
            }
        }
        for v in &edge.vertices {
            if v.index >= p.dual.len() {
                return Err(Error::InvalidMesh(format!("edge {e}: dual cell {} out of range", v.index)));
            }
        }
    }
    Ok(())
}

fn check_structure(p: &MeshParts) -> Result<()> {
    check_ranges(p)?;
    let euler = (p.primary.len() + p.dual.len()) as i64 - (p.edges.len() + 1) as i64;
    if euler != 0 {
        return Err(Error::InvalidMesh(format!(
            "Euler identity violated: {} cells + {} dual cells != {} edges + 1",
            p.primary.len(),
            p.dual.len(),
            p.edges.len()
        )));
    }
    for (i, c) in p.primary.iter().enumerate() {
        if c.is_boundary != (i >= p.n_c) {
            return Err(Error::InvalidMesh(format!("primary cell {i}: boundary flag breaks interior-first ordering")));
        }
        if !(c.area > 0.0) {
            return Err(Error::InvalidMesh(format!("primary cell {i}: nonpositive area {}", c.area)));
        }
    }
    for (nu, c) in p.dual.iter().enumerate() {
        if !(c.area > 0.0) {
            return Err(Error::InvalidMesh(format!("dual cell {nu}: nonpositive area {}", c.area)));
        }
    }
    let mut cell_seen = vec![false; p.primary.len()];
    let mut dual_seen = vec![false; p.dual.len()];
    for (e, edge) in p.edges.iter().enumerate() {
        let interior = e < p.n_e;
        let nv = edge.vertices.len();
        let nc = edge.cells.len();
        if (interior && (nv != 2 || nc != 2)) || (!interior && (nv != 1 || nc == 0 || nc > 2)) {
            return Err(Error::InvalidMesh(format!("edge {e}: |CE| = {nc}, |VE| = {nv} for an {} edge", if interior { "interior" } else { "boundary" })));
        }
        if edge.cells.iter().chain(&edge.vertices).any(|x| x.sign != 1 && x.sign != -1) {
            return Err(Error::InvalidMesh(format!("edge {e}: indicator not +-1")));
        }
        if nc == 2 && edge.cells[0].index == edge.cells[1].index {
            return Err(Error::InvalidMesh(format!("edge {e}: repeated primary cell {}", edge.cells[0].index)));
        }
        if nv == 2 && edge.vertices[0].index == edge.vertices[1].index {
            return Err(Error::InvalidMesh(format!("edge {e}: repeated dual cell {}", edge.vertices[0].index)));
        }
        if nc == 2 && edge.cells[0].sign + edge.cells[1].sign != 0 {
            return Err(Error::InvalidMesh(format!("edge {e}: n-indicators do not cancel")));
        }
        if nv == 2 && edge.vertices[0].sign + edge.vertices[1].sign != 0 {
            return Err(Error::InvalidMesh(format!("edge {e}: t-indicators do not cancel")));
        }
        if !(edge.l > 0.0 && edge.d > 0.0) {
            return Err(Error::InvalidMesh(format!("edge {e}: nonpositive length (l = {}, d = {})", edge.l, edge.d)));
        }
        if !interior {
            for c in &edge.cells {
                if c.index < p.n_c {
                    return Err(Error::InvalidMesh(format!("edge {e}: boundary edge touches interior cell {}", c.index)));
                }
            }
        }
        for c in &edge.cells {
            cell_seen[c.index] = true;
        }
        for v in &edge.vertices {
            dual_seen[v.index] = true;
        }
    }
    if let Some(i) = cell_seen.iter().position(|s| !s) {
        return Err(Error::InvalidMesh(format!("primary cell {i} has no edges")));
    }
    if let Some(nu) = dual_seen.iter().position(|s| !s) {
        return Err(Error::InvalidMesh(format!("dual cell {nu} has no edges")));
    }
    Ok(())
}
