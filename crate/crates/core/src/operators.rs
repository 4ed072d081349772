//! The four first-order operators and their compositions.
//!
//! ```text
//! grad      [G phi]_e  = -(1/d_e) sum_{i in CE(e)} phi_i n_{e,i}
//! skew_grad [S psi]_e  =  (1/l_e) sum_{nu in VE(e)} psi_nu t_{e,nu}
//! div       [D u]_i    =  (1/A_i) sum_{e in EC(i)} u_e l_e n_{e,i}
//! curl      [C u]_nu   = -(1/A_nu) sum_{e in EV(nu)} u_e d_e t_{e,nu}
//! ```
//!
//! A boundary edge has a single dual cell, so `skew_grad` there behaves as
//! if psi vanished outside the domain, and `div` sees no flux through the
//! boundary. The functions below are matrix-free; [`assemble`] returns the
//! same maps as sparse matrices, cached per mesh.

use std::fmt;
use std::io::Write;

use crate::fields::{CellField, EdgeField, VertexField};
use crate::linalg::CsrMatrix;
use crate::mesh::StaggeredMesh;

/// Value of the gradient on edge `e`. On every edge the sum runs over the
/// cells actually listed in CE(e), which covers boundary edges too.
fn grad_on_edge(mesh: &StaggeredMesh, e: usize, phi: &[f64]) -> f64 {
    let edge = mesh.edge(e);
    -edge.cells.iter().map(|c| phi[c.index] * c.s()).sum::<f64>() / edge.d
}

pub fn grad<'m>(phi: &CellField<'m>) -> EdgeField<'m> {
    let mesh = phi.mesh();
    EdgeField::from_index_fn(mesh, |e| grad_on_edge(mesh, e, phi.values()))
}

pub fn skew_grad<'m>(psi: &VertexField<'m>) -> EdgeField<'m> {
    let mesh = psi.mesh();
    let v = psi.values();
    EdgeField::from_index_fn(mesh, |e| {
        let edge = mesh.edge(e);
        edge.vertices.iter().map(|t| v[t.index] * t.s()).sum::<f64>() / edge.l
    })
}

pub fn div<'m>(u: &EdgeField<'m>) -> CellField<'m> {
    let mesh = u.mesh();
    let mut out = vec![0.0; mesh.num_cells()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let flux = u[e] * edge.l;
        for c in &edge.cells {
            out[c.index] += flux * c.s();
        }
    }
    for (o, a) in out.iter_mut().zip(mesh.cell_areas()) {
        *o /= a;
    }
    CellField::from_index_fn(mesh, |i| out[i])
}

pub fn curl<'m>(u: &EdgeField<'m>) -> VertexField<'m> {
    let mesh = u.mesh();
    let mut out = vec![0.0; mesh.n_v()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let circ = u[e] * edge.d;
        for t in &edge.vertices {
            out[t.index] -= circ * t.s();
        }
    }
    for (o, a) in out.iter_mut().zip(mesh.dual_areas()) {
        *o /= a;
    }
    VertexField::from_index_fn(mesh, |nu| out[nu])
}

/// `div(grad phi)`, a Neumann-type Laplacian.
pub fn laplacian_cell<'m>(phi: &CellField<'m>) -> CellField<'m> {
    div(&grad(phi))
}

/// `curl(skew_grad psi)`, a Dirichlet-type Laplacian.
pub fn laplacian_vertex<'m>(psi: &VertexField<'m>) -> VertexField<'m> {
    curl(&skew_grad(psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Grad,
    SkewGrad,
    Div,
    Curl,
    LaplacianCell,
    LaplacianVertex,
}

impl OpKind {
    pub fn spaces(self) -> (&'static str, &'static str) {
        match self {
            OpKind::Grad => ("edge", "cell"),
            OpKind::SkewGrad => ("edge", "vertex"),
            OpKind::Div => ("cell", "edge"),
            OpKind::Curl => ("vertex", "edge"),
            OpKind::LaplacianCell => ("cell", "cell"),
            OpKind::LaplacianVertex => ("vertex", "vertex"),
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpKind::Grad => "grad",
            OpKind::SkewGrad => "skew_grad",
            OpKind::Div => "div",
            OpKind::Curl => "curl",
            OpKind::LaplacianCell => "laplacian_cell",
            OpKind::LaplacianVertex => "laplacian_vertex",
        };
        f.write_str(s)
    }
}

/// An assembled operator with its row/column spaces and owning mesh.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OpKind,
    pub rows: &'static str,
    pub cols: &'static str,
    pub mesh_id: u64,
    pub matrix: CsrMatrix,
}

impl OperatorMatrix {
    pub fn write_matrix_market<W: Write>(&self, w: W) -> std::io::Result<()> {
        self.matrix.write_matrix_market(w)
    }
}

/// Sparse forms built once per mesh.
#[derive(Debug)]
pub(crate) struct Assembled {
    pub grad: CsrMatrix,
    pub skew: CsrMatrix,
    pub div: CsrMatrix,
    pub curl: CsrMatrix,
    pub lap_cell: CsrMatrix,
    pub lap_vertex: CsrMatrix,
    /// `G^T W_e G`, symmetric positive semidefinite with constant kernel.
    pub stiff_cell: CsrMatrix,
    /// `S^T W_e S`, symmetric positive definite.
    pub stiff_vertex: CsrMatrix,
}

pub(crate) fn assembled(mesh: &StaggeredMesh) -> &Assembled {
    mesh.cache.get_or_init(|| {
        let (nc, nv, ne) = (mesh.num_cells(), mesh.n_v(), mesh.num_edges());
        let mut g = Vec::new();
        let mut s = Vec::new();
        let mut d = Vec::new();
        let mut c = Vec::new();
        for (e, edge) in mesh.edges().iter().enumerate() {
            for i in &edge.cells {
                g.push((e, i.index, -i.s() / edge.d));
                d.push((i.index, e, i.s() * edge.l / mesh.cell_areas()[i.index]));
            }
            for t in &edge.vertices {
                s.push((e, t.index, t.s() / edge.l));
                c.push((t.index, e, -t.s() * edge.d / mesh.dual_areas()[t.index]));
            }
        }
        let grad = CsrMatrix::from_triplets(ne, nc, &g);
        let skew = CsrMatrix::from_triplets(ne, nv, &s);
        let div = CsrMatrix::from_triplets(nc, ne, &d);
        let curl = CsrMatrix::from_triplets(nv, ne, &c);
        let lap_cell = div.matmul(&grad);
        let lap_vertex = curl.matmul(&skew);
        let w = mesh.diamond_areas();
        let stiff_cell = grad.transpose().matmul(&grad.scale_rows(w));
        let stiff_vertex = skew.transpose().matmul(&skew.scale_rows(w));
        Assembled { grad, skew, div, curl, lap_cell, lap_vertex, stiff_cell, stiff_vertex }
    })
}

pub fn assemble(mesh: &StaggeredMesh, kind: OpKind) -> OperatorMatrix {
    let a = assembled(mesh);
    let matrix = match kind {
        OpKind::Grad => &a.grad,
        OpKind::SkewGrad => &a.skew,
        OpKind::Div => &a.div,
        OpKind::Curl => &a.curl,
        OpKind::LaplacianCell => &a.lap_cell,
        OpKind::LaplacianVertex => &a.lap_vertex,
    }
    .clone();
    let (rows, cols) = kind.spaces();
    OperatorMatrix { kind, rows, cols, mesh_id: mesh.id(), matrix }
}

/// `G^T W_e G`: the energy form of the gradient.
pub fn cell_stiffness(mesh: &StaggeredMesh) -> &CsrMatrix {
    &assembled(mesh).stiff_cell
}

/// `S^T W_e S`: the energy form of the skew gradient.
pub fn vertex_stiffness(mesh: &StaggeredMesh) -> &CsrMatrix {
    &assembled(mesh).stiff_vertex
}
