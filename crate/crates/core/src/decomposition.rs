//! Helmholtz decomposition `u = skew_grad(psi) + grad(phi)`, reconstruction
//! from prescribed curl and divergence, path integration of stream
//! functions and potentials, and empirical Poincaré constants.
//!
//! The elliptic problems are solved in their symmetric energy form: with
//! `W` the diagonal area weights, integration by parts gives
//! `S^T W_e S psi = -1/2 W_v curl(u)` and `G^T W_e G phi = -1/2 W_c div(u)`.

use std::collections::VecDeque;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{CellField, EdgeField, VertexField};
use crate::linalg::{solve_cg, Constraint, CsrMatrix, LinearOperator, SolveOptions, SolveStats, SparseSystem};
use crate::mesh::StaggeredMesh;
use crate::operators::{self, cell_stiffness, vertex_stiffness};

/// Relative tolerance on the integral of a divergence field.
pub const COMPATIBILITY_TOL: f64 = 1e-12;
/// Scale-aware tolerance for closing loops in path integration.
pub const CYCLE_TOL: f64 = 1e-11;

/// Solve `laplacian_vertex(psi) = omega`.
pub fn solve_vertex_poisson<'m>(omega: &VertexField<'m>, opts: &SolveOptions) -> Result<(VertexField<'m>, SolveStats)> {
    let mesh = omega.mesh();
    let rhs: Vec<f64> = omega.values().iter().zip(mesh.dual_areas()).map(|(w, a)| -0.5 * a * w).collect();
    let sys = opts.apply(SparseSystem::new(vertex_stiffness(mesh), rhs));
    let (x, stats) = solve_cg(&sys)?;
    Ok((VertexField::from_index_fn(mesh, |k| x[k]), stats))
}

/// Solve `laplacian_cell(phi) = delta` with zero area-weighted mean.
pub fn solve_cell_poisson<'m>(delta: &CellField<'m>, opts: &SolveOptions) -> Result<(CellField<'m>, SolveStats)> {
    check_compatible(delta)?;
    cell_poisson(delta, opts)
}

/// Cell Poisson solve without the compatibility check, for right-hand
/// sides that integrate to zero by construction such as `div(u)`.
fn cell_poisson<'m>(delta: &CellField<'m>, opts: &SolveOptions) -> Result<(CellField<'m>, SolveStats)> {
    let mesh = delta.mesh();
    let mut rhs: Vec<f64> = delta.values().iter().zip(mesh.cell_areas()).map(|(d, a)| -0.5 * a * d).collect();
    // drop the rounding-level mean so the singular system is consistent
    let s: f64 = rhs.iter().sum::<f64>() / rhs.len() as f64;
    rhs.iter_mut().for_each(|r| *r -= s);
    let sys = opts.apply(SparseSystem::new(cell_stiffness(mesh), rhs)).with_constraint(Constraint::zero_mean(mesh.cell_areas()));
    let (x, stats) = solve_cg(&sys)?;
    Ok((CellField::from_index_fn(mesh, |k| x[k]), stats))
}

fn check_compatible(delta: &CellField) -> Result<()> {
    let integral = delta.integral();
    let scale: f64 = delta.values().iter().zip(delta.mesh().cell_areas()).map(|(d, a)| (d * a).abs()).sum();
    if integral.abs() > COMPATIBILITY_TOL * scale {
        return Err(Error::Incompatible { integral });
    }
    Ok(())
}

/// Split `u` into `skew_grad(psi) + grad(phi)`, `phi` with zero mean.
pub fn helmholtz_decompose<'m>(u: &EdgeField<'m>) -> Result<(VertexField<'m>, CellField<'m>)> {
    helmholtz_decompose_with(u, &SolveOptions::default())
}

pub fn helmholtz_decompose_with<'m>(u: &EdgeField<'m>, opts: &SolveOptions) -> Result<(VertexField<'m>, CellField<'m>)> {
    let (psi, _) = solve_vertex_poisson(&operators::curl(u), opts)?;
    let (phi, _) = cell_poisson(&operators::div(u), opts)?;
    Ok((psi, phi))
}

/// The unique edge field with the given curl and divergence.
pub fn reconstruct_from_curl_div<'m>(omega: &VertexField<'m>, delta: &CellField<'m>) -> Result<EdgeField<'m>> {
    reconstruct_from_curl_div_with(omega, delta, &SolveOptions::default())
}

pub fn reconstruct_from_curl_div_with<'m>(omega: &VertexField<'m>, delta: &CellField<'m>, opts: &SolveOptions) -> Result<EdgeField<'m>> {
    if !omega.same_mesh(delta) {
        return Err(Error::MeshMismatch);
    }
    let (psi, _) = solve_vertex_poisson(omega, opts)?;
    let (phi, _) = solve_cell_poisson(delta, opts)?;
    Ok(&operators::skew_grad(&psi) + &operators::grad(&phi))
}

/// Where the integration constant of a stream function is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamGauge {
    /// `psi = 0` on the lowest-index dual cell; only interior edges are used.
    Anchor,
    /// `psi = 0` outside the domain; boundary edges link to that exterior value.
    Boundary,
}

/// Stream function of a discretely divergence-free `u` with the anchor gauge.
pub fn integrate_stream<'m>(u: &EdgeField<'m>) -> Result<VertexField<'m>> {
    integrate_stream_with(u, StreamGauge::Anchor)
}

/// Breadth-first integration of `u_e l_e = sum psi_nu t_{e,nu}` over the
/// dual cells; every edge left out of the spanning tree is checked.
pub fn integrate_stream_with<'m>(u: &EdgeField<'m>, gauge: StreamGauge) -> Result<VertexField<'m>> {
    let mesh = u.mesh();
    let nv = mesh.n_v();
    let tol = CYCLE_TOL * (1.0 + u.norm());
    let mut psi = vec![0.0; nv];
    let mut seen = vec![false; nv];
    let mut tree = vec![false; mesh.num_edges()];
    let mut queue = VecDeque::new();
    match gauge {
        StreamGauge::Anchor => {
            if nv > 0 {
                seen[0] = true;
                queue.push_back(0);
            }
        }
        StreamGauge::Boundary => {
            for e in mesh.n_e()..mesh.num_edges() {
                let t = mesh.ve(e)[0];
                if !seen[t.index] {
                    seen[t.index] = true;
                    psi[t.index] = u[e] * mesh.edge(e).l / t.s();
                    tree[e] = true;
                    queue.push_back(t.index);
                }
            }
        }
    }
    while let Some(a) = queue.pop_front() {
        for &e in mesh.ev(a) {
            if let [p, q] = mesh.ve(e) {
                let (ta, tb) = if p.index == a { (p, q) } else { (q, p) };
                if !seen[tb.index] {
                    seen[tb.index] = true;
                    tree[e] = true;
                    psi[tb.index] = (u[e] * mesh.edge(e).l - psi[a] * ta.s()) / tb.s();
                    queue.push_back(tb.index);
                }
            }
        }
    }
    if let Some(nu) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidMesh(format!("dual cell {nu} is unreachable through interior edges")));
    }
    let last = if gauge == StreamGauge::Boundary { mesh.num_edges() } else { mesh.n_e() };
    for e in 0..last {
        if tree[e] {
            continue;
        }
        let edge = mesh.edge(e);
        let s: f64 = edge.vertices.iter().map(|t| psi[t.index] * t.s()).sum::<f64>() / edge.l;
        let residual = (s - u[e]).abs();
        if residual > tol {
            let d = operators::div(u);
            let sources = sources(d.values(), mesh.cell_areas(), mesh.n_c_bound(gauge), tol * mesh.h());
            return Err(Error::CycleMismatch { what: "stream", edge: e, residual, sources });
        }
    }
    Ok(VertexField::from_index_fn(mesh, |k| psi[k]))
}

trait GaugeCells {
    fn n_c_bound(&self, gauge: StreamGauge) -> usize;
}

impl GaugeCells for StaggeredMesh {
    /// Cells whose divergence the gauge has to respect.
    fn n_c_bound(&self, gauge: StreamGauge) -> usize {
        match gauge {
            StreamGauge::Anchor => self.n_c(),
            StreamGauge::Boundary => self.num_cells(),
        }
    }
}

fn sources(values: &[f64], areas: &[f64], limit: usize, tol: f64) -> Vec<usize> {
    let mut hits: Vec<(usize, f64)> = (0..limit).map(|k| (k, (values[k] * areas[k]).abs())).filter(|&(_, v)| v > tol).collect();
    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.into_iter().take(8).map(|(k, _)| k).collect()
}

/// Potential of a discretely curl-free `u`, shifted to zero mean.
pub fn integrate_potential<'m>(u: &EdgeField<'m>) -> Result<CellField<'m>> {
    let mesh = u.mesh();
    let phi = integrate_cells(mesh, u.values(), |_| true, |_| false, CYCLE_TOL * (1.0 + u.norm()))?;
    let mut f = CellField::from_index_fn(mesh, |k| phi[k]);
    f.remove_mean();
    Ok(f)
}

/// Breadth-first integration of `u_e d_e = -sum phi_i n_{e,i}` from cell 0.
///
/// Edges accepted by `checked` form the graph and every one of them that is
/// left out of the spanning tree must close within `tol`. Cells that cannot
/// be reached that way are attached through `fallback` edges without checks.
fn integrate_cells(
    mesh: &StaggeredMesh,
    u: &[f64],
    checked: impl Fn(usize) -> bool,
    fallback: impl Fn(usize) -> bool,
    tol: f64,
) -> Result<Vec<f64>> {
    let nc = mesh.num_cells();
    let mut phi = vec![0.0; nc];
    let mut seen = vec![false; nc];
    let mut tree = vec![false; mesh.num_edges()];
    let mut queue = VecDeque::new();
    if nc == 0 {
        return Ok(phi);
    }
    seen[0] = true;
    queue.push_back(0);
    let step = |e: usize, a: usize, phi: &[f64]| -> Option<(usize, f64)> {
        match mesh.ce(e) {
            [p, q] => {
                let (ca, cb) = if p.index == a { (p, q) } else { (q, p) };
                Some((cb.index, (-u[e] * mesh.edge(e).d - phi[a] * ca.s()) / cb.s()))
            }
            _ => None,
        }
    };
    loop {
        while let Some(a) = queue.pop_front() {
            for &e in mesh.ec(a) {
                if !checked(e) {
                    continue;
                }
                if let Some((b, value)) = step(e, a, &phi) {
                    if !seen[b] {
                        seen[b] = true;
                        tree[e] = true;
                        phi[b] = value;
                        queue.push_back(b);
                    }
                }
            }
        }
        // attach one unreached cell through the lowest fallback edge
        let link = (0..mesh.num_edges()).filter(|&e| fallback(e)).find_map(|e| match mesh.ce(e) {
            [p, q] if seen[p.index] != seen[q.index] => Some((e, if seen[p.index] { p.index } else { q.index })),
            _ => None,
        });
        match link {
            Some((e, a)) => {
                let (b, value) = step(e, a, &phi).expect("two cells");
                seen[b] = true;
                tree[e] = true;
                phi[b] = value;
                queue.push_back(b);
            }
            None => break,
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidMesh(format!("primary cell {i} is unreachable")));
    }
    for e in 0..mesh.num_edges() {
        if tree[e] || !checked(e) || mesh.ce(e).len() != 2 {
            continue;
        }
        let edge = mesh.edge(e);
        let g = -edge.cells.iter().map(|c| phi[c.index] * c.s()).sum::<f64>() / edge.d;
        let residual = (g - u[e]).abs();
        if residual > tol {
            let field = EdgeField::from_index_fn(mesh, |k| if checked(k) { u[k] } else { 0.0 });
            let c = operators::curl(&field);
            let interior: Vec<usize> = {
                let flags = mesh.boundary_dual_flags();
                let mut v: Vec<f64> = c.values().to_vec();
                for (k, f) in flags.iter().enumerate() {
                    if *f && (0..mesh.num_edges()).any(|x| !checked(x) && mesh.ev(k).contains(&x)) {
                        v[k] = 0.0;
                    }
                }
                sources(&v, mesh.dual_areas(), mesh.n_v(), tol * mesh.h())
            };
            return Err(Error::CycleMismatch { what: "potential", edge: e, residual, sources: interior });
        }
    }
    Ok(phi)
}

/// Function space for [`poincare_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Zero-mean primary-cell fields, semi-norm `|grad phi|`.
    Cell,
    /// Dual-cell fields, semi-norm `|skew_grad psi|`.
    Vertex,
    /// Edge fields, semi-norm `sqrt(|div u|^2 + |curl u|^2)`.
    Edge,
}

/// Largest ratio `|x|_0 / |x|_1` over the space, by inverse power iteration.
pub fn poincare_constant(kind: SpaceKind, mesh: &StaggeredMesh) -> Result<f64> {
    let (k, m, constraint): (CsrMatrix, Vec<f64>, Option<Constraint>) = match kind {
        SpaceKind::Cell => (cell_stiffness(mesh).clone(), mesh.cell_areas().to_vec(), Some(Constraint::zero_mean(mesh.cell_areas()))),
        SpaceKind::Vertex => (vertex_stiffness(mesh).clone(), mesh.dual_areas().to_vec(), None),
        SpaceKind::Edge => {
            let a = operators::assembled(mesh);
            let dd = a.div.transpose().matmul(&a.div.scale_rows(mesh.cell_areas()));
            let cc = a.curl.transpose().matmul(&a.curl.scale_rows(mesh.dual_areas()));
            let t: Vec<_> = dd.triplets().into_iter().chain(cc.triplets()).collect();
            (CsrMatrix::from_triplets(dd.nrows(), dd.ncols(), &t), mesh.diamond_areas().to_vec(), None)
        }
    };
    let lambda = smallest_eigenvalue(&k, &m, constraint)?;
    Ok(1.0 / lambda.sqrt())
}

/// Smallest eigenvalue of `K x = lambda M x` (M diagonal), restricted to
/// `weights . x = 0` when a constraint is given.
fn smallest_eigenvalue(k: &CsrMatrix, m: &[f64], constraint: Option<Constraint>) -> Result<f64> {
    const MAX_STEPS: usize = 500;
    const REL_TOL: f64 = 1e-9;
    let n = k.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
    let mut x: Vec<f64> = (0..n).map(|_| 1.0 + 0.1 * rng.random_range(-1.0..1.0)).collect();
    let project = |x: &mut Vec<f64>| {
        if let Some(c) = &constraint {
            let s = c.weights.iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>() / c.weights.iter().sum::<f64>();
            x.iter_mut().for_each(|v| *v -= s);
        }
    };
    project(&mut x);
    let rayleigh = |x: &[f64]| {
        let kx = k.mul_vec(x);
        let num: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().zip(m).map(|(a, w)| w * a * a).sum();
        num / den
    };
    let mut history = Vec::new();
    let mut lambda = rayleigh(&x);
    for _ in 0..MAX_STEPS {
        let rhs: Vec<f64> = x.iter().zip(m).map(|(a, w)| w * a).collect();
        let mut sys = SparseSystem::new(k, rhs).with_tol(1e-11);
        if let Some(c) = &constraint {
            sys = sys.with_constraint(c.clone());
        }
        let (mut y, _) = solve_cg(&sys)?;
        project(&mut y);
        let scale = y.iter().zip(m).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= scale);
        let next = rayleigh(&y);
        history.push(next);
        x = y;
        if (next - lambda).abs() <= REL_TOL * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::Stagnation { iterations: MAX_STEPS, history })
}
