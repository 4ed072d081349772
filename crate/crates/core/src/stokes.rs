//! MAC scheme for Stokes flow in vorticity form,
//! `-perp grad(curl u) + grad p = f`, `div u = 0`, `u = 0` on the boundary.
//!
//! Discrete velocities are `u_h = skew_grad(psi_h)` with `psi_h` zero on
//! every dual cell that touches the boundary; such fields are exactly the
//! divergence-free edge fields vanishing on boundary edges. Testing the
//! weak form against the same space gives the SPD biharmonic system
//!
//! ```text
//! (L psi, L chi)_v = -(psi_f, L chi)_v     for all admissible chi,   L = curl skew_grad
//! ```
//!
//! The potential part of the forcing drops out. Pressure is the discrete
//! potential of `g = f + skew_grad(curl u)`, whose interior curl vanishes
//! at a discrete solution.

use crate::error::{Error, Result};
use crate::fields::{CellField, EdgeField, VertexField};
use crate::geometry::Point;
use crate::linalg::{solve_cg, Constraint, CsrMatrix, SolveError, SolveOptions, SolveStats, SparseSystem};
use crate::mesh::StaggeredMesh;
use crate::approximation::{cell_averages, dual_averages};
use crate::operators::{self, curl, grad, skew_grad};

/// Tolerance on the momentum residual on interior edges, relative to `1 + max|f|`.
pub const MOMENTUM_TOL: f64 = 1e-9;

/// Forcing `f = perp grad psi_f + grad phi_f`, discretized by cell averages.
#[derive(Debug, Clone)]
pub struct StokesForcing<'m> {
    pub psi_f: VertexField<'m>,
    /// Zero area-weighted mean.
    pub phi_f: CellField<'m>,
    /// `skew_grad(psi_f) + grad(phi_f)`.
    pub f: EdgeField<'m>,
}

impl<'m> StokesForcing<'m> {
    pub fn new(psi_f: VertexField<'m>, mut phi_f: CellField<'m>) -> Result<Self> {
        if !psi_f.same_mesh(&phi_f) {
            return Err(Error::MeshMismatch);
        }
        phi_f.remove_mean();
        let f = &skew_grad(&psi_f) + &grad(&phi_f);
        Ok(StokesForcing { psi_f, phi_f, f })
    }

    pub fn zero(mesh: &'m StaggeredMesh) -> Self {
        Self::new(VertexField::zeros(mesh), CellField::zeros(mesh)).expect("same mesh")
    }

    pub fn mesh(&self) -> &'m StaggeredMesh {
        self.f.mesh()
    }
}

pub fn discretize_forcing<'m>(psi_f: impl Fn(&Point) -> f64, phi_f: impl Fn(&Point) -> f64, mesh: &'m StaggeredMesh) -> StokesForcing<'m> {
    StokesForcing::new(dual_averages(mesh, psi_f), cell_averages(mesh, phi_f)).expect("same mesh")
}

#[derive(Debug, Clone)]
pub struct StokesSolution<'m> {
    /// Divergence free, zero on boundary edges.
    pub u: EdgeField<'m>,
    pub psi: VertexField<'m>,
    /// Zero area-weighted mean.
    pub p: CellField<'m>,
    pub stats: SolveStats,
}

impl StokesSolution<'_> {
    /// `(|u_h|_1, |psi_f|_0)`; the first never exceeds the second.
    pub fn energy(&self, forcing: &StokesForcing) -> (f64, f64) {
        (crate::fields::semi_h1_edge(&self.u), forcing.psi_f.norm())
    }

    /// Max over interior edges of `|-skew_grad(curl u) + grad p - f|`.
    pub fn momentum_residual(&self, forcing: &StokesForcing) -> f64 {
        let mesh = self.u.mesh();
        let r = &(&grad(&self.p) - &skew_grad(&curl(&self.u))) - &forcing.f;
        r.values()[..mesh.n_e()].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Diamond-weighted norm of the same residual over interior edges.
    pub fn momentum_residual_weighted(&self, forcing: &StokesForcing) -> f64 {
        interior_norm(&(&(&grad(&self.p) - &skew_grad(&curl(&self.u))) - &forcing.f))
    }

    /// Max over interior dual cells `nu` of the weak-form residual tested
    /// against the indicator of `nu`.
    pub fn weak_residual(&self, forcing: &StokesForcing) -> f64 {
        let (k, b, interior) = biharmonic_system(forcing);
        let x: Vec<f64> = interior.iter().map(|&nu| self.psi[nu]).collect();
        let kx = k.mul_vec(&x);
        kx.iter().zip(&b).fold(0.0, |m, (a, c)| m.max((a - c).abs()))
    }
}

pub(crate) fn interior_duals(mesh: &StaggeredMesh) -> Vec<usize> {
    let flags = mesh.boundary_dual_flags();
    (0..mesh.n_v()).filter(|&k| !flags[k]).collect()
}

/// `K = P^T L^T W_v L P`, `b = -P^T L^T W_v psi_f` over the interior duals `P`.
fn biharmonic_system(forcing: &StokesForcing) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
    let mesh = forcing.mesh();
    let interior = interior_duals(mesh);
    let l = &operators::assembled(mesh).lap_vertex;
    let lp = l.select_columns(&interior);
    let k = lp.transpose().matmul(&lp.scale_rows(mesh.dual_areas()));
    let wpsi: Vec<f64> = forcing.psi_f.values().iter().zip(mesh.dual_areas()).map(|(v, a)| -v * a).collect();
    let b = lp.transpose().mul_vec(&wpsi);
    (k, b, interior)
}

pub fn solve_stokes<'m>(forcing: &StokesForcing<'m>) -> Result<StokesSolution<'m>> {
    solve_stokes_with(forcing, &SolveOptions::default())
}

pub fn solve_stokes_with<'m>(forcing: &StokesForcing<'m>, opts: &SolveOptions) -> Result<StokesSolution<'m>> {
    let mesh = forcing.mesh();
    let (k, b, interior) = biharmonic_system(forcing);
    let (x, stats) = if interior.is_empty() { (Vec::new(), SolveStats::default()) } else { solve_cg(&opts.apply(SparseSystem::new(&k, b)))? };
    let mut psi = VertexField::zeros(mesh);
    for (&nu, v) in interior.iter().zip(&x) {
        psi[nu] = *v;
    }
    let u = skew_grad(&psi);
    let p = recover_pressure(&u, forcing)?;
    Ok(StokesSolution { u, psi, p, stats })
}

/// Pressure from `grad p = f + skew_grad(curl u)` on interior edges.
///
/// `p` minimizes the diamond-weighted misfit over interior edges, so a few
/// very short edges cannot spoil it. Cells that interior edges cannot reach
/// (corner cells of a rectangle) are attached through a boundary edge. The
/// weighted misfit must stay below `MOMENTUM_TOL (1 + |f|)`; otherwise `u`
/// is not a discrete solution. The result has zero mean.
pub fn recover_pressure<'m>(u: &EdgeField<'m>, forcing: &StokesForcing<'m>) -> Result<CellField<'m>> {
    let mesh = u.mesh();
    if !u.same_mesh(&forcing.f) {
        return Err(Error::MeshMismatch);
    }
    let g = &forcing.f + &skew_grad(&curl(u));
    let phi = least_squares_potential(mesh, g.values())?;
    let mut p = CellField::from_index_fn(mesh, |i| phi[i]);
    p.remove_mean();
    let r = &g - &grad(&p);
    let misfit = interior_norm(&r);
    if misfit > MOMENTUM_TOL * (1.0 + interior_norm(&forcing.f)) {
        let rc = curl(&EdgeField::from_index_fn(mesh, |e| if e < mesh.n_e() { r[e] } else { 0.0 }));
        let worst = interior_duals(mesh).into_iter().max_by(|&a, &b| (rc[a].abs() * mesh.dual_areas()[a]).total_cmp(&(rc[b].abs() * mesh.dual_areas()[b])));
        let vertex = worst.unwrap_or(0);
        return Err(Error::PressureCurl { vertex, value: rc[vertex] });
    }
    Ok(p)
}

/// `sqrt(sum over interior edges of W_e v_e^2)`.
pub fn interior_norm(v: &EdgeField) -> f64 {
    let mesh = v.mesh();
    v.values()[..mesh.n_e()].iter().zip(mesh.diamond_areas()).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
}

/// Weighted least-squares potential of `g` over interior edges on the
/// component of cell 0, then path-extended to the remaining cells.
fn least_squares_potential(mesh: &StaggeredMesh, g: &[f64]) -> Result<Vec<f64>> {
    let (nc, n_e) = (mesh.num_cells(), mesh.n_e());
    let mut local = vec![usize::MAX; nc];
    let mut cells = Vec::new();
    if nc == 0 {
        return Ok(Vec::new());
    }
    local[0] = 0;
    cells.push(0);
    let mut k = 0;
    while k < cells.len() {
        for &e in mesh.ec(cells[k]) {
            if e >= n_e {
                continue;
            }
            for c in mesh.ce(e) {
                if local[c.index] == usize::MAX {
                    local[c.index] = cells.len();
                    cells.push(c.index);
                }
            }
        }
        k += 1;
    }
    let w = mesh.diamond_areas();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; cells.len()];
    for e in 0..n_e {
        let edge = mesh.edge(e);
        let rows: Vec<(usize, f64)> = edge.cells.iter().map(|c| (local[c.index], -c.s() / edge.d)).collect();
        if rows.iter().any(|(i, _)| *i == usize::MAX) {
            continue;
        }
        for &(i, a) in &rows {
            rhs[i] += w[e] * a * g[e];
            for &(j, b) in &rows {
                triplets.push((i, j, w[e] * a * b));
            }
        }
    }
    let mut phi = vec![0.0; nc];
    if cells.len() > 1 {
        let k = CsrMatrix::from_triplets(cells.len(), cells.len(), &triplets);
        let areas: Vec<f64> = cells.iter().map(|&i| mesh.cell_areas()[i]).collect();
        let sys = SparseSystem::new(&k, rhs).with_tol(1e-13).with_constraint(Constraint::zero_mean(&areas));
        let x = match solve_cg(&sys) {
            Ok((x, _)) => x,
            // the stagnated iterate is still the best available potential
            Err(SolveError::NotConverged { best, .. }) => best,
            Err(e) => return Err(e.into()),
        };
        for (&i, v) in cells.iter().zip(x) {
            phi[i] = v;
        }
    }
    let mut known: Vec<bool> = local.iter().map(|&i| i != usize::MAX).collect();
    // extend along interior edges first, boundary edges only when stuck
    loop {
        let next = (0..mesh.num_edges()).filter(|&e| mesh.ce(e).len() == 2).map(|e| (e >= n_e, e)).filter(|&(_, e)| {
            let c = mesh.ce(e);
            known[c[0].index] != known[c[1].index]
        });
        let Some((_, e)) = next.min() else { break };
        let c = mesh.ce(e);
        let (a, b) = if known[c[0].index] { (c[0], c[1]) } else { (c[1], c[0]) };
        phi[b.index] = (-g[e] * mesh.edge(e).d - phi[a.index] * a.s()) / b.s();
        known[b.index] = true;
    }
    match known.iter().position(|k| !k) {
        Some(i) => Err(Error::InvalidMesh(format!("primary cell {i} is unreachable"))),
        None => Ok(phi),
    }
}
