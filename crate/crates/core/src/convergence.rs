//! Refinement studies: mesh families, observed orders, and CSV records for
//! the Stokes scheme and the C1 consistency of the restrictions.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::approximation::{c1_error, cell_averages, dual_averages, Restriction, SmoothVectorField};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::SolveOptions;
use crate::mesh::{build_quad_mesh, build_tri_hex_mesh, build_voronoi_mesh, ConvexDomain, Rect, StaggeredMesh};
use crate::operators::curl;
use crate::stokes::{discretize_forcing, interior_norm, solve_stokes_with};

/// A family of meshes indexed by one size parameter per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    /// `n x n` lattice on the unit square.
    Quad,
    /// Tri-hex mesh at the given refinement.
    TriHex,
    /// Lloyd-relaxed Voronoi mesh of the unit square with the given seed count.
    Voronoi { lloyd_iters: usize, seed: u64 },
}

impl MeshFamily {
    pub fn build(&self, level: usize) -> Result<StaggeredMesh> {
        match *self {
            MeshFamily::Quad => build_quad_mesh(level, level, Rect::unit()),
            MeshFamily::TriHex => build_tri_hex_mesh(u32::try_from(level).map_err(|_| Error::InvalidInput(format!("refinement {level} out of range")))?),
            MeshFamily::Voronoi { lloyd_iters, seed } => build_voronoi_mesh(level, &ConvexDomain::unit_square(), lloyd_iters, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Quad => "quad",
            MeshFamily::TriHex => "trihex",
            MeshFamily::Voronoi { .. } => "voronoi",
        }
    }
}

impl FromStr for MeshFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" => Ok(MeshFamily::Quad),
            "trihex" | "tri-hex" => Ok(MeshFamily::TriHex),
            "voronoi" => Ok(MeshFamily::Voronoi { lloyd_iters: 10, seed: 0 }),
            other => Err(Error::InvalidInput(format!("unknown mesh family '{other}' (quad, trihex, voronoi)"))),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive levels; the
/// first entry is `None`. A zero error on either side gives `None`.
pub fn observed_orders(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; h.len().min(e.len())];
    for k in 1..out.len() {
        if e[k - 1] > 0.0 && e[k] > 0.0 && h[k - 1] != h[k] {
            out[k] = Some((e[k - 1] / e[k]).ln() / (h[k - 1] / h[k]).ln());
        }
    }
    out
}

/// Full-precision float for CSV output.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_order(o: Option<f64>) -> String {
    o.map(csv_float).unwrap_or_else(|| "nan".into())
}

/// One level of a Stokes refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub e_psi: f64,
    pub e_omega: f64,
    pub order_psi: Option<f64>,
    pub order_omega: Option<f64>,
    pub energy_lhs: f64,
    pub energy_rhs: f64,
    pub cg_iters: usize,
    /// Reported only; no rate is claimed for the pressure.
    pub e_p: f64,
    /// Max over interior edges.
    pub momentum_residual: f64,
    /// Diamond-weighted norm over interior edges, relative to `1 + |f|`.
    pub momentum_residual_weighted: f64,
}

pub const STOKES_CSV_HEADER: &str = "level,h,e_psi,e_omega,order_psi,order_omega,energy_lhs,energy_rhs,cg_iters";

pub fn stokes_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from(STOKES_CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.level,
            csv_float(r.h),
            csv_float(r.e_psi),
            csv_float(r.e_omega),
            csv_order(r.order_psi),
            csv_order(r.order_omega),
            csv_float(r.energy_lhs),
            csv_float(r.energy_rhs),
            r.cg_iters
        );
    }
    s
}

/// Manufactured Stokes problem: exact stream, its Laplacian, and pressure.
pub struct StokesExact {
    pub psi: Box<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub laplacian_psi: Box<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub p: Box<dyn Fn(&Point) -> f64 + Send + Sync>,
}

impl StokesExact {
    /// `psi = (x (1 - x) y (1 - y))^2`, `p = x^3 - 1/4`.
    pub fn bubble() -> Self {
        use crate::approximation::bubble;
        StokesExact { psi: Box::new(bubble::psi), laplacian_psi: Box::new(bubble::laplacian), p: Box::new(|q: &Point| q.x.powi(3) - 0.25) }
    }

    pub fn zero() -> Self {
        StokesExact { psi: Box::new(|_| 0.0), laplacian_psi: Box::new(|_| 0.0), p: Box::new(|_| 0.0) }
    }
}

/// Solve with forcing `psi_f = -laplacian(psi)`, `phi_f = p` on every level
/// and compare `(psi_h, curl u_h)` with the dual-cell averages of
/// `(psi, laplacian psi)`. Levels run in parallel.
pub fn stokes_study(exact: &StokesExact, family: MeshFamily, levels: &[usize], opts: &SolveOptions) -> Result<Vec<ConvergenceRecord>> {
    let mut records: Vec<ConvergenceRecord> = levels
        .par_iter()
        .map(|&level| -> Result<ConvergenceRecord> {
            let mesh = family.build(level)?;
            let forcing = discretize_forcing(|x| -(exact.laplacian_psi)(x), |x| (exact.p)(x), &mesh);
            let sol = solve_stokes_with(&forcing, opts)?;
            let psi = dual_averages(&mesh, |x| (exact.psi)(x));
            let omega = dual_averages(&mesh, |x| (exact.laplacian_psi)(x));
            let mut p = cell_averages(&mesh, |x| (exact.p)(x));
            p.remove_mean();
            let (energy_lhs, energy_rhs) = sol.energy(&forcing);
            Ok(ConvergenceRecord {
                level,
                h: mesh.h(),
                e_psi: (&sol.psi - &psi).norm(),
                e_omega: (&curl(&sol.u) - &omega).norm(),
                order_psi: None,
                order_omega: None,
                energy_lhs,
                energy_rhs,
                cg_iters: sol.stats.iterations,
                e_p: (&sol.p - &p).norm(),
                momentum_residual: sol.momentum_residual(&forcing),
                momentum_residual_weighted: sol.momentum_residual_weighted(&forcing) / (1.0 + interior_norm(&forcing.f)),
            })
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let op = observed_orders(&h, &records.iter().map(|r| r.e_psi).collect::<Vec<_>>());
    let oo = observed_orders(&h, &records.iter().map(|r| r.e_omega).collect::<Vec<_>>());
    for (r, (a, b)) in records.iter_mut().zip(op.into_iter().zip(oo)) {
        r.order_psi = a;
        r.order_omega = b;
    }
    Ok(records)
}

/// One level of a C1 study.
#[derive(Debug, Clone, PartialEq)]
pub struct C1Record {
    pub level: usize,
    pub h: f64,
    pub error: f64,
    pub observed_order: Option<f64>,
}

pub const C1_CSV_HEADER: &str = "h,error,observed_order";

pub fn c1_csv(records: &[C1Record]) -> String {
    let mut s = String::from(C1_CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{}", csv_float(r.h), csv_float(r.error), csv_order(r.observed_order));
    }
    s
}

pub fn c1_study(u: &SmoothVectorField, restriction: Restriction, family: MeshFamily, levels: &[usize]) -> Result<Vec<C1Record>> {
    let mut records: Vec<C1Record> = levels
        .par_iter()
        .map(|&level| {
            let mesh = family.build(level)?;
            Ok(C1Record { level, h: mesh.h(), error: c1_error(u, restriction, &mesh)?, observed_order: None })
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let e: Vec<f64> = records.iter().map(|r| r.error).collect();
    for (r, o) in records.iter_mut().zip(observed_orders(&h, &e)) {
        r.observed_order = o;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_a_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        let o = observed_orders(&h, &e);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((o[2].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(observed_orders(&[0.1, 0.05], &[0.0, 0.0]), vec![None, None]);
    }

    #[test]
    fn zero_problem_has_zero_errors() {
        let r = stokes_study(&StokesExact::zero(), MeshFamily::Quad, &[4, 8], &SolveOptions::default()).unwrap();
        assert!(r.iter().all(|x| x.e_psi == 0.0 && x.e_omega == 0.0 && x.e_p == 0.0));
        let csv = stokes_csv(&r);
        assert!(csv.starts_with(STOKES_CSV_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("quad".parse::<MeshFamily>().unwrap(), MeshFamily::Quad);
        assert!("hex".parse::<MeshFamily>().is_err());
    }

    #[test]
    fn bubble_study_converges() {
        let r = stokes_study(&StokesExact::bubble(), MeshFamily::Quad, &[8, 16, 32], &SolveOptions::default()).unwrap();
        for x in &r {
            assert!(x.energy_lhs <= x.energy_rhs * (1.0 + 1e-10));
        }
        assert!(r[2].e_psi < r[1].e_psi && r[1].e_psi < r[0].e_psi);
        assert!(r[2].order_omega.unwrap() >= 1.0, "{r:?}");
    }
}
