use std::collections::HashMap;
use std::fmt;

use super::StaggeredMesh;
use crate::geometry::{perp, segment_parameter};

/// Findings of [`validate`]. Nothing here panics or returns an error; a
/// broken mesh shows up as failed checks and issue strings.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub euler_residual: i64,
    pub connectivity_ok: bool,
    pub indicators_ok: bool,
    pub issues: Vec<String>,
    /// Per edge: max of |sin| between n_e and the dual edge and |cos| between n_e and the primary edge.
    pub orthogonality_defect: Vec<f64>,
    pub max_orthogonality_defect: f64,
    /// Per edge: the crossing point lies strictly inside both segments.
    pub convex: Vec<bool>,
    pub non_convex_count: usize,
    /// Realized quasi-uniformity constants: m h <= l_e, d_e <= M h.
    pub m: f64,
    pub big_m: f64,
    /// max over edges of the crossing offset from the segment midpoints.
    pub bisection_defect: f64,
    pub bisection_ratio: f64,
    pub cell_area_sum: f64,
    pub dual_area_sum: f64,
    pub diamond_area_sum: f64,
    pub min_cell_area: f64,
    pub min_dual_area: f64,
}

impl ValidationReport {
    /// Structural and geometric soundness: everything except the
    /// quasi-uniformity and bisection figures, which are informational.
    pub fn is_valid(&self) -> bool {
        self.euler_residual == 0
            && self.connectivity_ok
            && self.indicators_ok
            && self.min_cell_area > 0.0
            && self.min_dual_area > 0.0
            && self.area_mismatch() <= 1e-10
    }

    /// Relative disagreement between the primary and dual area sums.
    pub fn area_mismatch(&self) -> f64 {
        (self.cell_area_sum - self.dual_area_sum).abs() / self.dual_area_sum.abs().max(f64::MIN_POSITIVE)
    }

    pub fn first_issue(&self) -> Option<&str> {
        self.issues.first().map(|s| s.as_str())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = |b: bool| if b { "ok" } else { "FAIL" };
        writeln!(f, "euler residual        {}", self.euler_residual)?;
        writeln!(f, "connectivity          {}", ok(self.connectivity_ok))?;
        writeln!(f, "indicators            {}", ok(self.indicators_ok))?;
        writeln!(f, "orthogonality defect  {:.5e}", self.max_orthogonality_defect)?;
        writeln!(f, "non-convex diamonds   {}", self.non_convex_count)?;
        writeln!(f, "quasi-uniformity m, M {:.6} {:.6}", self.m, self.big_m)?;
        writeln!(f, "bisection defect      {:.5e} (defect/h^2 = {:.5e})", self.bisection_defect, self.bisection_ratio)?;
        writeln!(f, "area sums             {:.6} {:.6} {:.6}", self.cell_area_sum, self.dual_area_sum, self.diamond_area_sum)?;
        for issue in self.issues.iter().take(10) {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

pub fn validate(mesh: &StaggeredMesh) -> ValidationReport {
    let mut issues = Vec::new();
    let mut connectivity_ok = true;
    let mut indicators_ok = true;
    let h = mesh.h();
    let prim = mesh.primary_cells();
    let dual = mesh.dual_cells();

    // connectivity: symmetry of the incidence lists
    for e in 0..mesh.num_edges() {
        let interior = !mesh.is_boundary_edge(e);
        let (nc, nv) = (mesh.ce(e).len(), mesh.ve(e).len());
        if (interior && (nc != 2 || nv != 2)) || (!interior && (nv != 1 || nc == 0 || nc > 2)) {
            connectivity_ok = false;
            issues.push(format!("edge {e}: |CE| = {nc}, |VE| = {nv}"));
        }
        for c in mesh.ce(e) {
            if !mesh.ec(c.index).contains(&e) {
                connectivity_ok = false;
                issues.push(format!("edge {e} lists cell {} but EC({}) lacks it", c.index, c.index));
            }
        }
        for v in mesh.ve(e) {
            if !mesh.ev(v.index).contains(&e) {
                connectivity_ok = false;
                issues.push(format!("edge {e} lists dual cell {} but EV({}) lacks it", v.index, v.index));
            }
        }
    }
    for i in 0..mesh.num_cells() {
        for &e in mesh.ec(i) {
            if !mesh.ce(e).iter().any(|c| c.index == i) {
                connectivity_ok = false;
                issues.push(format!("EC({i}) lists edge {e} which does not list the cell"));
            }
        }
        if prim[i].is_boundary != (i >= mesh.n_c()) {
            connectivity_ok = false;
            issues.push(format!("primary cell {i}: boundary flag breaks interior-first ordering"));
        }
    }
    // every dual cell is a closed loop of dual edges
    for nu in 0..mesh.n_v() {
        let mut hits: HashMap<usize, usize> = HashMap::new();
        for &e in mesh.ev(nu) {
            for c in mesh.ce(e) {
                *hits.entry(c.index).or_default() += 1;
            }
        }
        if let Some((&i, _)) = hits.iter().filter(|(_, &k)| k != 2).min_by_key(|(&i, _)| i) {
            connectivity_ok = false;
            issues.push(format!("dual cell {nu} is not closed at primary center {i}"));
        }
    }
    // interior primary cells are closed loops of primary edges
    for i in 0..mesh.n_c() {
        let mut hits: HashMap<usize, usize> = HashMap::new();
        for &e in mesh.ec(i) {
            for v in mesh.ve(e) {
                *hits.entry(v.index).or_default() += 1;
            }
        }
        if let Some((&nu, _)) = hits.iter().filter(|(_, &k)| k != 2).min_by_key(|(&nu, _)| nu) {
            connectivity_ok = false;
            issues.push(format!("interior primary cell {i} is not closed at dual center {nu}"));
        }
    }

    let ne = mesh.num_edges();
    let mut orth = vec![0.0; ne];
    let mut convex = vec![true; ne];
    let mut lmin = f64::INFINITY;
    let mut lmax: f64 = 0.0;
    let mut bisection: f64 = 0.0;
    for e in 0..ne {
        let edge = mesh.edge(e);
        let n = edge.normal;
        if (n.norm() - 1.0).abs() > 1e-14 {
            indicators_ok = false;
            issues.push(format!("edge {e}: |n| - 1 = {:.3e}", n.norm() - 1.0));
        }
        if edge.tangent != perp(&n) {
            indicators_ok = false;
            issues.push(format!("edge {e}: t is not k x n"));
        }
        let cells = mesh.ce(e);
        let verts = mesh.ve(e);
        if cells.len() == 2 && cells[0].sign + cells[1].sign != 0 {
            indicators_ok = false;
            issues.push(format!("edge {e}: n-indicators sum to {}", cells[0].sign + cells[1].sign));
        }
        if verts.len() == 2 && verts[0].sign + verts[1].sign != 0 {
            indicators_ok = false;
            issues.push(format!("edge {e}: t-indicators sum to {}", verts[0].sign + verts[1].sign));
        }
        if cells.len() == 2 {
            for (a, b) in [(cells[0], cells[1]), (cells[1], cells[0])] {
                let away = (prim[b.index].center - prim[a.index].center).dot(&n) * a.s();
                if away <= 0.0 {
                    indicators_ok = false;
                    issues.push(format!("edge {e}: n-indicator of cell {} disagrees with geometry", a.index));
                }
            }
        }
        for v in verts {
            let target = match verts {
                [a, b] => if a.index == v.index { dual[b.index].center } else { dual[a.index].center },
                _ => edge.intersection,
            };
            if (target - dual[v.index].center).dot(&edge.tangent) * v.s() <= 0.0 {
                indicators_ok = false;
                issues.push(format!("edge {e}: t-indicator of dual cell {} disagrees with geometry", v.index));
            }
        }

        let (pa, pb) = mesh.primary_edge_endpoints(e);
        let (da, db) = mesh.dual_edge_endpoints(e);
        let mut defect: f64 = 0.0;
        if (db - da).norm() > 0.0 {
            let dir = (db - da).normalize();
            defect = defect.max((n.x * dir.y - n.y * dir.x).abs());
        }
        if verts.len() == 2 && (pb - pa).norm() > 0.0 {
            defect = defect.max(n.dot(&(pb - pa).normalize()).abs());
        }
        orth[e] = defect;

        let beta = segment_parameter(&edge.intersection, &da, &db);
        let mut inside = beta > 0.0 && beta < 1.0 && edge.l > 0.0;
        let mut offset = (beta - 0.5).abs() * edge.d;
        if verts.len() == 2 {
            let alpha = segment_parameter(&edge.intersection, &pa, &pb);
            inside &= alpha > 0.0 && alpha < 1.0;
            offset = offset.max((alpha - 0.5).abs() * edge.l);
        }
        convex[e] = inside;
        bisection = bisection.max(offset);
        lmin = lmin.min(edge.l.abs().min(edge.d.abs()));
        lmax = lmax.max(edge.l.abs().max(edge.d.abs()));
    }
    if mesh.euler_residual() != 0 {
        issues.insert(0, format!("Euler identity off by {}", mesh.euler_residual()));
    }
    let non_convex_count = convex.iter().filter(|c| !**c).count();
    let max_orth = orth.iter().cloned().fold(0.0, f64::max);
    ValidationReport {
        euler_residual: mesh.euler_residual(),
        connectivity_ok,
        indicators_ok,
        issues,
        orthogonality_defect: orth,
        max_orthogonality_defect: max_orth,
        convex,
        non_convex_count,
        m: lmin / h,
        big_m: lmax / h,
        bisection_defect: bisection,
        bisection_ratio: bisection / (h * h),
        cell_area_sum: mesh.cell_areas().iter().sum(),
        dual_area_sum: mesh.dual_areas().iter().sum(),
        diamond_area_sum: mesh.diamond_areas().iter().sum(),
        min_cell_area: mesh.cell_areas().iter().cloned().fold(f64::INFINITY, f64::min),
        min_dual_area: mesh.dual_areas().iter().cloned().fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_quad_mesh, build_tri_hex_mesh, Rect, StaggeredMesh};

    #[test]
    fn quad_is_clean() {
        let r = validate(&build_quad_mesh(6, 4, Rect::unit()).unwrap());
        assert!(r.is_valid(), "{r}");
        assert!(r.bisection_defect < 1e-15);
        assert_eq!(r.non_convex_count, 0);
        assert!((r.cell_area_sum - 1.0).abs() < 1e-14);
        assert!((r.diamond_area_sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trihex_third_point_defect() {
        for r in 1..=3 {
            let m = build_tri_hex_mesh(r).unwrap();
            let rep = validate(&m);
            assert!(rep.is_valid(), "{rep}");
            assert_eq!(rep.non_convex_count, 0);
            // triangle side is h, so l_e / 6 = h / 6
            assert!((rep.bisection_defect - m.h() / 6.0).abs() < 1e-12);
            assert!((rep.bisection_ratio - 1.0 / (6.0 * m.h())).abs() < 1e-6 / m.h());
            assert!(rep.max_orthogonality_defect < 1e-12);
        }
    }

    #[test]
    fn flipped_indicator_is_caught() {
        let mut parts = build_quad_mesh(3, 3, Rect::unit()).unwrap().into_parts();
        parts.edges[0].cells[0].sign *= -1;
        let m = StaggeredMesh::from_parts_unchecked(parts).unwrap();
        let r = validate(&m);
        assert!(!r.indicators_ok);
        assert!(!r.is_valid());
        assert!(r.first_issue().unwrap().contains("edge 0"));
    }
}
