use super::{build_from_dual, DualTessellation, StaggeredMesh};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate rectangle [{x0}, {x1}] x [{y0}, {y1}]")));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn unit() -> Self {
        Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> Vec<Point> {
        vec![
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }
}

/// MAC layout: primary centers on the `(nx+1) x (ny+1)` lattice points
/// (boundary ones sit on the domain boundary), dual cells are the lattice
/// squares.
pub fn build_quad_mesh(nx: usize, ny: usize, domain: Rect) -> Result<StaggeredMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!("quad mesh needs nx, ny >= 2 (got {nx} x {ny})")));
    }
    let dx = (domain.x1 - domain.x0) / nx as f64;
    let dy = (domain.y1 - domain.y0) / ny as f64;
    let coord = |i: usize, n: usize, lo: f64, hi: f64, step: f64| if i == n { hi } else { lo + i as f64 * step };
    let mut primary_centers = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            primary_centers.push(Point::new(coord(i, nx, domain.x0, domain.x1, dx), coord(j, ny, domain.y0, domain.y1, dy)));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut dual_centers = Vec::with_capacity(nx * ny);
    let mut dual_cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let poly = vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let c = poly.iter().map(|&k| primary_centers[k]).sum::<Point>() / 4.0;
            dual_centers.push(c);
            dual_cells.push(poly);
        }
    }
    build_from_dual(DualTessellation { primary_centers, dual_centers, dual_cells, h: dx.max(dy) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_counts() {
        let m = build_quad_mesh(2, 2, Rect::unit()).unwrap();
        assert_eq!((m.n_c(), m.n_cb(), m.n_v()), (1, 8, 4));
        assert_eq!(m.n_e() + m.n_eb(), 12);
        assert_eq!(m.euler_residual(), 0);
        assert_eq!(m.n_e(), 4);
        // boundary dual edges stop at the domain boundary
        for (k, e) in m.edges().iter().enumerate() {
            assert_eq!(e.l, if m.is_boundary_edge(k) { 0.25 } else { 0.5 });
            assert_eq!(e.d, 0.5);
        }
        assert_eq!(m.primary_cells()[0].area, 0.25);
        let total: f64 = m.cell_areas().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_thin_lattices() {
        assert!(build_quad_mesh(1, 4, Rect::unit()).is_err());
        assert!(build_quad_mesh(4, 1, Rect::unit()).is_err());
    }

    #[test]
    fn euler_on_sixteen() {
        let m = build_quad_mesh(16, 16, Rect::unit()).unwrap();
        assert_eq!(m.euler_residual(), 0);
        assert_eq!(m.n_c(), 15 * 15);
    }

    #[test]
    fn interior_indicators_cancel() {
        let m = build_quad_mesh(5, 3, Rect::new(0.0, 0.0, 2.0, 1.0).unwrap()).unwrap();
        for e in 0..m.n_e() {
            let c = m.ce(e);
            let v = m.ve(e);
            assert_eq!(c[0].sign + c[1].sign, 0);
            assert_eq!(v[0].sign + v[1].sign, 0);
        }
    }
}
