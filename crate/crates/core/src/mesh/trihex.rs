//! Equilateral triangles with equiangular, non-uniform hexagonal duals.
//!
//! The triangular lattice `a1 = (s, 0)`, `a2 = (s/2, s*sqrt(3)/2)` is
//! 3-colored by `(i - j) mod 3`. Each triangle has exactly one vertex of
//! color 0, its apex `A`; the triangle's center is placed on the median
//! from `A` at `A + lambda (mid(BC) - A)`. With `lambda = 4/9` every dual
//! edge (joining two triangle centers) is perpendicular to the triangle
//! side it crosses, is bisected by it, and crosses that side at its
//! midpoint or at one third of its length. The hexagons around color-0
//! vertices are regular; the others have sides alternating between two
//! lengths, so all are equiangular.
//!
//! Dual cells are the hexagons around the lattice points `(i, j)`,
//! `0 <= i, j <= n` with `n = 3 * 2^refinement` and `s = 1/n`, so the domain is a
//! unit rhombus with a zig-zag margin through the outer triangle centers.

use std::collections::HashMap;

use super::{build_from_dual, DualTessellation, StaggeredMesh};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const TRIHEX_LAMBDA: f64 = 4.0 / 9.0;

const NEIGHBORS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

pub fn build_tri_hex_mesh(refinement: u32) -> Result<StaggeredMesh> {
    if refinement < 1 {
        return Err(Error::InvalidInput("tri-hex refinement must be >= 1".into()));
    }
    if refinement > 12 {
        return Err(Error::InvalidInput(format!("tri-hex refinement {refinement} is too large")));
    }
    let n = 3i64 << refinement;
    let s = 1.0 / n as f64;
    let h3 = 3f64.sqrt() / 2.0;
    let lattice = |i: i64, j: i64| Point::new((i as f64 + 0.5 * j as f64) * s, j as f64 * h3 * s);

    let mut tri_index: HashMap<[(i64, i64); 3], usize> = HashMap::new();
    let mut primary_centers = Vec::new();
    let mut dual_centers = Vec::new();
    let mut dual_cells = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let mut poly = Vec::with_capacity(6);
            for k in 0..6 {
                let (a, b) = (NEIGHBORS[k], NEIGHBORS[(k + 1) % 6]);
                let mut tri = [(i, j), (i + a.0, j + a.1), (i + b.0, j + b.1)];
                tri.sort_unstable();
                let idx = *tri_index.entry(tri).or_insert_with(|| {
                    let apex = *tri.iter().find(|v| (v.0 - v.1).rem_euclid(3) == 0).expect("3-coloring");
                    let others: Vec<Point> = tri.iter().filter(|v| **v != apex).map(|v| lattice(v.0, v.1)).collect();
                    let pa = lattice(apex.0, apex.1);
                    let mid = (others[0] + others[1]) * 0.5;
                    primary_centers.push(pa + (mid - pa) * TRIHEX_LAMBDA);
                    primary_centers.len() - 1
                });
                poly.push(idx);
            }
            dual_centers.push(lattice(i, j));
            dual_cells.push(poly);
        }
    }
    build_from_dual(DualTessellation { primary_centers, dual_centers, dual_cells, h: s })
}
