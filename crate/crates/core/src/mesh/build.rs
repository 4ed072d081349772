//! Generic construction of a staggered mesh from its dual tessellation.

use std::collections::HashMap;

use super::{DualCell, EdgePair, Incidence, MeshParts, PrimaryCell, StaggeredMesh};
use crate::error::{Error, Result};
use crate::geometry::{line_intersection, perp, project_on_line, signed_area, Point};

/// Fixed reference direction used to orient normals deterministically.
const ORIENTATION: (f64, f64) = (1.0, 0.3);

/// Dual cells given as counter-clockwise polygons over primary centers.
///
/// The domain is the union of the dual cells. A dual edge shared by two
/// dual cells is interior; an edge owned by a single dual cell lies on the
/// boundary, and its two endpoints are boundary primary cells.
#[derive(Debug, Clone)]
pub struct DualTessellation {
    pub primary_centers: Vec<Point>,
    pub dual_centers: Vec<Point>,
    pub dual_cells: Vec<Vec<usize>>,
    pub h: f64,
}

struct RawEdge {
    a: usize,
    b: usize,
    /// (dual cell, whether its ccw walk runs a -> b)
    owners: Vec<(usize, bool)>,
}

pub fn build_from_dual(t: DualTessellation) -> Result<StaggeredMesh> {
    let np = t.primary_centers.len();
    if t.dual_cells.len() != t.dual_centers.len() {
        return Err(Error::InvalidInput("one center per dual cell required".into()));
    }
    let mut raw: Vec<RawEdge> = Vec::new();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    for (nu, poly) in t.dual_cells.iter().enumerate() {
        if poly.len() < 3 {
            return Err(Error::InvalidInput(format!("dual cell {nu} has fewer than 3 vertices")));
        }
        let pts: Vec<Point> = poly.iter().map(|&i| t.primary_centers[i]).collect();
        if signed_area(&pts) <= 0.0 {
            return Err(Error::InvalidInput(format!("dual cell {nu} is not counter-clockwise")));
        }
        for k in 0..poly.len() {
            let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
            if p >= np || q >= np {
                return Err(Error::InvalidInput(format!("dual cell {nu} references missing primary center")));
            }
            let key = (p.min(q), p.max(q));
            let idx = *lookup.entry(key).or_insert_with(|| {
                raw.push(RawEdge { a: key.0, b: key.1, owners: Vec::new() });
                raw.len() - 1
            });
            raw[idx].owners.push((nu, p == key.0));
        }
    }
    if let Some(r) = raw.iter().find(|r| r.owners.len() > 2) {
        return Err(Error::InvalidInput(format!("dual edge ({}, {}) shared by more than two dual cells", r.a, r.b)));
    }

    let mut on_boundary = vec![false; np];
    let mut used = vec![false; np];
    for r in &raw {
        used[r.a] = true;
        used[r.b] = true;
        if r.owners.len() == 1 {
            on_boundary[r.a] = true;
            on_boundary[r.b] = true;
        }
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::InvalidInput(format!("primary center {i} belongs to no dual cell")));
    }
    let order: Vec<usize> = (0..np).filter(|&i| !on_boundary[i]).chain((0..np).filter(|&i| on_boundary[i])).collect();
    let n_c = order.iter().filter(|&&i| !on_boundary[i]).count();
    let mut new_index = vec![0; np];
    for (k, &i) in order.iter().enumerate() {
        new_index[i] = k;
    }
    let centers: Vec<Point> = order.iter().map(|&i| t.primary_centers[i]).collect();

    let edge_order: Vec<usize> =
        (0..raw.len()).filter(|&k| raw[k].owners.len() == 2).chain((0..raw.len()).filter(|&k| raw[k].owners.len() == 1)).collect();
    let n_e = raw.iter().filter(|r| r.owners.len() == 2).count();
    let reference = Point::new(ORIENTATION.0, ORIENTATION.1);

    let mut edges = Vec::with_capacity(raw.len());
    for &k in &edge_order {
        let r = &raw[k];
        let (i, j) = (new_index[r.a], new_index[r.b]);
        let (xi, xj) = (centers[i], centers[j]);
        let chord = xj - xi;
        let d = chord.norm();
        if d == 0.0 {
            return Err(Error::InvalidInput(format!("coincident primary centers {} and {}", r.a, r.b)));
        }
        let mut normal = chord / d;
        if normal.dot(&reference) < 0.0 {
            normal = -normal;
        }
        let tangent = perp(&normal);
        let si: i8 = if chord.dot(&normal) > 0.0 { 1 } else { -1 };
        let cells = vec![Incidence::new(i, si), Incidence::new(j, -si)];
        // walking a -> b along n means t points into the owner
        let along = chord.dot(&normal) > 0.0;
        let vertices: Vec<Incidence> = r
            .owners
            .iter()
            .map(|&(nu, forward)| {
                let runs_along_n = forward == along;
                Incidence::new(nu, if runs_along_n { -1 } else { 1 })
            })
            .collect();

        let (l, intersection) = if vertices.len() == 2 {
            let plus = vertices.iter().find(|v| v.sign == 1).unwrap().index;
            let minus = vertices.iter().find(|v| v.sign == -1).unwrap().index;
            let (xp, xm) = (t.dual_centers[plus], t.dual_centers[minus]);
            let p = line_intersection(&xi, &xj, &xp, &xm).unwrap_or((xp + xm) * 0.5);
            ((xm - xp).norm(), p)
        } else {
            let v = vertices[0];
            let xv = t.dual_centers[v.index];
            let foot = project_on_line(&xv, &xi, &xj);
            // signed: positive when the dual center is on the inner side
            let inward = -tangent * v.s();
            ((xv - foot).dot(&inward), foot)
        };
        edges.push(EdgePair { normal, tangent, l, d, diamond_area: 0.5 * l * d, intersection, cells, vertices });
    }

    let mut areas = vec![0.0; np];
    for edge in &edges {
        for c in &edge.cells {
            areas[c.index] += 0.5 * edge.l * (edge.intersection - centers[c.index]).dot(&edge.normal) * c.s();
        }
    }
    let primary = centers
        .iter()
        .enumerate()
        .map(|(k, &center)| PrimaryCell { center, area: areas[k], is_boundary: k >= n_c })
        .collect();
    let dual = t
        .dual_cells
        .iter()
        .zip(&t.dual_centers)
        .map(|(poly, &center)| {
            let pts: Vec<Point> = poly.iter().map(|&i| t.primary_centers[i]).collect();
            DualCell { center, area: signed_area(&pts) }
        })
        .collect();
    StaggeredMesh::from_parts(MeshParts { primary, dual, edges, n_c, n_e, h: t.h })
}
