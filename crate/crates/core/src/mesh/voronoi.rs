//! Delaunay-Voronoi staggered meshes: Voronoi cells are the primary cells,
//! Delaunay triangles (with circumcenters as centers) the dual cells.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{build_from_dual, DualTessellation, Rect, StaggeredMesh};
use crate::error::{Error, Result};
use crate::geometry::{centroid, clip_halfplane, cross, distance_to_boundary, point_in_convex, signed_area, Point};

/// Seeds closer than this fraction of the nominal spacing to the boundary are rejected.
const BOUNDARY_MARGIN: f64 = 0.6;
/// Size of the symbolic perturbation, relative to h.
const PERTURBATION: f64 = 1e-12;
/// Hull triangles below this area (relative to h^2) are rounding slivers.
const FLAT_TRIANGLE: f64 = 1e-9;

/// Convex polygon, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    vertices: Vec<Point>,
}

impl ConvexDomain {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidInput("domain polygon needs at least 3 vertices".into()));
        }
        for k in 0..n {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            let c = vertices[(k + 2) % n];
            if cross(&(b - a), &(c - b)) <= 0.0 {
                return Err(Error::InvalidInput(format!("domain polygon is not strictly convex and counter-clockwise at vertex {}", (k + 1) % n)));
            }
        }
        Ok(ConvexDomain { vertices })
    }

    pub fn unit_square() -> Self {
        Self::from(Rect::unit())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|k| (self.vertices[(k + 1) % n] - self.vertices[k]).norm()).sum()
    }

    pub fn contains(&self, p: &Point) -> bool {
        point_in_convex(&self.vertices, p)
    }
}

impl From<Rect> for ConvexDomain {
    fn from(r: Rect) -> Self {
        ConvexDomain { vertices: r.corners() }
    }
}

/// Voronoi mesh with `seed_count` generators in total: the domain corners,
/// evenly spaced seeds along the sides and random interior seeds. Lloyd
/// relaxation moves interior seeds to the centroids of their clipped
/// Voronoi cells; boundary seeds stay put.
pub fn build_voronoi_mesh(seed_count: usize, domain: &ConvexDomain, lloyd_iters: usize, rng_seed: u64) -> Result<StaggeredMesh> {
    if seed_count < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 seeds (got {seed_count})")));
    }
    let corners = domain.vertices.len();
    if seed_count < corners {
        return Err(Error::InvalidInput(format!("need at least one seed per domain corner ({corners})")));
    }
    let area = domain.area();
    let perimeter = domain.perimeter();
    // spacing s with area/s^2 + perimeter/s = seed_count
    let inv_s = (-perimeter + (perimeter * perimeter + 4.0 * area * seed_count as f64).sqrt()) / (2.0 * area);
    let spacing = 1.0 / inv_s;
    let n_boundary = ((perimeter * inv_s).round() as usize).clamp(corners, seed_count);
    let mut seeds = boundary_seeds(domain, n_boundary);
    let n_fixed = seeds.len();

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (lo, hi) = bounding_box(&domain.vertices);
    let mut margin = BOUNDARY_MARGIN * spacing;
    let mut attempts = 0usize;
    while seeds.len() < seed_count {
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        attempts += 1;
        if attempts.is_multiple_of(10_000) {
            margin *= 0.5;
        }
        if domain.contains(&p) && distance_to_boundary(&domain.vertices, &p) >= margin && !encroaches(&seeds[..n_fixed], &p) {
            seeds.push(p);
        }
    }

    let h = (area / seed_count as f64).sqrt();
    for _ in 0..lloyd_iters {
        let tri = triangulate(&seeds)?;
        let neighbors = delaunay_neighbors(&tri, seeds.len());
        let moved: Vec<Point> = (n_fixed..seeds.len())
            .map(|k| {
                let cell = voronoi_cell(&domain.vertices, &seeds, k, &neighbors[k]);
                let c = if cell.len() >= 3 { centroid(&cell) } else { seeds[k] };
                if encroaches(&seeds[..n_fixed], &c) { seeds[k] } else { c }
            })
            .collect();
        seeds[n_fixed..].copy_from_slice(&moved);
    }
    perturb(&mut seeds[n_fixed..], PERTURBATION * h);
    tessellate(&seeds, h)
}

/// Voronoi mesh of the given points; the domain is their convex hull.
pub fn build_voronoi_mesh_from_points(points: &[Point]) -> Result<StaggeredMesh> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 points".into()));
    }
    let mut seeds = points.to_vec();
    let tri = triangulate(&seeds)?;
    let area: f64 = triangles(&tri).iter().map(|t| signed_area(&[seeds[t[0]], seeds[t[1]], seeds[t[2]]])).sum();
    let h = (area / seeds.len() as f64).sqrt();
    perturb(&mut seeds, PERTURBATION * h);
    tessellate(&seeds, h)
}

fn tessellate(seeds: &[Point], h: f64) -> Result<StaggeredMesh> {
    let tri = triangulate(seeds)?;
    let mut dual_cells = Vec::new();
    let mut dual_centers = Vec::new();
    for t in peeled_triangles(&tri, seeds, FLAT_TRIANGLE * h * h) {
        let pts = [seeds[t[0]], seeds[t[1]], seeds[t[2]]];
        if signed_area(&pts) <= 0.0 {
            return Err(Error::InvalidInput("degenerate Delaunay triangle".into()));
        }
        dual_centers.push(circumcenter(&pts));
        dual_cells.push(t.to_vec());
    }
    if dual_cells.is_empty() {
        return Err(Error::InvalidInput("triangulation has no triangles (collinear seeds?)".into()));
    }
    build_from_dual(DualTessellation { primary_centers: seeds.to_vec(), dual_centers, dual_cells, h })
}

fn triangulate(seeds: &[Point]) -> Result<DelaunayTriangulation<Point2<f64>>> {
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for (k, p) in seeds.iter().enumerate() {
        tri.insert(Point2::new(p.x, p.y)).map_err(|e| Error::InvalidInput(format!("seed {k} rejected by triangulation: {e:?}")))?;
    }
    if tri.num_vertices() != seeds.len() {
        return Err(Error::InvalidInput("duplicate seeds".into()));
    }
    Ok(tri)
}

fn triangles(tri: &DelaunayTriangulation<Point2<f64>>) -> Vec<[usize; 3]> {
    tri.inner_faces().map(|f| f.vertices().map(|v| v.fix().index())).collect()
}

/// Inner triangles minus the flat ones reachable from the outer face
/// through other flat ones. Seeds along a slanted side are collinear only
/// up to rounding, and the triangulation fills such sides with stacked
/// slivers.
fn peeled_triangles(tri: &DelaunayTriangulation<Point2<f64>>, seeds: &[Point], flat_area: f64) -> Vec<[usize; 3]> {
    let n = tri.num_all_faces();
    let mut removed = vec![false; n];
    let flat = |f: &spade::handles::FaceHandle<'_, spade::handles::InnerTag, Point2<f64>, (), (), ()>| {
        let v = f.vertices().map(|v| seeds[v.fix().index()]);
        signed_area(&v).abs() <= flat_area
    };
    loop {
        let mut changed = false;
        for f in tri.inner_faces() {
            let i = f.fix().index();
            if removed[i] || !flat(&f) {
                continue;
            }
            if f.adjacent_edges().iter().any(|e| {
                let g = e.rev().face();
                g.is_outer() || removed[g.fix().index()]
            }) {
                removed[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    tri.inner_faces().filter(|f| !removed[f.fix().index()]).map(|f| f.vertices().map(|v| v.fix().index())).collect()
}

fn delaunay_neighbors(tri: &DelaunayTriangulation<Point2<f64>>, n: usize) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); n];
    for e in tri.undirected_edges() {
        let [a, b] = e.vertices().map(|v| v.fix().index());
        nb[a].push(b);
        nb[b].push(a);
    }
    nb
}

fn voronoi_cell(domain: &[Point], seeds: &[Point], k: usize, neighbors: &[usize]) -> Vec<Point> {
    let mut cell = domain.to_vec();
    let x = seeds[k];
    for &j in neighbors {
        let y = seeds[j];
        cell = clip_halfplane(&cell, &((x + y) * 0.5), &(y - x));
        if cell.is_empty() {
            break;
        }
    }
    cell
}

/// Whether `p` lies in the diametral circle of a boundary segment. A seed
/// there makes the Delaunay angle opposite that segment obtuse, which puts
/// the circumcenter outside the domain.
fn encroaches(boundary: &[Point], p: &Point) -> bool {
    const SAFETY: f64 = 1.05;
    let n = boundary.len();
    (0..n).any(|k| {
        let (a, b) = (boundary[k], boundary[(k + 1) % n]);
        (p - (a + b) * 0.5).norm() < SAFETY * 0.5 * (b - a).norm()
    })
}

fn circumcenter(p: &[Point; 3]) -> Point {
    let b = p[1] - p[0];
    let c = p[2] - p[0];
    let d = 2.0 * cross(&b, &c);
    let bb = b.norm_squared();
    let cc = c.norm_squared();
    p[0] + Point::new(c.y * bb - b.y * cc, b.x * cc - c.x * bb) / d
}

fn boundary_seeds(domain: &ConvexDomain, total: usize) -> Vec<Point> {
    let v = &domain.vertices;
    let n = v.len();
    let lengths: Vec<f64> = (0..n).map(|k| (v[(k + 1) % n] - v[k]).norm()).collect();
    let perimeter: f64 = lengths.iter().sum();
    let extra = total - n;
    // largest-remainder apportionment of the extra seeds among the sides
    let quotas: Vec<f64> = lengths.iter().map(|l| extra as f64 * l / perimeter).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..n).collect();
    rest.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let missing = extra - counts.iter().sum::<usize>();
    for &k in rest.iter().take(missing) {
        counts[k] += 1;
    }
    let mut seeds = Vec::with_capacity(total);
    for k in 0..n {
        let (a, b) = (v[k], v[(k + 1) % n]);
        seeds.push(a);
        let m = counts[k];
        for s in 1..=m {
            let t = s as f64 / (m + 1) as f64;
            let mut p = a + (b - a) * t;
            // keep axis-aligned sides exactly on their line
            if a.x == b.x {
                p.x = a.x;
            }
            if a.y == b.y {
                p.y = a.y;
            }
            seeds.push(p);
        }
    }
    seeds
}

fn bounding_box(pts: &[Point]) -> (Point, Point) {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Deterministic lexicographic perturbation that breaks cocircular groups.
fn perturb(points: &mut [Point], eps: f64) {
    let m = points.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(points[a].y.total_cmp(&points[b].y)));
    for (rank, &k) in order.iter().enumerate() {
        let r = (rank + 1) as f64 / m as f64;
        points[k] += Point::new(r, 0.5 * r * r) * eps;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn quarter_points() {
        let pts = [Point::new(0.25, 0.25), Point::new(0.75, 0.25), Point::new(0.25, 0.75), Point::new(0.75, 0.75)];
        let m = build_voronoi_mesh_from_points(&pts).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.n_v(), 2);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.euler_residual(), 0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = ConvexDomain::unit_square();
        let a = build_voronoi_mesh(40, &d, 3, 7).unwrap();
        let b = build_voronoi_mesh(40, &d, 3, 7).unwrap();
        assert_eq!(a.primary_cells(), b.primary_cells());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn seed_count_is_respected() {
        let d = ConvexDomain::unit_square();
        for n in [16, 64, 256] {
            let m = build_voronoi_mesh(n, &d, 5, 1).unwrap();
            assert_eq!(m.num_cells(), n);
            assert_eq!(m.euler_residual(), 0);
            let r = validate(&m);
            assert!(r.max_orthogonality_defect < 1e-10, "{}", r.max_orthogonality_defect);
        }
    }

    #[test]
    fn slanted_sides() {
        let hexagon: Vec<Point> = (0..6).map(|k| {
            let t = std::f64::consts::PI * k as f64 / 3.0;
            Point::new(t.cos(), t.sin())
        }).collect();
        let d = ConvexDomain::new(hexagon).unwrap();
        for n in [16, 64, 256] {
            let m = build_voronoi_mesh(n, &d, 10, 7).unwrap();
            assert_eq!(m.num_cells(), n);
            let r = validate(&m);
            assert!(r.is_valid(), "{r}");
            assert!((m.domain_area() - d.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_tiny_seed_sets() {
        assert!(build_voronoi_mesh(3, &ConvexDomain::unit_square(), 0, 0).is_err());
    }

    #[test]
    fn rejects_clockwise_domain() {
        assert!(ConvexDomain::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)]).is_err());
    }
}
