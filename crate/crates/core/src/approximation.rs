//! Restriction and prolongation between smooth vector fields and edge
//! fields, for the general space (`u . n = 0` on the boundary) and the
//! Stokes space (compactly supported stream functions), plus the
//! edge-averaging restriction that only converges weakly.

use std::fmt;
use std::sync::Arc;

use crate::decomposition::{integrate_stream_with, reconstruct_from_curl_div_with, StreamGauge};
use crate::error::Result;
use crate::fields::{CellField, EdgeField, VertexField};
use crate::geometry::Point;
use crate::linalg::SolveOptions;
use crate::mesh::StaggeredMesh;
use crate::operators::{curl, div, skew_grad};
use crate::quadrature::{integrate_fan, segment_mean};

type Scalar = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type Vector = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// A smooth vector field with its curl and divergence (and, for the Stokes
/// space, its stream function). Smoothness and boundary behaviour are the
/// caller's promise.
#[derive(Clone)]
pub struct SmoothVectorField {
    pub name: String,
    u: Vector,
    curl: Scalar,
    div: Scalar,
    stream: Option<Scalar>,
}

impl fmt::Debug for SmoothVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothVectorField").field("name", &self.name).field("has_stream", &self.stream.is_some()).finish()
    }
}

impl SmoothVectorField {
    pub fn new(
        name: impl Into<String>,
        u: impl Fn(&Point) -> Point + Send + Sync + 'static,
        curl: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        div: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SmoothVectorField { name: name.into(), u: Arc::new(u), curl: Arc::new(curl), div: Arc::new(div), stream: None }
    }

    /// `u = perp(grad psi)`, so `curl u = laplacian psi` and `div u = 0`.
    pub fn from_stream(
        name: impl Into<String>,
        psi: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        grad_psi: impl Fn(&Point) -> Point + Send + Sync + 'static,
        laplacian_psi: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let u = move |p: &Point| {
            let g = grad_psi(p);
            Point::new(-g.y, g.x)
        };
        let mut f = Self::new(name, u, laplacian_psi, |_| 0.0);
        f.stream = Some(Arc::new(psi));
        f
    }

    pub fn zero() -> Self {
        Self::from_stream("zero", |_| 0.0, |_| Point::zeros(), |_| 0.0)
    }

    pub fn u(&self, p: &Point) -> Point {
        (self.u)(p)
    }
    pub fn curl(&self, p: &Point) -> f64 {
        (self.curl)(p)
    }
    pub fn div(&self, p: &Point) -> f64 {
        (self.div)(p)
    }
    pub fn stream(&self, p: &Point) -> Option<f64> {
        self.stream.as_ref().map(|s| s(p))
    }
    pub fn has_stream(&self) -> bool {
        self.stream.is_some()
    }
}

/// `u = grad(cos(pi x) cos(pi y)) + perp grad(sin(pi x) sin(pi y))` on the
/// unit square: tangential at the boundary, with nonzero curl and divergence.
/// Both `|grad curl|` and `|grad div|` peak at `2 pi^3`.
pub fn general_test_field() -> SmoothVectorField {
    use std::f64::consts::PI;
    // the y components of the two parts cancel
    let u = |p: &Point| Point::new(-2.0 * PI * (PI * p.x).sin() * (PI * p.y).cos(), 0.0);
    let div = |p: &Point| -2.0 * PI * PI * (PI * p.x).cos() * (PI * p.y).cos();
    let curl = |p: &Point| -2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin();
    SmoothVectorField::new("general", u, curl, div)
}

/// Stream `psi = (x (1 - x) y (1 - y))^2`, which vanishes with its gradient
/// on the boundary of the unit square.
pub fn stokes_test_field() -> SmoothVectorField {
    SmoothVectorField::from_stream("stokes", bubble::psi, bubble::grad, bubble::laplacian)
}

/// Stream `psi = (R^2 - r^2)^4` inside the disc of radius `R = 0.3` about
/// the center of the unit square and zero outside: compactly supported and
/// `C^3`.
pub fn compact_stokes_field() -> SmoothVectorField {
    const R2: f64 = 0.09;
    let s = |p: &Point| (p.x - 0.5).powi(2) + (p.y - 0.5).powi(2);
    // psi = g(s) with g(s) = (R2 - s)^4 for s < R2
    let psi = move |p: &Point| (R2 - s(p)).max(0.0).powi(4);
    let grad = move |p: &Point| {
        let g1 = -4.0 * (R2 - s(p)).max(0.0).powi(3);
        Point::new(2.0 * (p.x - 0.5) * g1, 2.0 * (p.y - 0.5) * g1)
    };
    let laplacian = move |p: &Point| {
        let (q, t) = (s(p), (R2 - s(p)).max(0.0));
        -16.0 * t.powi(3) + 48.0 * q * t * t
    };
    SmoothVectorField::from_stream("compact", psi, grad, laplacian)
}

/// The biharmonic bubble `(x (1 - x) y (1 - y))^2` and its derivatives.
pub mod bubble {
    use crate::geometry::Point;

    fn q(t: f64) -> (f64, f64, f64, f64) {
        // g = t(1-t) and its first three derivatives
        (t * (1.0 - t), 1.0 - 2.0 * t, -2.0, 0.0)
    }

    pub fn psi(p: &Point) -> f64 {
        let (a, _, _, _) = q(p.x);
        let (b, _, _, _) = q(p.y);
        (a * b).powi(2)
    }

    pub fn grad(p: &Point) -> Point {
        let (a, da, _, _) = q(p.x);
        let (b, db, _, _) = q(p.y);
        Point::new(2.0 * a * da * b * b, 2.0 * a * a * b * db)
    }

    /// `(a^2)'' = 2 a'^2 + 2 a a''`
    pub fn laplacian(p: &Point) -> f64 {
        let (a, da, dda, _) = q(p.x);
        let (b, db, ddb, _) = q(p.y);
        (2.0 * da * da + 2.0 * a * dda) * b * b + a * a * (2.0 * db * db + 2.0 * b * ddb)
    }

    /// `(a^2)'''' = 6 a''^2` for quadratic `a`; cross term `2 (a^2)'' (b^2)''`.
    pub fn bilaplacian(p: &Point) -> f64 {
        let (a, da, dda, _) = q(p.x);
        let (b, db, ddb, _) = q(p.y);
        let a2 = 2.0 * da * da + 2.0 * a * dda;
        let b2 = 2.0 * db * db + 2.0 * b * ddb;
        6.0 * dda * dda * b * b + 2.0 * a2 * b2 + a * a * 6.0 * ddb * ddb
    }

    /// Gradient of the Laplacian.
    pub fn grad_laplacian(p: &Point) -> Point {
        let (a, da, dda, _) = q(p.x);
        let (b, db, ddb, _) = q(p.y);
        let a2 = 2.0 * da * da + 2.0 * a * dda;
        let b2 = 2.0 * db * db + 2.0 * b * ddb;
        let a3 = 6.0 * da * dda;
        let b3 = 6.0 * db * ddb;
        Point::new(a3 * b * b + 2.0 * a * da * b2, a2 * 2.0 * b * db + a * a * b3)
    }
}

/// Mean of `f` over each primary cell.
pub fn cell_averages<'m>(mesh: &'m StaggeredMesh, f: impl Fn(&Point) -> f64) -> CellField<'m> {
    CellField::from_index_fn(mesh, |i| integrate_fan(&f, &mesh.primary_cells()[i].center, &mesh.primary_segments(i)) / mesh.cell_areas()[i])
}

/// Mean of `f` over each dual cell.
pub fn dual_averages<'m>(mesh: &'m StaggeredMesh, f: impl Fn(&Point) -> f64) -> VertexField<'m> {
    VertexField::from_index_fn(mesh, |nu| integrate_fan(&f, &mesh.dual_cells()[nu].center, &mesh.dual_segments(nu)) / mesh.dual_areas()[nu])
}

/// Surrogate of an element of the auxiliary space: `(curl, div)` for the
/// general space, `(psi, curl)` for the Stokes space.
#[derive(Debug, Clone)]
pub enum FImage<'m> {
    General { curl: VertexField<'m>, div: CellField<'m> },
    Stokes { stream: VertexField<'m>, curl: VertexField<'m> },
}

impl<'m> FImage<'m> {
    pub fn norm(&self) -> f64 {
        match self {
            FImage::General { curl, div } => curl.norm().hypot(div.norm()),
            FImage::Stokes { stream, curl } => stream.norm().hypot(curl.norm()),
        }
    }

    /// Componentwise distance; `None` if the variants differ.
    pub fn distance(&self, other: &FImage<'m>) -> Option<f64> {
        match (self, other) {
            (FImage::General { curl: a, div: b }, FImage::General { curl: c, div: d }) => Some((a - c).norm().hypot((b - d).norm())),
            (FImage::Stokes { stream: a, curl: b }, FImage::Stokes { stream: c, curl: d }) => Some((a - c).norm().hypot((b - d).norm())),
            _ => None,
        }
    }
}

/// `delta_i` as cell averages with the quadrature mean removed, `omega_nu`
/// as point values at the dual centers, then the unique edge field with that
/// curl and divergence.
pub fn restrict_general<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh) -> Result<EdgeField<'m>> {
    restrict_general_with(u, mesh, &SolveOptions::default())
}

pub fn restrict_general_with<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh, opts: &SolveOptions) -> Result<EdgeField<'m>> {
    let (omega, delta) = general_data(u, mesh);
    reconstruct_from_curl_div_with(&omega, &delta, opts)
}

/// The `(omega_h, delta_h)` pair the general restriction reproduces.
pub fn general_data<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh) -> (VertexField<'m>, CellField<'m>) {
    let omega = VertexField::from_fn(mesh, |p| u.curl(p));
    let mut delta = cell_averages(mesh, |p| u.div(p));
    delta.remove_mean();
    (omega, delta)
}

pub fn prolong_general<'m>(u: &EdgeField<'m>) -> FImage<'m> {
    FImage::General { curl: curl(u), div: div(u) }
}

/// Stream sampled at interior dual centers and zero on boundary dual
/// cells, then `skew_grad`.
///
/// # Panics
/// If `u` carries no stream function.
pub fn restrict_stokes<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh) -> EdgeField<'m> {
    skew_grad(&sampled_stream(u, mesh))
}

/// Stream values used by [`restrict_stokes`].
pub fn sampled_stream<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh) -> VertexField<'m> {
    assert!(u.has_stream(), "the Stokes restriction needs a stream function");
    let boundary = mesh.boundary_dual_flags();
    VertexField::from_index_fn(mesh, |nu| if boundary[nu] { 0.0 } else { u.stream(&mesh.dual_cells()[nu].center).unwrap_or(0.0) })
}

/// `(psi_h, curl u_h)` with `psi_h` the stream function vanishing outside the domain.
pub fn prolong_stokes<'m>(u: &EdgeField<'m>) -> Result<FImage<'m>> {
    let stream = integrate_stream_with(u, StreamGauge::Boundary)?;
    Ok(FImage::Stokes { stream, curl: curl(u) })
}

/// Which segment of an edge pair the normal component is averaged along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeChoice {
    /// The primary edge, joining dual centers (length `l_e`).
    Primary,
    /// The dual edge, joining primary centers (length `d_e`).
    Dual,
}

/// `u_e` as the mean of `u . n_e` along the chosen segment.
pub fn restrict_by_edge_averaging<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh, choice: EdgeChoice) -> EdgeField<'m> {
    EdgeField::from_index_fn(mesh, |e| {
        let (a, b) = match choice {
            EdgeChoice::Primary => mesh.primary_edge_endpoints(e),
            EdgeChoice::Dual => mesh.dual_edge_endpoints(e),
        };
        let n = mesh.edge(e).normal;
        segment_mean(&|p: &Point| u.u(p).dot(&n), &a, &b)
    })
}

/// A restriction strategy for [`c1_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    General,
    Stokes,
    EdgeAveraging(EdgeChoice),
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::General => f.write_str("general"),
            Restriction::Stokes => f.write_str("stokes"),
            Restriction::EdgeAveraging(EdgeChoice::Primary) => f.write_str("averaging-primary"),
            Restriction::EdgeAveraging(EdgeChoice::Dual) => f.write_str("averaging-dual"),
        }
    }
}

/// `|P_h R_h u - Pi u|_F`, with `Pi u` projected onto piecewise constants by
/// the same quadrature the restriction uses.
pub fn c1_error(u: &SmoothVectorField, restriction: Restriction, mesh: &StaggeredMesh) -> Result<f64> {
    let (discrete, exact) = match restriction {
        Restriction::General => (prolong_general(&restrict_general(u, mesh)?), general_projection(u, mesh)),
        Restriction::EdgeAveraging(choice) => (prolong_general(&restrict_by_edge_averaging(u, mesh, choice)), general_projection(u, mesh)),
        Restriction::Stokes => {
            let exact = FImage::Stokes {
                stream: dual_averages(mesh, |p| u.stream(p).expect("stream function")),
                curl: dual_averages(mesh, |p| u.curl(p)),
            };
            (prolong_stokes(&restrict_stokes(u, mesh))?, exact)
        }
    };
    Ok(discrete.distance(&exact).expect("matching variants"))
}

fn general_projection<'m>(u: &SmoothVectorField, mesh: &'m StaggeredMesh) -> FImage<'m> {
    FImage::General { curl: dual_averages(mesh, |p| u.curl(p)), div: cell_averages(mesh, |p| u.div(p)) }
}

/// `sqrt(2 |Omega| (|grad curl|^2 + |grad div|^2)) h`, the a priori bound on
/// the general C1 error given the two sup norms.
pub fn general_c1_bound(mesh: &StaggeredMesh, grad_curl_sup: f64, grad_div_sup: f64) -> f64 {
    (2.0 * mesh.domain_area() * (grad_curl_sup.powi(2) + grad_div_sup.powi(2))).sqrt() * mesh.h()
}

/// Distinct values of `values`, merging those within `tol` of the previous
/// cluster; sorted ascending.
pub fn value_set(values: impl IntoIterator<Item = f64>, tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        match out.last() {
            Some(&last) if (x - last).abs() <= tol => {}
            _ => out.push(x),
        }
    }
    out
}

/// Discrete fields of the averaging counterexample on one mesh: the
/// divergence of the dual-edge average of `(a y, b x)` on interior primary
/// cells, and the curl of the primary-edge average of `(a x, b y)` on
/// interior dual cells.
#[derive(Debug, Clone)]
pub struct AveragingCounterexample {
    pub h: f64,
    pub divergence: Vec<f64>,
    pub vorticity: Vec<f64>,
    /// L2 norms over the same cells.
    pub divergence_norm: f64,
    pub vorticity_norm: f64,
    /// Area-weighted mean of the divergence.
    pub divergence_mean: f64,
}

pub fn averaging_counterexample(mesh: &StaggeredMesh, a: f64, b: f64) -> AveragingCounterexample {
    let shear = SmoothVectorField::new("shear", move |p| Point::new(a * p.y, b * p.x), move |_| b - a, |_| 0.0);
    let strain = SmoothVectorField::new("strain", move |p| Point::new(a * p.x, b * p.y), |_| 0.0, move |_| a + b);
    let d = div(&restrict_by_edge_averaging(&shear, mesh, EdgeChoice::Dual));
    let w = curl(&restrict_by_edge_averaging(&strain, mesh, EdgeChoice::Primary));
    let interior: Vec<usize> = (0..mesh.n_v()).filter(|&k| !mesh.boundary_dual_flags()[k]).collect();
    let areas = mesh.cell_areas();
    let divergence: Vec<f64> = d.values()[..mesh.n_c()].to_vec();
    let cell_area: f64 = areas[..mesh.n_c()].iter().sum();
    let divergence_norm = divergence.iter().zip(areas).map(|(v, s)| s * v * v).sum::<f64>().sqrt();
    let divergence_mean = divergence.iter().zip(areas).map(|(v, s)| s * v).sum::<f64>() / cell_area;
    let vorticity: Vec<f64> = interior.iter().map(|&k| w[k]).collect();
    let vorticity_norm = interior.iter().map(|&k| mesh.dual_areas()[k] * w[k] * w[k]).sum::<f64>().sqrt();
    AveragingCounterexample { h: mesh.h(), divergence, vorticity, divergence_norm, vorticity_norm, divergence_mean }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::semi_h1_edge;
    use crate::mesh::{build_quad_mesh, build_tri_hex_mesh, Rect};
    use crate::operators::laplacian_vertex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bubble_derivatives_match_differences() {
        let p = Point::new(0.31, 0.62);
        let eps = 1e-4;
        let dx = Point::new(eps, 0.0);
        let dy = Point::new(0.0, eps);
        let g = bubble::grad(&p);
        assert!((g.x - (bubble::psi(&(p + dx)) - bubble::psi(&(p - dx))) / (2.0 * eps)).abs() < 1e-8);
        assert!((g.y - (bubble::psi(&(p + dy)) - bubble::psi(&(p - dy))) / (2.0 * eps)).abs() < 1e-8);
        let lap = |f: &dyn Fn(&Point) -> f64| (f(&(p + dx)) + f(&(p - dx)) + f(&(p + dy)) + f(&(p - dy)) - 4.0 * f(&p)) / (eps * eps);
        assert!((bubble::laplacian(&p) - lap(&bubble::psi)).abs() < 1e-5);
        assert!((bubble::bilaplacian(&p) - lap(&bubble::laplacian)).abs() < 1e-4);
        let gl = bubble::grad_laplacian(&p);
        assert!((gl.x - (bubble::laplacian(&(p + dx)) - bubble::laplacian(&(p - dx))) / (2.0 * eps)).abs() < 1e-6);
        assert!((gl.y - (bubble::laplacian(&(p + dy)) - bubble::laplacian(&(p - dy))) / (2.0 * eps)).abs() < 1e-6);
    }

    #[test]
    fn general_field_is_consistent() {
        let f = general_test_field();
        let p = Point::new(0.23, 0.71);
        let eps = 1e-5;
        let (dx, dy) = (Point::new(eps, 0.0), Point::new(0.0, eps));
        let ux = (f.u(&(p + dx)) - f.u(&(p - dx))) / (2.0 * eps);
        let uy = (f.u(&(p + dy)) - f.u(&(p - dy))) / (2.0 * eps);
        assert!((ux.x + uy.y - f.div(&p)).abs() < 1e-6);
        assert!((ux.y - uy.x - f.curl(&p)).abs() < 1e-6);
        // tangential on the boundary
        for t in [0.1, 0.5, 0.9] {
            assert!(f.u(&Point::new(0.0, t)).x.abs() < 1e-14);
            assert!(f.u(&Point::new(1.0, t)).x.abs() < 1e-14);
            assert!(f.u(&Point::new(t, 0.0)).y.abs() < 1e-14);
            assert!(f.u(&Point::new(t, 1.0)).y.abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_restricts_to_zero() {
        let m = build_quad_mesh(4, 4, Rect::unit()).unwrap();
        let z = SmoothVectorField::zero();
        assert_eq!(restrict_general(&z, &m).unwrap().max_abs(), 0.0);
        assert_eq!(restrict_stokes(&z, &m).max_abs(), 0.0);
        assert_eq!(c1_error(&z, Restriction::General, &m).unwrap(), 0.0);
        assert_eq!(c1_error(&z, Restriction::Stokes, &m).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_averages_are_exact() {
        let m = build_quad_mesh(5, 4, Rect::unit()).unwrap();
        let f = |p: &Point| 1.0 + p.x - 2.0 * p.y + p.x * p.y + 3.0 * p.y * p.y - p.x * p.x;
        // mean of f over [a, b] x [c, d]
        let exact = |a: f64, b: f64, c: f64, d: f64| {
            let (mx, my) = ((a + b) / 2.0, (c + d) / 2.0);
            let (xx, yy) = ((a * a + a * b + b * b) / 3.0, (c * c + c * d + d * d) / 3.0);
            1.0 + mx - 2.0 * my + mx * my + 3.0 * yy - xx
        };
        let bbox = |segs: Vec<(Point, Point)>| {
            let pts: Vec<Point> = segs.iter().flat_map(|(a, b)| [*a, *b]).collect();
            let lo = pts.iter().fold(pts[0], |m, p| m.inf(p));
            let hi = pts.iter().fold(pts[0], |m, p| m.sup(p));
            (lo, hi)
        };
        let a = cell_averages(&m, f);
        for i in 0..m.num_cells() {
            let (lo, hi) = bbox(m.primary_segments(i));
            assert!((a[i] - exact(lo.x, hi.x, lo.y, hi.y)).abs() < 1e-12, "cell {i}");
        }
        let b = dual_averages(&m, f);
        for nu in 0..m.n_v() {
            let (lo, hi) = bbox(m.dual_segments(nu));
            assert!((b[nu] - exact(lo.x, hi.x, lo.y, hi.y)).abs() < 1e-12, "dual {nu}");
        }
    }

    #[test]
    fn general_round_trip() {
        let m = build_quad_mesh(10, 10, Rect::unit()).unwrap();
        let f = general_test_field();
        let u = restrict_general(&f, &m).unwrap();
        let (omega, delta) = general_data(&f, &m);
        match prolong_general(&u) {
            FImage::General { curl, div } => {
                assert!((&curl - &omega).max_abs() < 1e-8);
                assert!((&div - &delta).max_abs() < 1e-8);
            }
            _ => unreachable!(),
        }
        assert!((prolong_general(&u).norm() - semi_h1_edge(&u)).abs() < 1e-12 * semi_h1_edge(&u));
    }

    #[test]
    fn stokes_restriction_is_divergence_free() {
        let m = build_quad_mesh(9, 9, Rect::unit()).unwrap();
        let u = restrict_stokes(&stokes_test_field(), &m);
        assert!(div(&u).max_abs() <= 1e-13);
        for e in m.n_e()..m.num_edges() {
            assert_eq!(u[e], 0.0);
        }
    }

    #[test]
    fn stokes_prolongation_round_trip() {
        let m = build_quad_mesh(8, 8, Rect::unit()).unwrap();
        let flags = m.boundary_dual_flags();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut psi0 = VertexField::random(&m, &mut rng);
        for (k, f) in flags.iter().enumerate() {
            if *f {
                psi0[k] = 0.0;
            }
        }
        match prolong_stokes(&skew_grad(&psi0)).unwrap() {
            FImage::Stokes { stream, curl } => {
                assert!((&stream - &psi0).max_abs() < 1e-12);
                assert!((&curl - &laplacian_vertex(&psi0)).max_abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn stokes_restriction_approximates_velocity() {
        // skew_grad of the sampled stream is close to u . n at the crossings
        let m = build_quad_mesh(32, 32, Rect::unit()).unwrap();
        let f = stokes_test_field();
        let u = restrict_stokes(&f, &m);
        let exact = EdgeField::from_vector_fn(&m, |p| f.u(p));
        assert!((&u - &exact).max_abs() < 1e-3);
    }

    #[test]
    fn constant_field_averaging() {
        let m = build_tri_hex_mesh(1).unwrap();
        let c = SmoothVectorField::new("const", |_| Point::new(0.3, -0.7), |_| 0.0, |_| 0.0);
        for choice in [EdgeChoice::Primary, EdgeChoice::Dual] {
            let u = restrict_by_edge_averaging(&c, &m, choice);
            let sampled = EdgeField::from_vector_fn(&m, |p| c.u(p));
            assert!((&u - &sampled).max_abs() < 1e-14);
            let d = div(&u);
            assert!((0..m.n_c()).all(|i| d[i].abs() < 1e-12));
            let w = curl(&u);
            let flags = m.boundary_dual_flags();
            assert!((0..m.n_v()).filter(|&k| !flags[k]).all(|k| w[k].abs() < 1e-12));
        }
    }

    #[test]
    fn general_c1_decreases() {
        let f = general_test_field();
        let e8 = c1_error(&f, Restriction::General, &build_quad_mesh(8, 8, Rect::unit()).unwrap()).unwrap();
        let e16 = c1_error(&f, Restriction::General, &build_quad_mesh(16, 16, Rect::unit()).unwrap()).unwrap();
        assert!(e16 < 0.6 * e8, "{e8} {e16}");
    }
}
