//! Piecewise-constant scalar fields on primary and dual cells, and normal
//! edge components, with their area-weighted inner products.

use std::fmt::Write as _;
use std::marker::PhantomData;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::StaggeredMesh;

/// The index space a field lives on.
pub trait Space: Copy + Send + Sync + 'static {
    const KIND: &'static str;
    fn len(mesh: &StaggeredMesh) -> usize;
    /// Area weights of the discrete L2 inner product.
    fn weights(mesh: &StaggeredMesh) -> &[f64];
    /// Point a field value is attached to when sampling.
    fn location(mesh: &StaggeredMesh, k: usize) -> Point;
}

#[derive(Debug, Clone, Copy)]
pub struct Cells;
#[derive(Debug, Clone, Copy)]
pub struct Vertices;
#[derive(Debug, Clone, Copy)]
pub struct Edges;

impl Space for Cells {
    const KIND: &'static str = "cell";
    fn len(mesh: &StaggeredMesh) -> usize {
        mesh.num_cells()
    }
    fn weights(mesh: &StaggeredMesh) -> &[f64] {
        mesh.cell_areas()
    }
    fn location(mesh: &StaggeredMesh, k: usize) -> Point {
        mesh.primary_cells()[k].center
    }
}

impl Space for Vertices {
    const KIND: &'static str = "vertex";
    fn len(mesh: &StaggeredMesh) -> usize {
        mesh.n_v()
    }
    fn weights(mesh: &StaggeredMesh) -> &[f64] {
        mesh.dual_areas()
    }
    fn location(mesh: &StaggeredMesh, k: usize) -> Point {
        mesh.dual_cells()[k].center
    }
}

impl Space for Edges {
    const KIND: &'static str = "edge";
    fn len(mesh: &StaggeredMesh) -> usize {
        mesh.num_edges()
    }
    fn weights(mesh: &StaggeredMesh) -> &[f64] {
        mesh.diamond_areas()
    }
    fn location(mesh: &StaggeredMesh, k: usize) -> Point {
        mesh.edge(k).intersection
    }
}

/// Coefficients of a discrete field tied to one mesh.
#[derive(Debug)]
pub struct Field<'m, S: Space> {
    mesh: &'m StaggeredMesh,
    values: Vec<f64>,
    _space: PhantomData<S>,
}

/// Scalars on primary cells.
pub type CellField<'m> = Field<'m, Cells>;
/// Scalars on dual cells.
pub type VertexField<'m> = Field<'m, Vertices>;
/// One normal component per edge pair.
pub type EdgeField<'m> = Field<'m, Edges>;

impl<S: Space> Clone for Field<'_, S> {
    fn clone(&self) -> Self {
        Field { mesh: self.mesh, values: self.values.clone(), _space: PhantomData }
    }
}

impl<'m, S: Space> Field<'m, S> {
    pub fn new(mesh: &'m StaggeredMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != S::len(mesh) {
            return Err(Error::InvalidInput(format!("{} field needs {} values, got {}", S::KIND, S::len(mesh), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{} field value {k} is not finite", S::KIND)));
        }
        Ok(Self::from_vec(mesh, values))
    }

    pub(crate) fn from_vec(mesh: &'m StaggeredMesh, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), S::len(mesh));
        Field { mesh, values, _space: PhantomData }
    }

    pub fn zeros(mesh: &'m StaggeredMesh) -> Self {
        Self::from_vec(mesh, vec![0.0; S::len(mesh)])
    }

    pub fn constant(mesh: &'m StaggeredMesh, c: f64) -> Self {
        Self::from_vec(mesh, vec![c; S::len(mesh)])
    }

    /// Point samples at cell centers (edges: at the crossing points).
    pub fn from_fn(mesh: &'m StaggeredMesh, f: impl Fn(&Point) -> f64) -> Self {
        Self::from_vec(mesh, (0..S::len(mesh)).map(|k| f(&S::location(mesh, k))).collect())
    }

    pub fn from_index_fn(mesh: &'m StaggeredMesh, f: impl Fn(usize) -> f64) -> Self {
        Self::from_vec(mesh, (0..S::len(mesh)).map(f).collect())
    }

    /// Independent uniform values in [-1, 1].
    pub fn random<R: Rng + ?Sized>(mesh: &'m StaggeredMesh, rng: &mut R) -> Self {
        Self::from_vec(mesh, (0..S::len(mesh)).map(|_| rng.random_range(-1.0..=1.0)).collect())
    }

    pub fn mesh(&self) -> &'m StaggeredMesh {
        self.mesh
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_mesh<T: Space>(&self, other: &Field<'_, T>) -> bool {
        self.mesh.id() == other.mesh.id()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// Area-weighted inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        let w = S::weights(self.mesh);
        Ok(self.values.iter().zip(&other.values).zip(w).map(|((a, b), w)| w * a * b).sum())
    }

    /// Discrete L2 norm `sqrt(sum w_k v_k^2)`.
    pub fn norm(&self) -> f64 {
        let w = S::weights(self.mesh);
        self.values.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sum w_k v_k`, the integral of the piecewise-constant function.
    pub fn integral(&self) -> f64 {
        S::weights(self.mesh).iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Area-weighted mean.
    pub fn mean(&self) -> f64 {
        self.integral() / S::weights(self.mesh).iter().sum::<f64>()
    }

    /// Shift so the area-weighted mean vanishes.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_vec(self.mesh, self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_vec(self.mesh, self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_vec(self.mesh, self.values.iter().map(|v| a * v).collect())
    }

    /// `kind,index,value` rows (1-based index) preceded by a mesh reference.
    pub fn to_csv(&self, mesh_ref: &str) -> String {
        let mut s = format!("# mesh: {mesh_ref}\nkind,index,value\n");
        for (k, v) in self.values.iter().enumerate() {
            writeln!(s, "{},{},{:.16e}", S::KIND, k + 1, v).unwrap();
        }
        s
    }
}

impl<'m> EdgeField<'m> {
    /// Normal components `f(x_e) . n_e` sampled at the crossing points.
    pub fn from_vector_fn(mesh: &'m StaggeredMesh, f: impl Fn(&Point) -> Point) -> Self {
        Self::from_vec(mesh, mesh.edges().iter().map(|e| f(&e.intersection).dot(&e.normal)).collect())
    }

    /// Zero the boundary-edge components.
    pub fn with_zero_boundary(mut self) -> Self {
        let ne = self.mesh.n_e();
        for v in &mut self.values[ne..] {
            *v = 0.0;
        }
        self
    }
}

impl<S: Space> Index<usize> for Field<'_, S> {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

impl<S: Space> IndexMut<usize> for Field<'_, S> {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.values[k]
    }
}

/// Panics if the fields live on different meshes; see [`Field::checked_add`].
impl<'m, S: Space> Add for &Field<'m, S> {
    type Output = Field<'m, S>;
    fn add(self, rhs: Self) -> Field<'m, S> {
        self.checked_add(rhs).expect("fields on different meshes")
    }
}

/// Panics if the fields live on different meshes; see [`Field::checked_sub`].
impl<'m, S: Space> Sub for &Field<'m, S> {
    type Output = Field<'m, S>;
    fn sub(self, rhs: Self) -> Field<'m, S> {
        self.checked_sub(rhs).expect("fields on different meshes")
    }
}

impl<'m, S: Space> Mul<&Field<'m, S>> for f64 {
    type Output = Field<'m, S>;
    fn mul(self, rhs: &Field<'m, S>) -> Field<'m, S> {
        rhs.scaled(self)
    }
}

impl<'m, S: Space> Neg for &Field<'m, S> {
    type Output = Field<'m, S>;
    fn neg(self) -> Field<'m, S> {
        self.scaled(-1.0)
    }
}

pub fn norm_l2_cell(phi: &CellField) -> f64 {
    phi.norm()
}

pub fn norm_l2_vertex(psi: &VertexField) -> f64 {
    psi.norm()
}

pub fn norm_l2_edge(u: &EdgeField) -> f64 {
    u.norm()
}

pub fn inner_cell(a: &CellField, b: &CellField) -> Result<f64> {
    a.inner(b)
}

pub fn inner_vertex(a: &VertexField, b: &VertexField) -> Result<f64> {
    a.inner(b)
}

pub fn inner_edge(a: &EdgeField, b: &EdgeField) -> Result<f64> {
    a.inner(b)
}

/// `sqrt(|div u|^2 + |curl u|^2)`.
pub fn semi_h1_edge(u: &EdgeField) -> f64 {
    let d = crate::operators::div(u).norm();
    let c = crate::operators::curl(u).norm();
    d.hypot(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_quad_mesh, Rect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norms_of_constants() {
        let m = build_quad_mesh(4, 4, Rect::unit()).unwrap();
        assert_eq!(norm_l2_cell(&CellField::zeros(&m)), 0.0);
        assert!((norm_l2_cell(&CellField::constant(&m, 1.0)) - 1.0).abs() < 1e-15);
        assert!((norm_l2_vertex(&VertexField::constant(&m, 1.0)) - 1.0).abs() < 1e-15);
        let ones = EdgeField::constant(&m, 1.0);
        let sum: f64 = m.diamond_areas().iter().sum();
        assert!((norm_l2_edge(&ones) - sum.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_entry_norms() {
        let m = build_quad_mesh(4, 4, Rect::unit()).unwrap();
        // interior cell of a 4x4 lattice has area 1/16; a 2x2 one has 1/4
        let m2 = build_quad_mesh(2, 2, Rect::unit()).unwrap();
        let mut phi = CellField::zeros(&m2);
        phi[0] = 1.0;
        assert_eq!(m2.cell_areas()[0], 0.25);
        assert!((norm_l2_cell(&phi) - 0.5).abs() < 1e-15);
        let mut psi = VertexField::zeros(&m);
        psi[5] = 4.0;
        assert_eq!(m.dual_areas()[5], 0.0625);
        assert!((norm_l2_vertex(&psi) - 1.0).abs() < 1e-15);
        let mut u = EdgeField::zeros(&m2);
        u[0] = 2.0;
        assert_eq!(m2.diamond_areas()[0], 0.125);
        assert!((norm_l2_edge(&u) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let m = build_quad_mesh(5, 3, Rect::unit()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = EdgeField::random(&m, &mut rng);
            let b = EdgeField::random(&m, &mut rng);
            let ab = inner_edge(&a, &b).unwrap();
            assert!(ab.abs() <= a.norm() * b.norm() * (1.0 + 1e-15));
            let aa = inner_edge(&a, &a).unwrap();
            assert!((aa - a.norm().powi(2)).abs() <= 1e-15 * aa);
            assert!((a.checked_add(&b).unwrap().norm()) <= a.norm() + b.norm() + 1e-12);
            assert!(((2.5 * &a).norm() - 2.5 * a.norm()).abs() < 1e-12);
        }
        assert_eq!(inner_edge(&EdgeField::random(&m, &mut rng), &EdgeField::zeros(&m)).unwrap(), 0.0);
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let a = build_quad_mesh(3, 3, Rect::unit()).unwrap();
        let b = build_quad_mesh(3, 3, Rect::unit()).unwrap();
        let x = CellField::constant(&a, 1.0);
        let y = CellField::constant(&b, 1.0);
        assert!(matches!(x.inner(&y), Err(Error::MeshMismatch)));
    }

    #[test]
    fn rejects_wrong_length_and_nan() {
        let m = build_quad_mesh(3, 3, Rect::unit()).unwrap();
        assert!(CellField::new(&m, vec![0.0; 3]).is_err());
        let mut v = vec![0.0; m.num_cells()];
        v[2] = f64::NAN;
        assert!(CellField::new(&m, v).is_err());
    }

    #[test]
    fn csv_rows() {
        let m = build_quad_mesh(2, 2, Rect::unit()).unwrap();
        let csv = CellField::constant(&m, 0.5).to_csv("quad.mesh");
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# mesh: quad.mesh"));
        assert_eq!(lines.next(), Some("kind,index,value"));
        assert_eq!(lines.next(), Some("cell,1,5.0000000000000000e-1"));
        assert_eq!(csv.lines().count(), 2 + 9);
    }
}
