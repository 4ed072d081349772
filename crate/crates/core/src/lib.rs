//! Discrete vector calculus on staggered primal/dual polygonal meshes.
//!
//! Scalars live on primary cells ([`CellField`]) and dual cells
//! ([`VertexField`]), vectors are stored as one normal component per edge
//! pair ([`EdgeField`]). On top of the four first-order operators the crate
//! provides a constructive Helmholtz decomposition, restriction/prolongation
//! pairs for convergence studies and a MAC solver for the Stokes problem in
//! vorticity form.
//!
//! ```
//! use stagcalc::mesh::{build_quad_mesh, Rect};
//! use stagcalc::{fields::CellField, operators};
//!
//! let mesh = build_quad_mesh(8, 8, Rect::unit()).unwrap();
//! let phi = CellField::from_fn(&mesh, |p| p.x * p.y);
//! let u = operators::grad(&phi);
//! let w = operators::curl(&u);
//! assert!(w.max_abs() < 1e-12);
//! ```

pub mod approximation;
pub mod cli;
pub mod convergence;
pub mod decomposition;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod stokes;

pub use error::{Error, Result};
pub use fields::{CellField, EdgeField, VertexField};
pub use geometry::Point;
pub use mesh::StaggeredMesh;
