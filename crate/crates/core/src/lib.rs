//! Finite element solvers on *deconstructed domains*: a solid given as the
//! union of `K` overlapping simplicial meshes that are never merged. The
//! meshes are coupled algebraically through equality constraints placed at
//! subdomain-boundary vertices, and every energy integral is weighted by the
//! reciprocal of the local coverage count so overlaps are not double counted.
//!
//! The numeric core is generic over [`Real`] (implemented for `f32` and
//! `f64`). The aliases at the crate root fix the scalar to `f64`, which is
//! what the experiment harness and the tolerances in the test suite assume.

pub mod coupling;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub use coupling::{ConstraintRow, ConstraintSet, CouplingMode};
pub use fem::{QuadratureSpec, SparseMatrix};
pub use geometry::{AabbTree, DomainLocator, PointLocation};
pub use mesh::{DeconstructedDomain, DirichletValue, SimplicialMesh};
pub use solver::{BilaplaceCoupling, Source, SolveReport};

/// Simplicial mesh with `f64` coordinates.
pub type Mesh = mesh::SimplicialMesh<f64>;
/// Single-precision mesh.
pub type Mesh32 = mesh::SimplicialMesh<f32>;
pub type Domain = mesh::DeconstructedDomain<f64>;
pub type Domain32 = mesh::DeconstructedDomain<f32>;
pub type Sparse = fem::SparseMatrix<f64>;
pub type Sparse32 = fem::SparseMatrix<f32>;
pub type Constraints = coupling::ConstraintSet<f64>;
pub type Report = solver::SolveReport<f64>;
pub type Locator = geometry::DomainLocator<f64>;
