//! Constrained quadratic solves on deconstructed domains: Poisson, implicit
//! time steps, mixed-FEM bi-Laplace and constrained eigenmodes.

mod kkt;
mod modes;
mod pde;

pub use kkt::{independent_rows, solve_kkt};
pub use modes::{constrained_modes, null_space_basis};
pub use pde::{
    heat_step, implicit_step, solve_bilaplace, solve_bilaplace_convex, solve_poisson, wave_step,
    BilaplaceCoupling, Discretization, Source,
};

/// Result of a constrained solve.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    /// Stacked per-vertex values of every subdomain.
    pub u: Vec<T>,
    /// Auxiliary (Laplacian) values of the mixed bi-Laplace solves.
    pub z: Option<Vec<T>>,
    /// One multiplier per coupling row on `u`; zero for dropped rows.
    pub multipliers: Vec<T>,
    /// Multipliers of the coupling rows on `z` (high-order bi-Laplace).
    pub multipliers_z: Option<Vec<T>>,
    /// `max |A u - c|` over all coupling rows, dropped ones included.
    pub constraint_residual: T,
    /// `max |Q u - b + A^T lambda|` over the free unknowns.
    pub stationarity_residual: T,
    pub energy: T,
    /// Coupling rows removed as linearly dependent before the solve.
    pub dropped_rows: usize,
    /// Start of each subdomain block in `u`, followed by the total length.
    pub offsets: Vec<usize>,
}

impl<T> SolveReport<T> {
    pub fn subdomain(&self, k: usize) -> &[T] {
        &self.u[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn subdomain_z(&self, k: usize) -> Option<&[T]> {
        self.z.as_deref().map(|z| &z[self.offsets[k]..self.offsets[k + 1]])
    }

    pub fn num_subdomains(&self) -> usize {
        self.offsets.len() - 1
    }
}
