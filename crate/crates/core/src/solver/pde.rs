//! Poisson, implicit time steps and the mixed bi-Laplace solves, all
//! expressed as calls to [`solve_kkt`].

use std::fmt;
use std::str::FromStr;

use crate::coupling::{self, ConstraintSet, CouplingMode};
use crate::error::{Error, Result};
use crate::fem::{assemble_global, GlobalOperators, QuadratureSpec, SparseMatrix};
use crate::geometry::DomainLocator;
use crate::mesh::{DeconstructedDomain, DirichletValue};
use crate::scalar::{dot, Real};

use super::{independent_rows, solve_kkt, SolveReport};

/// Right-hand side `f` of `-Δu = f` (or `Δ²u = f`).
#[derive(Debug, Clone, PartialEq)]
pub enum Source<T> {
    Constant(T),
    /// One value per global vertex.
    PerVertex(Vec<T>),
}

impl<T: Real> Source<T> {
    pub fn values(&self, n: usize) -> Result<Vec<T>> {
        match self {
            Self::Constant(f) => Ok(vec![*f; n]),
            Self::PerVertex(v) if v.len() == n => Ok(v.clone()),
            Self::PerVertex(v) => {
                Err(Error::Dimension(format!("source has {} values for {n} vertices", v.len())))
            }
        }
    }
}

/// How the mixed bi-Laplace unknowns of overlapping subdomains are tied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BilaplaceCoupling {
    /// Values only.
    ValueOnly,
    /// Values and one-sided first derivatives (1D only).
    LowOrder,
    /// Values and auxiliary Laplacian values.
    #[default]
    HighOrder,
}

impl BilaplaceCoupling {
    pub fn name(self) -> &'static str {
        match self {
            Self::ValueOnly => "value_only",
            Self::LowOrder => "low_order",
            Self::HighOrder => "high_order",
        }
    }
}

impl fmt::Display for BilaplaceCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BilaplaceCoupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "value_only" => Ok(Self::ValueOnly),
            "low_order" => Ok(Self::LowOrder),
            "high_order" => Ok(Self::HighOrder),
            _ => Err(Error::Config(format!("unknown bi-Laplace coupling `{s}`"))),
        }
    }
}

/// Everything assembled once per domain: point locators, block-diagonal
/// operators and the coupling constraints.
#[derive(Debug, Clone)]
pub struct Discretization<T: Real> {
    pub locator: DomainLocator<T>,
    pub operators: GlobalOperators<T>,
    pub constraints: ConstraintSet<T>,
    /// Materialized constraint matrix `C`.
    pub coupling: SparseMatrix<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(domain: &DeconstructedDomain<T>, quad: &QuadratureSpec, mode: CouplingMode) -> Result<Self> {
        let locator = DomainLocator::new(domain);
        let operators = assemble_global(domain, &locator, quad)?;
        let constraints = coupling::build(domain, &locator, mode);
        let coupling = constraints.matrix(&operators.offsets, operators.size());
        Ok(Self { locator, operators, constraints, coupling })
    }

    pub fn size(&self) -> usize {
        self.operators.size()
    }

    fn finish(&self, mut report: SolveReport<T>) -> SolveReport<T> {
        report.offsets = self.operators.offsets.clone();
        report
    }

    /// `min 1/2 u^T L u - u^T M f` subject to `C u = 0` and the Dirichlet data.
    pub fn poisson(&self, domain: &DeconstructedDomain<T>, source: &Source<T>) -> Result<SolveReport<T>> {
        let n = self.size();
        let b = self.operators.mass.mul_vec(&source.values(n)?);
        let zero = vec![T::zero(); self.coupling.rows()];
        let r = solve_kkt(&self.operators.laplacian, &b, &self.coupling, &zero, &domain.dirichlet_global())?;
        Ok(self.finish(r))
    }

    /// Solves `(M + alpha L) u = M rhs` under the coupling and Dirichlet data.
    pub fn implicit_step(&self, domain: &DeconstructedDomain<T>, alpha: T, rhs: &[T]) -> Result<SolveReport<T>> {
        if !(alpha > T::zero()) {
            return Err(Error::InvalidArgument(format!("time-step weight {alpha:e} is not positive")));
        }
        let n = self.size();
        if rhs.len() != n {
            return Err(Error::Dimension(format!("right-hand side has {} values for {n} vertices", rhs.len())));
        }
        let q = self.operators.mass.add_scaled(&self.operators.laplacian, alpha);
        let b = self.operators.mass.mul_vec(rhs);
        let zero = vec![T::zero(); self.coupling.rows()];
        let r = solve_kkt(&q, &b, &self.coupling, &zero, &domain.dirichlet_global())?;
        Ok(self.finish(r))
    }

    fn z_dirichlet(&self, domain: &DeconstructedDomain<T>, values: &[DirichletValue<T>]) -> Result<Vec<(usize, T)>> {
        values
            .iter()
            .map(|d| {
                if d.subdomain >= domain.len() || d.vertex >= domain.subdomain(d.subdomain).num_vertices() {
                    return Err(Error::InvalidArgument(format!(
                        "Laplacian value for vertex {} of subdomain {} is out of range",
                        d.vertex, d.subdomain
                    )));
                }
                Ok((self.operators.offsets[d.subdomain] + d.vertex, d.value))
            })
            .collect()
    }

    /// One-sided derivative matching rows: for every coupling row whose
    /// target is an end point of a 1D subdomain, the slope of the target's
    /// boundary element equals the slope of the anchor element.
    fn derivative_rows(&self, domain: &DeconstructedDomain<T>) -> Result<SparseMatrix<T>> {
        if domain.dim() != 1 {
            return Err(Error::LowOrderDimension(domain.dim()));
        }
        let off = &self.operators.offsets;
        let mut trip = Vec::new();
        let mut rows = 0;
        for r in &self.constraints.rows {
            let mesh = domain.subdomain(r.target_subdomain);
            let v = r.target_vertex;
            if !mesh.boundary_vertices().contains(&v) {
                continue;
            }
            let element = mesh.simplices().find(|s| s.contains(&v)).expect("referenced vertex");
            let w = if element[0] == v { element[1] } else { element[0] };
            let ha = mesh.vertex(v)[0] - mesh.vertex(w)[0];
            let anchor = domain.subdomain(r.anchor_subdomain);
            let (j0, j1) = (r.anchor_vertices[0], r.anchor_vertices[1]);
            let hb = anchor.vertex(j1)[0] - anchor.vertex(j0)[0];
            let (ta, tb) = (off[r.target_subdomain], off[r.anchor_subdomain]);
            trip.push((rows, ta + v, T::one() / ha));
            trip.push((rows, ta + w, -T::one() / ha));
            trip.push((rows, tb + j1, -T::one() / hb));
            trip.push((rows, tb + j0, T::one() / hb));
            rows += 1;
        }
        Ok(SparseMatrix::from_triplets(rows, self.size(), &trip))
    }

    /// Mixed FEM bi-Laplace `Δ²u = f`: the saddle system in `(u, z)` with
    /// `z ≈ -Δu`, Dirichlet values on `u` from the domain and optional
    /// prescribed `z` values. Unpinned boundaries get the natural conditions
    /// of the discretization.
    pub fn bilaplace(
        &self,
        domain: &DeconstructedDomain<T>,
        coupling: BilaplaceCoupling,
        source: &Source<T>,
        z_values: &[DirichletValue<T>],
    ) -> Result<SolveReport<T>> {
        let n = self.size();
        let m = self.coupling.rows();
        let l = &self.operators.laplacian;
        let neg_mass = self.operators.mass.scale(-T::one());
        let q = SparseMatrix::from_blocks(&[vec![None, Some(l)], vec![Some(l), Some(&neg_mass)]]);
        let mut b = self.operators.mass.mul_vec(&source.values(n)?);
        b.resize(2 * n, T::zero());

        let c = &self.coupling;
        let zero_m = SparseMatrix::zeros(m, n);
        let a = match coupling {
            BilaplaceCoupling::ValueOnly => SparseMatrix::from_blocks(&[vec![Some(c), Some(&zero_m)]]),
            BilaplaceCoupling::HighOrder => SparseMatrix::from_blocks(&[
                vec![Some(c), Some(&zero_m)],
                vec![Some(&zero_m), Some(c)],
            ]),
            BilaplaceCoupling::LowOrder => {
                let d = self.derivative_rows(domain)?;
                let zero_d = SparseMatrix::zeros(d.rows(), n);
                SparseMatrix::from_blocks(&[vec![Some(c), Some(&zero_m)], vec![Some(&d), Some(&zero_d)]])
            }
        };
        let mut fixed = domain.dirichlet_global();
        fixed.extend(self.z_dirichlet(domain, z_values)?.into_iter().map(|(i, v)| (n + i, v)));
        let zero = vec![T::zero(); a.rows()];
        let mut r = solve_kkt(&q, &b, &a, &zero, &fixed)?;

        let z = r.u.split_off(n);
        if coupling == BilaplaceCoupling::HighOrder {
            r.multipliers_z = Some(r.multipliers.split_off(m));
        }
        r.energy = self.mixed_energy(&r.u, &z, &b[..n]);
        r.z = Some(z);
        Ok(self.finish(r))
    }

    /// The high-order bi-Laplace problem rearranged into a convex quadratic
    /// program in `(u, lambda_z, y)`:
    /// `min 1/2 |y|^2` subject to `C u = 0` and
    /// `L u + C^T lambda_z = M^(1/2) y` on the rows where `z` is free.
    pub fn bilaplace_convex(
        &self,
        domain: &DeconstructedDomain<T>,
        source: &Source<T>,
        z_values: &[DirichletValue<T>],
    ) -> Result<SolveReport<T>> {
        let n = self.size();
        let m = self.coupling.rows();
        let c = &self.coupling;
        let mut z_fixed = vec![T::zero(); n];
        let mut is_fixed = vec![false; n];
        for (i, v) in self.z_dirichlet(domain, z_values)? {
            z_fixed[i] = v;
            is_fixed[i] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
        let mass = self.operators.mass.diagonal();
        let mut sqrt_mass = Vec::with_capacity(free.len());
        for &i in &free {
            if !(mass[i] > T::zero()) {
                return Err(Error::ZeroMass(i));
            }
            sqrt_mass.push(mass[i].sqrt());
        }

        // multipliers on z only for rows that constrain free z values
        // independently; the remaining rows must hold on the fixed values
        let c_free = c.select_cols(&free);
        let cz_fixed = c.mul_vec(&z_fixed);
        let scale = crate::scalar::norm_inf(&z_fixed).max(T::one());
        for i in 0..m {
            if c_free.row(i).next().is_none() && cz_fixed[i].abs() > T::tol(1e-9) * scale {
                return Err(Error::Infeasible { residual: cz_fixed[i].abs().as_f64() });
            }
        }
        let keep_z = independent_rows(&c_free);
        let cz = c.select_rows(&keep_z);
        let mz = keep_z.len();
        let nf = free.len();

        let l = &self.operators.laplacian;
        let l_free = l.select_rows(&free);
        let czt_free = cz.transpose().select_rows(&free);
        let neg_sqrt = SparseMatrix::from_diagonal(&sqrt_mass).scale(-T::one());
        let a = SparseMatrix::from_blocks(&[
            vec![Some(c), Some(&SparseMatrix::zeros(m, mz)), Some(&SparseMatrix::zeros(m, nf))],
            vec![Some(&l_free), Some(&czt_free), Some(&neg_sqrt)],
        ]);
        let mut diag = vec![T::zero(); n + mz];
        diag.resize(n + mz + nf, T::one());
        let q = SparseMatrix::from_diagonal(&diag);

        let mf = self.operators.mass.mul_vec(&source.values(n)?);
        let lz = l.mul_vec(&z_fixed);
        let mut b: Vec<T> = mf.iter().zip(&lz).map(|(x, y)| *x - *y).collect();
        b.extend(keep_z.iter().map(|&i| -cz_fixed[i]));
        b.resize(n + mz + nf, T::zero());

        let zero = vec![T::zero(); a.rows()];
        let mut r = solve_kkt(&q, &b, &a, &zero, &domain.dirichlet_global())?;
        let y = r.u.split_off(n + mz);
        let lambda_z = r.u.split_off(n);
        let mut z = z_fixed;
        for ((&i, yi), s) in free.iter().zip(&y).zip(&sqrt_mass) {
            z[i] = *yi / *s;
        }
        let mut multipliers_z = vec![T::zero(); m];
        for (&i, v) in keep_z.iter().zip(&lambda_z) {
            multipliers_z[i] = *v;
        }
        r.multipliers.truncate(m);
        r.multipliers_z = Some(multipliers_z);
        r.energy = self.mixed_energy(&r.u, &z, &mf);
        r.z = Some(z);
        Ok(self.finish(r))
    }

    /// `1/2 z^T M z - u^T M f`.
    fn mixed_energy(&self, u: &[T], z: &[T], mf: &[T]) -> T {
        let mz = self.operators.mass.mul_vec(z);
        dot(z, &mz) * T::lit(0.5) - dot(u, mf)
    }
}

pub fn solve_poisson<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    source: &Source<T>,
) -> Result<SolveReport<T>> {
    Discretization::new(domain, quad, mode)?.poisson(domain, source)
}

/// `(M + alpha L) u = M rhs`.
pub fn implicit_step<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    alpha: T,
    rhs: &[T],
) -> Result<SolveReport<T>> {
    Discretization::new(domain, quad, mode)?.implicit_step(domain, alpha, rhs)
}

/// One backward Euler step of the heat equation: `u - dt Δu = u0`.
pub fn heat_step<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    dt: T,
    u0: &[T],
) -> Result<SolveReport<T>> {
    implicit_step(domain, quad, mode, dt, u0)
}

/// One implicit wave step: `u - dt² Δu = u0 + dt v0`.
pub fn wave_step<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    dt: T,
    u0: &[T],
    v0: &[T],
) -> Result<SolveReport<T>> {
    if u0.len() != v0.len() {
        return Err(Error::Dimension(format!("{} positions and {} velocities", u0.len(), v0.len())));
    }
    let rhs: Vec<T> = u0.iter().zip(v0).map(|(u, v)| *u + dt * *v).collect();
    implicit_step(domain, quad, mode, dt * dt, &rhs)
}

pub fn solve_bilaplace<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    coupling: BilaplaceCoupling,
    source: &Source<T>,
    z_values: &[DirichletValue<T>],
) -> Result<SolveReport<T>> {
    Discretization::new(domain, quad, mode)?.bilaplace(domain, coupling, source, z_values)
}

pub fn solve_bilaplace_convex<T: Real>(
    domain: &DeconstructedDomain<T>,
    quad: &QuadratureSpec,
    mode: CouplingMode,
    source: &Source<T>,
    z_values: &[DirichletValue<T>],
) -> Result<SolveReport<T>> {
    Discretization::new(domain, quad, mode)?.bilaplace_convex(domain, source, z_values)
}
