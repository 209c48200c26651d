//! Per-subdomain operators: gradient matrices, coverage-adjusted element
//! volumes, stiffness and lumped mass matrices, and their block-diagonal
//! stacking over the whole deconstructed domain.

mod factor;
mod quadrature;
mod sparse;

pub use factor::{dense_solve, reverse_cuthill_mckee, SymmetricFactor, DENSE_LIMIT};
pub use quadrature::{QuadraturePoint, QuadratureSpec, CORNER_INSET};
pub use sparse::SparseMatrix;

use crate::error::{Error, Result};
use crate::geometry::{solve_small, DomainLocator};
use crate::mesh::{DeconstructedDomain, SimplicialMesh};
use crate::scalar::Real;

/// Gradients of the `d + 1` barycentric functions of simplex `t`, one
/// `d`-vector per local vertex.
pub fn barycentric_gradients<T: Real>(mesh: &SimplicialMesh<T>, t: usize) -> Result<Vec<[T; 3]>> {
    let d = mesh.dim();
    let pts = mesh.simplex_points(t);
    let mut e = [[T::zero(); 3]; 3];
    for j in 0..d {
        for c in 0..d {
            e[c][j] = pts[j + 1][c] - pts[0][c];
        }
    }
    // rows of E^{-1} are the gradients of lambda_1..lambda_d
    let mut grads = vec![[T::zero(); 3]; d + 1];
    for c in 0..d {
        let mut unit = [T::zero(); 3];
        unit[c] = T::one();
        let col = solve_small(d, e, unit).ok_or_else(|| Error::DegenerateSimplex {
            simplex: t,
            measure: mesh.simplex_measure(t).map(|m| m.as_f64()).unwrap_or(0.0),
        })?;
        for j in 0..d {
            grads[j + 1][c] = col[j];
        }
    }
    for c in 0..d {
        let s = (1..=d).fold(T::zero(), |s, j| s + grads[j][c]);
        grads[0][c] = -s;
    }
    Ok(grads)
}

/// Discrete gradient (`d t x n`): rows `d k .. d k + d - 1` hold the
/// constant gradient of the piecewise-linear interpolant on simplex `k`.
pub fn gradient_matrix<T: Real>(mesh: &SimplicialMesh<T>) -> Result<SparseMatrix<T>> {
    let d = mesh.dim();
    let mut trip = Vec::with_capacity(mesh.num_simplices() * d * (d + 1));
    for t in 0..mesh.num_simplices() {
        let grads = barycentric_gradients(mesh, t)?;
        for (local, &v) in mesh.simplex(t).iter().enumerate() {
            for c in 0..d {
                trip.push((d * t + c, v, grads[local][c]));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(d * mesh.num_simplices(), mesh.num_vertices(), &trip))
}

/// Element measures of subdomain `k` scaled by the quadrature estimate of
/// the mean of `1 / coverage` over each element.
pub fn adjusted_volumes<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
    k: usize,
    quad: &QuadratureSpec,
) -> Result<Vec<T>> {
    quad.validate()?;
    let mesh = domain.subdomain(k);
    let d = mesh.dim();
    let zero_coverage = |t| Error::ZeroCoverage { subdomain: k, simplex: t };

    (0..mesh.num_simplices())
        .map(|t| {
            let pts = mesh.simplex_points(t);
            let mut acc = T::zero();
            for (bary, w) in quad.rule::<T>(d, t)? {
                let mut p = [T::zero(); 3];
                for (b, x) in bary.iter().zip(&pts) {
                    for c in 0..d {
                        p[c] += *b * x[c];
                    }
                }
                let count = locator.coverage_count(domain, &p[..d]);
                if count == 0 {
                    return Err(zero_coverage(t));
                }
                acc += w / T::of(count);
            }
            Ok(mesh.simplex_measure(t)? * acc)
        })
        .collect()
}

fn check_weights<T: Real>(mesh: &SimplicialMesh<T>, a: &[T]) -> Result<()> {
    if a.len() != mesh.num_simplices() {
        return Err(Error::Dimension(format!(
            "{} element weights for {} simplices",
            a.len(),
            mesh.num_simplices()
        )));
    }
    if let Some(t) = a.iter().position(|w| *w < T::zero()) {
        return Err(Error::NegativeVolume { simplex: t, value: a[t].as_f64() });
    }
    Ok(())
}

/// `G^T diag(a) G`, each element weight repeated across its `d` rows of `G`.
pub fn stiffness_matrix<T: Real>(mesh: &SimplicialMesh<T>, a: &[T]) -> Result<SparseMatrix<T>> {
    check_weights(mesh, a)?;
    let d = mesh.dim();
    let g = gradient_matrix(mesh)?;
    let weights: Vec<T> = a.iter().flat_map(|w| std::iter::repeat_n(*w, d)).collect();
    let dg = SparseMatrix::from_diagonal(&weights).mul(&g);
    Ok(g.transpose().mul(&dg))
}

/// Barycentric lumped mass: each vertex collects `a_k / (d + 1)` from every
/// incident element.
pub fn lumped_mass_matrix<T: Real>(mesh: &SimplicialMesh<T>, a: &[T]) -> Result<SparseMatrix<T>> {
    check_weights(mesh, a)?;
    let share = T::one() / T::of(mesh.dim() + 1);
    let mut diag = vec![T::zero(); mesh.num_vertices()];
    for (s, w) in mesh.simplices().zip(a) {
        for &v in s {
            diag[v] += *w * share;
        }
    }
    Ok(SparseMatrix::from_diagonal(&diag))
}

/// Block-diagonal operators of a deconstructed domain.
#[derive(Debug, Clone)]
pub struct GlobalOperators<T> {
    pub laplacian: SparseMatrix<T>,
    pub mass: SparseMatrix<T>,
    /// Global row of the first vertex of each subdomain, then the total.
    pub offsets: Vec<usize>,
    pub adjusted_volumes: Vec<Vec<T>>,
}

impl<T: Real> GlobalOperators<T> {
    pub fn size(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn total_adjusted_volume(&self) -> T {
        self.adjusted_volumes.iter().flatten().fold(T::zero(), |s, a| s + *a)
    }
}

pub fn assemble_global<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
    quad: &QuadratureSpec,
) -> Result<GlobalOperators<T>> {
    let mut ls = Vec::with_capacity(domain.len());
    let mut ms = Vec::with_capacity(domain.len());
    let mut adjusted = Vec::with_capacity(domain.len());
    for (k, mesh) in domain.subdomains().iter().enumerate() {
        let a = adjusted_volumes(domain, locator, k, quad)?;
        ls.push(stiffness_matrix(mesh, &a)?);
        ms.push(lumped_mass_matrix(mesh, &a)?);
        adjusted.push(a);
    }
    let lref: Vec<&SparseMatrix<T>> = ls.iter().collect();
    let mref: Vec<&SparseMatrix<T>> = ms.iter().collect();
    Ok(GlobalOperators {
        laplacian: SparseMatrix::block_diag(&lref),
        mass: SparseMatrix::block_diag(&mref),
        offsets: domain.offsets(),
        adjusted_volumes: adjusted,
    })
}
