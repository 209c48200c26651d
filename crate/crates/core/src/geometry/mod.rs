//! Point location, barycentric coordinates and coverage counting.

mod aabb;

use crate::error::{Error, Result};
use crate::mesh::{DeconstructedDomain, SimplicialMesh};
use crate::scalar::Real;

pub use aabb::AabbTree;

/// Containment tolerance on barycentric coordinates, relative to the
/// bounding-box diagonal of the mesh being queried.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-10;

/// A point found inside simplex `simplex` with barycentric `coords`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLocation<T> {
    pub simplex: usize,
    pub coords: Vec<T>,
}

/// Solves the `d x d` system `a x = b` (`d <= 3`) by Gaussian elimination
/// with partial pivoting. Returns `None` when a pivot vanishes relative to
/// the largest entry of `a`.
pub(crate) fn solve_small<T: Real>(d: usize, mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    let scale = a[..d]
        .iter()
        .flat_map(|row| row[..d].iter())
        .fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return None;
    }
    let tiny = scale * T::tol(1e-14);
    for k in 0..d {
        let p = (k..d).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[p][k].abs() <= tiny {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..d {
            let f = a[i][k] / a[k][k];
            for j in k..d {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    let mut x = [T::zero(); 3];
    for k in (0..d).rev() {
        let mut s = b[k];
        for j in k + 1..d {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// Barycentric coordinates of `p` with respect to the simplex spanned by
/// `vertices` (`d + 1` points of `R^d`). Coordinates are negative outside.
pub fn barycentric_coordinates<T: Real>(vertices: &[&[T]], p: &[T]) -> Result<Vec<T>> {
    let d = p.len();
    if vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) || !(1..=3).contains(&d) {
        return Err(Error::Dimension(format!(
            "barycentric coordinates need d + 1 points of R^d, got {} points for a point in R^{d}",
            vertices.len()
        )));
    }
    let x0 = vertices[0];
    let mut a = [[T::zero(); 3]; 3];
    let mut b = [T::zero(); 3];
    for c in 0..d {
        for j in 0..d {
            a[c][j] = vertices[j + 1][c] - x0[c];
        }
        b[c] = p[c] - x0[c];
    }
    let x = solve_small(d, a, b).ok_or(Error::DegenerateSimplex { simplex: 0, measure: 0.0 })?;
    let mut coords = Vec::with_capacity(d + 1);
    coords.push(T::one() - x[..d].iter().fold(T::zero(), |s, v| s + *v));
    coords.extend_from_slice(&x[..d]);
    Ok(coords)
}

/// One AABB tree per subdomain of a deconstructed domain.
#[derive(Debug, Clone)]
pub struct DomainLocator<T> {
    trees: Vec<AabbTree<T>>,
}

impl<T: Real> DomainLocator<T> {
    pub fn new(domain: &DeconstructedDomain<T>) -> Self {
        Self { trees: domain.subdomains().iter().map(AabbTree::new).collect() }
    }

    pub fn tree(&self, k: usize) -> &AabbTree<T> {
        &self.trees[k]
    }

    pub fn trees(&self) -> &[AabbTree<T>] {
        &self.trees
    }

    /// Locates `p` in subdomain `k`.
    pub fn locate(&self, domain: &DeconstructedDomain<T>, k: usize, p: &[T]) -> Option<PointLocation<T>> {
        self.trees[k].locate_point(domain.subdomain(k), p)
    }

    /// Number of subdomains containing `p`.
    pub fn coverage_count(&self, domain: &DeconstructedDomain<T>, p: &[T]) -> usize {
        coverage_count(domain, &self.trees, p)
    }

    /// Boundary vertices of every subdomain that lie in no other subdomain,
    /// i.e. the vertices on the boundary of the union.
    pub fn exterior_boundary_vertices(&self, domain: &DeconstructedDomain<T>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, mesh) in domain.subdomains().iter().enumerate() {
            for v in mesh.boundary_vertices() {
                let p = mesh.vertex(v);
                let inside_other =
                    (0..domain.len()).any(|b| b != a && self.locate(domain, b, p).is_some());
                if !inside_other {
                    out.push((a, v));
                }
            }
        }
        out
    }
}

/// Number of subdomains whose mesh contains `p` (closed containment).
pub fn coverage_count<T: Real>(domain: &DeconstructedDomain<T>, trees: &[AabbTree<T>], p: &[T]) -> usize {
    domain
        .subdomains()
        .iter()
        .zip(trees)
        .filter(|(mesh, tree)| tree.locate_point(mesh, p).is_some())
        .count()
}

/// Locates `p` by scanning every simplex; the reference the tree is
/// checked against.
pub fn locate_point_brute_force<T: Real>(mesh: &SimplicialMesh<T>, p: &[T]) -> Option<PointLocation<T>> {
    let tol = T::tol(CONTAINMENT_TOLERANCE) * mesh.bbox_diagonal();
    (0..mesh.num_simplices()).find_map(|t| {
        let coords = barycentric_coordinates(&mesh.simplex_points(t), p).ok()?;
        coords.iter().all(|c| *c >= -tol).then_some(PointLocation { simplex: t, coords })
    })
}
