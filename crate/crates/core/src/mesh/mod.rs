//! Simplicial meshes in one to three dimensions and the deconstructed domain
//! built from several of them.

mod generate;
mod io;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::solve_small;
use crate::scalar::Real;

pub use generate::{generate_annulus, generate_disk, generate_rectangle, generate_segment};
pub use io::{load_mesh, save_mesh};

/// One subdomain: `n` vertices in `R^d` and `t` d-simplices.
///
/// Coordinates and connectivity are stored flat (`n * d` reals and
/// `t * (d + 1)` indices). Construction validates the mesh and flips
/// negatively oriented simplices, so every stored simplex has positive
/// signed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh<T> {
    dim: usize,
    vertices: Vec<T>,
    simplices: Vec<usize>,
}

impl<T: Real> SimplicialMesh<T> {
    pub fn new(dim: usize, vertices: Vec<T>, mut simplices: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension {dim} not in 1..=3")));
        }
        if vertices.len() % dim != 0 {
            return Err(Error::Dimension(format!(
                "{} coordinates is not a multiple of d = {dim}",
                vertices.len()
            )));
        }
        if simplices.len() % (dim + 1) != 0 {
            return Err(Error::Dimension(format!(
                "{} indices is not a multiple of d + 1 = {}",
                simplices.len(),
                dim + 1
            )));
        }
        let n = vertices.len() / dim;
        let mut referenced = vec![false; n];
        for (t, s) in simplices.chunks(dim + 1).enumerate() {
            for &v in s {
                if v >= n {
                    return Err(Error::IndexOutOfRange { simplex: t, vertex: v, count: n });
                }
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::UnreferencedVertex(v));
        }

        let mut mesh = Self { dim, vertices, simplices: Vec::new() };
        let diag = mesh.bbox_diagonal();
        let threshold = T::tol(1e-14) * diag.powi(dim as i32);
        for (t, s) in simplices.chunks_mut(dim + 1).enumerate() {
            let signed = mesh.signed_measure_of(s);
            if signed.abs() <= threshold {
                return Err(Error::DegenerateSimplex { simplex: t, measure: signed.as_f64() });
            }
            if signed < T::zero() {
                s.swap(dim - 1, dim);
            }
        }
        mesh.simplices = simplices;
        mesh.check_closed_boundary()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    pub fn vertex(&self, i: usize) -> &[T] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn simplex(&self, t: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.simplices[t * k..(t + 1) * k]
    }

    /// Flat vertex coordinates, `n * d` entries.
    pub fn coordinates(&self) -> &[T] {
        &self.vertices
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.chunks(self.dim + 1)
    }

    pub fn simplex_points(&self, t: usize) -> Vec<&[T]> {
        self.simplex(t).iter().map(|&v| self.vertex(v)).collect()
    }

    /// Positive d-measure (length, area, volume) of simplex `t`.
    pub fn simplex_measure(&self, t: usize) -> Result<T> {
        if t >= self.num_simplices() {
            return Err(Error::InvalidArgument(format!(
                "simplex {t} out of range ({} simplices)",
                self.num_simplices()
            )));
        }
        let m = self.signed_measure_of(self.simplex(t));
        if m <= T::zero() {
            return Err(Error::DegenerateSimplex { simplex: t, measure: m.as_f64() });
        }
        Ok(m)
    }

    pub fn measures(&self) -> Vec<T> {
        self.simplices().map(|s| self.signed_measure_of(s)).collect()
    }

    pub fn total_measure(&self) -> T {
        self.measures().into_iter().fold(T::zero(), |a, b| a + b)
    }

    fn signed_measure_of(&self, s: &[usize]) -> T {
        let d = self.dim;
        let x0 = self.vertex(s[0]);
        let mut e = [[T::zero(); 3]; 3];
        for (j, &v) in s[1..].iter().enumerate() {
            let xj = self.vertex(v);
            for c in 0..d {
                e[c][j] = xj[c] - x0[c];
            }
        }
        match d {
            1 => e[0][0],
            2 => (e[0][0] * e[1][1] - e[0][1] * e[1][0]) / T::lit(2.0),
            _ => {
                let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                    - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                    + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
                det / T::lit(6.0)
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::max_value().unwrap(); self.dim];
        let mut hi = vec![T::min_value().unwrap(); self.dim];
        for p in self.vertices.chunks(self.dim) {
            for c in 0..self.dim {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> T {
        let (lo, hi) = self.bbox();
        lo.iter()
            .zip(&hi)
            .fold(T::zero(), |s, (a, b)| s + (*b - *a) * (*b - *a))
            .sqrt()
    }

    /// Circumradius of simplex `t`.
    pub fn circumradius(&self, t: usize) -> T {
        let d = self.dim;
        let pts = self.simplex_points(t);
        // 2 (x_j - x_0) . c = |x_j - x_0|^2, c relative to x_0
        let mut a = [[T::zero(); 3]; 3];
        let mut b = [T::zero(); 3];
        for j in 0..d {
            let mut sq = T::zero();
            for c in 0..d {
                let e = pts[j + 1][c] - pts[0][c];
                a[j][c] = e * T::lit(2.0);
                sq += e * e;
            }
            b[j] = sq;
        }
        match solve_small(d, a, b) {
            Some(c) => c[..d].iter().fold(T::zero(), |s, x| s + *x * *x).sqrt(),
            None => T::zero(),
        }
    }

    pub fn max_circumradius(&self) -> T {
        (0..self.num_simplices()).fold(T::zero(), |m, t| m.max(self.circumradius(t)))
    }

    /// Facets incident to exactly one simplex, as sorted vertex tuples.
    pub fn boundary_facets(&self) -> Vec<Vec<usize>> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut order = Vec::new();
        for s in self.simplices() {
            for skip in 0..s.len() {
                let mut f: Vec<usize> =
                    s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                f.sort_unstable();
                let c = count.entry(f.clone()).or_insert(0);
                if *c == 0 {
                    order.push(f);
                }
                *c += 1;
            }
        }
        order.into_iter().filter(|f| count[f] == 1).collect()
    }

    /// Vertices incident to a boundary facet.
    pub fn boundary_vertices(&self) -> BTreeSet<usize> {
        self.boundary_facets().into_iter().flatten().collect()
    }

    fn check_closed_boundary(&self) -> Result<()> {
        if self.dim < 2 {
            return Ok(());
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for f in self.boundary_facets() {
            for skip in 0..f.len() {
                let r: Vec<usize> =
                    f.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        if ridges.values().any(|c| c % 2 != 0) {
            return Err(Error::OpenBoundary);
        }
        Ok(())
    }

    /// Mesh made of the simplices for which `keep` holds, with unreferenced
    /// vertices dropped (remaining vertices keep their relative order).
    pub fn submesh(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let mut map = vec![usize::MAX; self.num_vertices()];
        let kept: Vec<usize> = (0..self.num_simplices()).filter(|&t| keep(t)).collect();
        for &t in &kept {
            for &v in self.simplex(t) {
                map[v] = 0;
            }
        }
        let mut vertices = Vec::new();
        let mut next = 0;
        for (v, m) in map.iter_mut().enumerate() {
            if *m == 0 {
                *m = next;
                next += 1;
                vertices.extend_from_slice(self.vertex(v));
            }
        }
        let simplices = kept.iter().flat_map(|&t| self.simplex(t).iter().map(|&v| map[v])).collect();
        Self::new(self.dim, vertices, simplices)
    }

    /// Copy with every vertex moved by `f`.
    pub fn map_vertices(&self, f: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        let vertices = self.vertices.chunks(self.dim).flat_map(f).collect();
        Self::new(self.dim, vertices, self.simplices.clone())
    }

    /// Centroid of simplex `t`.
    pub fn centroid(&self, t: usize) -> Vec<T> {
        let k = T::of(self.dim + 1);
        let mut c = vec![T::zero(); self.dim];
        for p in self.simplex_points(t) {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += *pi;
            }
        }
        c.iter().map(|x| *x / k).collect()
    }
}

/// Prescribed value at one vertex of one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletValue<T> {
    pub subdomain: usize,
    pub vertex: usize,
    pub value: T,
}

impl<T> DirichletValue<T> {
    pub fn new(subdomain: usize, vertex: usize, value: T) -> Self {
        Self { subdomain, vertex, value }
    }
}

/// Ordered list of overlapping subdomain meshes plus Dirichlet data.
#[derive(Debug, Clone)]
pub struct DeconstructedDomain<T> {
    subdomains: Vec<SimplicialMesh<T>>,
    dirichlet: Vec<DirichletValue<T>>,
}

impl<T: Real> DeconstructedDomain<T> {
    pub fn new(subdomains: Vec<SimplicialMesh<T>>, dirichlet: Vec<DirichletValue<T>>) -> Result<Self> {
        let Some(first) = subdomains.first() else {
            return Err(Error::InvalidArgument("a domain needs at least one subdomain".into()));
        };
        let dim = first.dim();
        if let Some(k) = subdomains.iter().position(|m| m.dim() != dim) {
            return Err(Error::Dimension(format!(
                "subdomain {k} has dimension {}, expected {dim}",
                subdomains[k].dim()
            )));
        }
        let boundaries: Vec<BTreeSet<usize>> =
            subdomains.iter().map(|m| m.boundary_vertices()).collect();
        for d in &dirichlet {
            if d.subdomain >= subdomains.len() {
                return Err(Error::InvalidArgument(format!(
                    "Dirichlet value names subdomain {} of {}",
                    d.subdomain,
                    subdomains.len()
                )));
            }
            if !boundaries[d.subdomain].contains(&d.vertex) {
                return Err(Error::InvalidArgument(format!(
                    "Dirichlet vertex {} is not on the boundary of subdomain {}",
                    d.vertex, d.subdomain
                )));
            }
        }
        Ok(Self { subdomains, dirichlet })
    }

    pub fn subdomains(&self) -> &[SimplicialMesh<T>] {
        &self.subdomains
    }

    pub fn subdomain(&self, k: usize) -> &SimplicialMesh<T> {
        &self.subdomains[k]
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.subdomains[0].dim()
    }

    pub fn dirichlet(&self) -> &[DirichletValue<T>] {
        &self.dirichlet
    }

    /// Same meshes with different Dirichlet data.
    pub fn with_dirichlet(&self, dirichlet: Vec<DirichletValue<T>>) -> Result<Self> {
        Self::new(self.subdomains.clone(), dirichlet)
    }

    /// Global index of the first vertex of each subdomain, plus the total
    /// vertex count as the last entry.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.len() + 1);
        let mut acc = 0;
        for m in &self.subdomains {
            off.push(acc);
            acc += m.num_vertices();
        }
        off.push(acc);
        off
    }

    pub fn total_vertices(&self) -> usize {
        self.subdomains.iter().map(|m| m.num_vertices()).sum()
    }

    /// Dirichlet data as `(global index, value)` pairs.
    pub fn dirichlet_global(&self) -> Vec<(usize, T)> {
        let off = self.offsets();
        self.dirichlet.iter().map(|d| (off[d.subdomain] + d.vertex, d.value)).collect()
    }

    /// Global vertex coordinates stacked subdomain by subdomain.
    pub fn global_coordinates(&self) -> Vec<&[T]> {
        self.subdomains.iter().flat_map(|m| (0..m.num_vertices()).map(move |v| m.vertex(v))).collect()
    }

    /// Splits a global vector into per-subdomain slices.
    pub fn split<'a, V>(&self, global: &'a [V]) -> Vec<&'a [V]> {
        let off = self.offsets();
        off.windows(2).map(|w| &global[w[0]..w[1]]).collect()
    }
}
