//! Equality constraints tying each subdomain's values to the interpolant of
//! another subdomain: at every overlapping vertex, at boundary vertices only,
//! or at boundary vertices thinned to one row per vertex.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::SparseMatrix;
use crate::geometry::DomainLocator;
use crate::mesh::DeconstructedDomain;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CouplingMode {
    AllVertices,
    #[default]
    BoundaryOnly,
    BoundaryOnlyThinned,
}

impl CouplingMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::AllVertices => "all_vertices",
            Self::BoundaryOnly => "boundary_only",
            Self::BoundaryOnlyThinned => "boundary_only_thinned",
        }
    }
}

impl fmt::Display for CouplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_vertices" => Ok(Self::AllVertices),
            "boundary_only" => Ok(Self::BoundaryOnly),
            "boundary_only_thinned" => Ok(Self::BoundaryOnlyThinned),
            _ => Err(Error::Config(format!("unknown coupling mode `{s}`"))),
        }
    }
}

/// `u[target] = sum_j coefficients[j] * u[anchor_vertices[j]]`, the anchor
/// vertices being the corners of `anchor_simplex` in `anchor_subdomain`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow<T> {
    pub target_subdomain: usize,
    pub target_vertex: usize,
    pub anchor_subdomain: usize,
    pub anchor_simplex: usize,
    pub anchor_vertices: Vec<usize>,
    pub coefficients: Vec<T>,
}

impl<T: Real> ConstraintRow<T> {
    fn target(&self) -> (usize, usize) {
        (self.target_subdomain, self.target_vertex)
    }

    fn involved(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        std::iter::once(self.target())
            .chain(self.anchor_vertices.iter().map(move |&v| (self.anchor_subdomain, v)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<T> {
    pub rows: Vec<ConstraintRow<T>>,
    pub mode: CouplingMode,
}

/// Rounds barycentric coordinates to a dyadic grid fine enough to be
/// harmless, then closes the sum on the first coordinate. Every partial sum
/// of `1 - sum c_j` is then exact in floating point, so materialized rows
/// annihilate constants exactly in any summation order.
fn snap_coefficients<T: Real>(coords: &mut [T]) {
    let q = T::default_epsilon() * T::lit(16.0);
    for c in coords.iter_mut().skip(1) {
        *c = (*c / q).round() * q;
    }
    let rest = coords[1..].iter().fold(T::zero(), |s, c| s + *c);
    coords[0] = T::one() - rest;
}

fn pinned<T: Real>(domain: &DeconstructedDomain<T>) -> BTreeSet<(usize, usize)> {
    domain.dirichlet().iter().map(|d| (d.subdomain, d.vertex)).collect()
}

fn anchored_rows<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
    targets: impl Fn(usize) -> Vec<usize>,
) -> Vec<ConstraintRow<T>> {
    let pinned = pinned(domain);
    let mut rows = Vec::new();
    for a in 0..domain.len() {
        let verts: Vec<usize> = targets(a).into_iter().filter(|v| !pinned.contains(&(a, *v))).collect();
        let mesh = domain.subdomain(a);
        for b in (0..domain.len()).filter(|&b| b != a) {
            for &v in &verts {
                if let Some(loc) = locator.locate(domain, b, mesh.vertex(v)) {
                    let mut coefficients = loc.coords;
                    snap_coefficients(&mut coefficients);
                    rows.push(ConstraintRow {
                        target_subdomain: a,
                        target_vertex: v,
                        anchor_subdomain: b,
                        anchor_simplex: loc.simplex,
                        anchor_vertices: domain.subdomain(b).simplex(loc.simplex).to_vec(),
                        coefficients,
                    });
                }
            }
        }
    }
    rows
}

/// One row for every vertex of every subdomain `a` lying in another
/// subdomain `b`, for each ordered pair `a != b`.
pub fn all_vertex_constraints<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
) -> ConstraintSet<T> {
    let rows = anchored_rows(domain, locator, |a| (0..domain.subdomain(a).num_vertices()).collect());
    ConstraintSet { rows, mode: CouplingMode::AllVertices }
}

/// As [`all_vertex_constraints`], restricted to boundary vertices of `a`.
pub fn boundary_only_constraints<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
) -> ConstraintSet<T> {
    let rows = anchored_rows(domain, locator, |a| domain.subdomain(a).boundary_vertices().into_iter().collect());
    ConstraintSet { rows, mode: CouplingMode::BoundaryOnly }
}

/// Keeps one row per target vertex: the one whose involved vertices are,
/// on average, least saturated by the input set.
pub fn thin_constraints<T: Real>(cs: &ConstraintSet<T>) -> Result<ConstraintSet<T>> {
    if cs.mode != CouplingMode::BoundaryOnly {
        return Err(Error::InvalidArgument(format!("thinning expects boundary_only rows, got {}", cs.mode)));
    }
    let mut score: HashMap<(usize, usize), usize> = HashMap::new();
    for row in &cs.rows {
        for key in row.involved() {
            *score.entry(key).or_default() += 1;
        }
    }
    let row_score = |row: &ConstraintRow<T>| {
        let (sum, count) = row.involved().fold((0usize, 0usize), |(s, c), k| (s + score[&k], c + 1));
        sum as f64 / count as f64
    };

    let mut best: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, row) in cs.rows.iter().enumerate() {
        best.entry(row.target())
            .and_modify(|j| {
                let other = &cs.rows[*j];
                let key = |r: &ConstraintRow<T>, idx: usize| (row_score(r), r.anchor_subdomain, r.anchor_simplex, idx);
                if key(row, i).partial_cmp(&key(other, *j)) == Some(std::cmp::Ordering::Less) {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let mut keep: Vec<usize> = best.into_values().collect();
    keep.sort_unstable();
    Ok(ConstraintSet {
        rows: keep.into_iter().map(|i| cs.rows[i].clone()).collect(),
        mode: CouplingMode::BoundaryOnlyThinned,
    })
}

/// Builds the constraint set of the requested mode.
pub fn build<T: Real>(
    domain: &DeconstructedDomain<T>,
    locator: &DomainLocator<T>,
    mode: CouplingMode,
) -> ConstraintSet<T> {
    match mode {
        CouplingMode::AllVertices => all_vertex_constraints(domain, locator),
        CouplingMode::BoundaryOnly => boundary_only_constraints(domain, locator),
        CouplingMode::BoundaryOnlyThinned => {
            thin_constraints(&boundary_only_constraints(domain, locator)).expect("boundary_only input")
        }
    }
}

impl<T: Real> ConstraintSet<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct `(subdomain, vertex)` targets, sorted.
    pub fn targets(&self) -> BTreeSet<(usize, usize)> {
        self.rows.iter().map(|r| r.target()).collect()
    }

    /// Materializes the rows against the global numbering given by
    /// `offsets` (as returned by [`DeconstructedDomain::offsets`]).
    pub fn matrix(&self, offsets: &[usize], n: usize) -> SparseMatrix<T> {
        constraint_matrix(self, offsets, n)
    }

    /// `target_subdomain,target_vertex,anchor_subdomain,anchor_simplex,c0,...,cd`
    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = String::from("target_subdomain,target_vertex,anchor_subdomain,anchor_simplex");
        for j in 0..=dim {
            out.push_str(&format!(",c{j}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}",
                r.target_subdomain, r.target_vertex, r.anchor_subdomain, r.anchor_simplex
            ));
            for c in &r.coefficients {
                out.push_str(&format!(",{c:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `+1` at the target's global column, `-c_j` at the anchor columns.
pub fn constraint_matrix<T: Real>(cs: &ConstraintSet<T>, offsets: &[usize], n: usize) -> SparseMatrix<T> {
    let mut trip = Vec::with_capacity(cs.rows.len() * 5);
    for (i, r) in cs.rows.iter().enumerate() {
        trip.push((i, offsets[r.target_subdomain] + r.target_vertex, T::one()));
        for (&v, &c) in r.anchor_vertices.iter().zip(&r.coefficients) {
            trip.push((i, offsets[r.anchor_subdomain] + v, -c));
        }
    }
    SparseMatrix::from_triplets(cs.rows.len(), n, &trip)
}
