use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::DomainLocator;
use crate::mesh::{generate_annulus, generate_disk, generate_segment, load_mesh, DirichletValue};
use crate::{Domain, Mesh};

use super::config::{ExperimentConfig, Pde, Scenario};

/// Closed-form solution evaluated at a vertex position.
pub type Reference = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One resolution of a scenario, ready to solve.
pub struct Instance {
    pub domain: Domain,
    pub pde: Pde,
    pub source: f64,
    /// Prescribed values of `z ≈ -Δu` (bi-Laplace only).
    pub z_dirichlet: Vec<DirichletValue<f64>>,
    pub reference: Option<Reference>,
}

/// Angular samples per ring interval of the annulus scenarios; makes the
/// elements at mid radius roughly as wide as they are tall.
pub const ANNULUS_ANGULAR_FACTOR: usize = 10;
/// Half-width of the overlap strip of the half-disk scenario.
pub const HALF_DISK_OVERLAP: f64 = 0.2;

fn pin_ends(n: usize, value: f64) -> Vec<DirichletValue<f64>> {
    vec![DirichletValue::new(0, 0, value), DirichletValue::new(1, n - 1, value)]
}

/// `[0, 2/3]` and `[1/3, 1]` with `n` vertices each.
pub fn two_segments(n: usize) -> Result<Domain> {
    Domain::new(
        vec![generate_segment(0.0, 2.0 / 3.0, n)?, generate_segment(1.0 / 3.0, 1.0, n)?],
        pin_ends(n, 0.0),
    )
}

/// Two meshes of the annulus `1 <= r <= 2` at resolution `n`: `n` and
/// `n + 1` ring intervals, `10 n` angular samples, the second rotated by
/// half an angular step so no interior vertex of one mesh lies on a ring
/// of the other.
/// Every vertex on `r = 1` or `r = 2` of either mesh carries the given
/// Dirichlet value.
pub fn two_annuli(n: usize, inner_value: f64, outer_value: f64) -> Result<Domain> {
    let n_t = ANNULUS_ANGULAR_FACTOR * n;
    let meshes = vec![
        generate_annulus(1.0, 2.0, n, n_t, 0.0)?,
        generate_annulus(1.0, 2.0, n + 1, n_t, PI / n_t as f64)?,
    ];
    let dirichlet = (0..2)
        .flat_map(|k| {
            (0..n_t).flat_map(move |j| {
                [DirichletValue::new(k, j, inner_value), DirichletValue::new(k, (n + k) * n_t + j, outer_value)]
            })
        })
        .collect();
    Domain::new(meshes, dirichlet)
}

/// Unit disk split into `x <= HALF_DISK_OVERLAP` and `x >= -HALF_DISK_OVERLAP`
/// halves, each cut (by triangle centroid) from its own disk mesh with
/// `n` rings; the second disk is rotated so the meshes do not match.
pub fn half_disks(n: usize) -> Result<Vec<Mesh>> {
    let left = generate_disk(1.0, n, 0.0)?;
    let right = generate_disk(1.0, n, PI / (6 * n) as f64)?;
    Ok(vec![
        left.submesh(|t| left.centroid(t)[0] <= HALF_DISK_OVERLAP)?,
        right.submesh(|t| right.centroid(t)[0] >= -HALF_DISK_OVERLAP)?,
    ])
}

/// Dirichlet data `value` at every boundary vertex of the union.
pub fn exterior_dirichlet(meshes: Vec<Mesh>, value: f64) -> Result<Domain> {
    let bare = Domain::new(meshes, vec![])?;
    let locator = DomainLocator::new(&bare);
    let pins = locator
        .exterior_boundary_vertices(&bare)
        .into_iter()
        .map(|(k, v)| DirichletValue::new(k, v, value))
        .collect();
    bare.with_dirichlet(pins)
}

fn parabola(f: f64) -> Reference {
    Box::new(move |p| f * p[0] * (1.0 - p[0]) / 2.0)
}

fn quartic(f: f64) -> Reference {
    Box::new(move |p| {
        let s = p[0];
        f * (s.powi(4) - 2.0 * s.powi(3) + s) / 24.0
    })
}

/// `u(r) = (r² - 1) / 4 - 3 ln r / (4 ln 2)`: `Δu = 1`, zero at `r = 1, 2`.
pub fn annulus_poisson_reference(r: f64) -> f64 {
    (r * r - 1.0) / 4.0 - 3.0 * r.ln() / (4.0 * LN_2)
}

impl ExperimentConfig {
    /// Builds the scenario at resolution `n` (ignored for custom meshes).
    pub fn instance(&self, n: usize) -> Result<Instance> {
        let f_or = |default: f64| self.source.unwrap_or(default);
        let inst = match &self.scenario {
            Scenario::Seg1dPoisson => {
                let f = f_or(1.0);
                Instance {
                    domain: two_segments(n)?,
                    pde: Pde::Poisson,
                    source: f,
                    z_dirichlet: vec![],
                    reference: Some(parabola(f)),
                }
            }
            Scenario::Seg1dBilaplace => {
                let f = f_or(1.0);
                Instance {
                    domain: two_segments(n)?,
                    pde: Pde::Bilaplace,
                    source: f,
                    z_dirichlet: pin_ends(n, 0.0),
                    reference: Some(quartic(f)),
                }
            }
            Scenario::Annulus2dLaplace | Scenario::Annulus2dPoisson => {
                let laplace = self.scenario == Scenario::Annulus2dLaplace;
                let f = f_or(if laplace { 0.0 } else { -1.0 });
                let outer = if laplace { 1.0 } else { 0.0 };
                Instance {
                    domain: two_annuli(n, 0.0, outer)?,
                    pde: Pde::Poisson,
                    source: f,
                    z_dirichlet: vec![],
                    reference: Some(Box::new(move |p: &[f64]| {
                        let r = p[0].hypot(p[1]);
                        outer * r.ln() / LN_2 - f * annulus_poisson_reference(r)
                    })),
                }
            }
            Scenario::DuplicatedMesh => {
                let pde = self.pde.unwrap_or(Pde::Poisson);
                let f = f_or(1.0);
                let m = generate_segment(0.0, 1.0, n)?;
                let domain = Domain::new(
                    vec![m.clone(), m],
                    vec![
                        DirichletValue::new(0, 0, 0.0),
                        DirichletValue::new(0, n - 1, 0.0),
                        DirichletValue::new(1, 0, 0.0),
                        DirichletValue::new(1, n - 1, 0.0),
                    ],
                )?;
                let z_dirichlet = if pde == Pde::Bilaplace { domain.dirichlet().to_vec() } else { vec![] };
                let reference = match pde {
                    Pde::Poisson => Some(parabola(f)),
                    Pde::Bilaplace => Some(quartic(f)),
                    Pde::Heat => None,
                };
                Instance { domain, pde, source: f, z_dirichlet, reference }
            }
            Scenario::HalfDisk2d => {
                let f = f_or(1.0);
                let pde = self.pde.unwrap_or(Pde::Poisson);
                let domain = exterior_dirichlet(half_disks(n)?, 0.0)?;
                let z_dirichlet = if pde == Pde::Bilaplace { domain.dirichlet().to_vec() } else { vec![] };
                let reference: Option<Reference> = match pde {
                    Pde::Poisson => Some(Box::new(move |p: &[f64]| f * (1.0 - p[0] * p[0] - p[1] * p[1]) / 4.0)),
                    _ => None,
                };
                Instance { domain, pde, source: f, z_dirichlet, reference }
            }
            Scenario::Custom(paths) => {
                let meshes = paths
                    .iter()
                    .map(|p| {
                        let text = std::fs::read_to_string(p)?;
                        load_mesh(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let domain = exterior_dirichlet(meshes, self.boundary_value)?;
                let pde = self.pde.unwrap_or(Pde::Poisson);
                let z_dirichlet = if pde == Pde::Bilaplace {
                    domain.dirichlet().iter().map(|d| DirichletValue::new(d.subdomain, d.vertex, 0.0)).collect()
                } else {
                    vec![]
                };
                Instance { domain, pde, source: f_or(0.0), z_dirichlet, reference: None }
            }
        };
        Ok(inst)
    }
}
