//! Experiment harness: declarative configs, built-in scenarios with closed
//! form references, and the sweeps behind the CLI subcommands. Everything
//! here is `f64`.

mod config;
mod scenario;

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::SparseMatrix;
use crate::solver::{constrained_modes, solve_kkt, Discretization, SolveReport, Source};
use crate::{Domain, Locator};

pub use config::{parse_quadrature, DisplayQuadrature, ExperimentConfig, Pde, Scenario};
pub use scenario::{
    annulus_poisson_reference, exterior_dirichlet, half_disks, two_annuli, two_segments, Instance, Reference,
    ANNULUS_ANGULAR_FACTOR, HALF_DISK_OVERLAP,
};

/// Mesh size: the largest element circumradius over all subdomains.
pub fn mesh_size(domain: &Domain) -> f64 {
    domain.subdomains().iter().map(|m| m.max_circumradius()).fold(0.0, f64::max)
}

/// Largest vertex-wise deviation from the reference.
pub fn vertex_error(domain: &Domain, u: &[f64], reference: &Reference) -> f64 {
    domain.global_coordinates().iter().zip(u).map(|(p, x)| (x - reference(p)).abs()).fold(0.0, f64::max)
}

/// Runs the configured PDE on an already assembled discretization.
pub fn solve_instance(cfg: &ExperimentConfig, inst: &Instance, disc: &Discretization<f64>) -> Result<SolveReport<f64>> {
    match inst.pde {
        Pde::Poisson => disc.poisson(&inst.domain, &Source::Constant(inst.source)),
        Pde::Heat => disc.implicit_step(&inst.domain, cfg.dt, &vec![cfg.initial; disc.size()]),
        Pde::Bilaplace => {
            disc.bilaplace(&inst.domain, cfg.bilaplace_coupling, &Source::Constant(inst.source), &inst.z_dirichlet)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub n_total: usize,
    pub error_linf: Option<f64>,
    pub observed_order: Option<f64>,
    pub constraint_rows: usize,
    pub solve_status: String,
}

fn observed_order(h: (f64, f64), e: (f64, f64)) -> Option<f64> {
    (e.0 > 0.0 && e.1 > 0.0 && h.0 != h.1).then(|| (e.0 / e.1).ln() / (h.0 / h.1).ln())
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Solves at every resolution and compares with the scenario's closed form.
/// A failed solve is recorded in its row and the sweep continues.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in &cfg.resolutions {
        let inst = cfg.instance(n)?;
        let Some(reference) = &inst.reference else {
            return Err(Error::Config(format!("scenario {} has no closed-form reference", cfg.scenario.name())));
        };
        let h = mesh_size(&inst.domain);
        let n_total = inst.domain.total_vertices();
        let mut row =
            ConvergenceRow { h, n_total, error_linf: None, observed_order: None, constraint_rows: 0, solve_status: "ok".into() };
        match Discretization::new(&inst.domain, &cfg.quadrature, cfg.coupling) {
            Ok(disc) => {
                row.constraint_rows = disc.constraints.len();
                match solve_instance(cfg, &inst, &disc) {
                    Ok(rep) => row.error_linf = Some(vertex_error(&inst.domain, &rep.u, reference)),
                    Err(e) => row.solve_status = format!("failed: {e}"),
                }
            }
            Err(e) => row.solve_status = format!("failed: {e}"),
        }
        if let (Some(prev), Some(e)) = (rows.last(), row.error_linf) {
            row.observed_order = prev.error_linf.and_then(|p| observed_order((prev.h, h), (p, e)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("h,n_total,error_linf,observed_order,constraint_rows,solve_status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.h,
            r.n_total,
            opt(r.error_linf),
            opt(r.observed_order),
            r.constraint_rows,
            csv_field(&r.solve_status)
        );
    }
    out
}

/// Overlap vertices: those covered by at least two subdomains, as global indices.
pub fn overlap_vertices(domain: &Domain, locator: &Locator) -> Vec<usize> {
    domain
        .global_coordinates()
        .iter()
        .enumerate()
        .filter(|(_, p)| locator.coverage_count(domain, p) >= 2)
        .map(|(i, _)| i)
        .collect()
}

/// Largest deviation of `u` from its least-squares affine fit over the
/// given vertices, divided by the range of `u` over the whole domain.
pub fn affine_fit_residual(domain: &Domain, u: &[f64], vertices: &[usize]) -> Result<f64> {
    if vertices.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let d = domain.dim();
    let coords = domain.global_coordinates();
    let a = DMatrix::from_fn(vertices.len(), d + 1, |i, j| if j == d { 1.0 } else { coords[vertices[i]][j] });
    let b = DVector::from_iterator(vertices.len(), vertices.iter().map(|&i| u[i]));
    let fit = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&a * fit - &b).amax();
    let (lo, hi) = u.iter().fold((f64::MAX, f64::MIN), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let range = hi - lo;
    Ok(if range > 0.0 { residual / range } else { residual })
}

/// First-derivative jump at each subdomain end point lying inside another
/// 1D subdomain: the slope of the end point's own element against the
/// slope of the element that contains it in the other subdomain. Returns
/// `(subdomain, vertex, jump)` triples.
pub fn derivative_jumps(domain: &Domain, locator: &Locator, u: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
    if domain.dim() != 1 {
        return Err(Error::LowOrderDimension(domain.dim()));
    }
    let off = domain.offsets();
    let slope = |k: usize, e: &[usize]| {
        let m = domain.subdomain(k);
        (u[off[k] + e[1]] - u[off[k] + e[0]]) / (m.vertex(e[1])[0] - m.vertex(e[0])[0])
    };
    let mut out = Vec::new();
    for (a, mesh) in domain.subdomains().iter().enumerate() {
        for v in mesh.boundary_vertices() {
            let own = mesh.simplices().find(|s| s.contains(&v)).expect("referenced vertex");
            for b in (0..domain.len()).filter(|&b| b != a) {
                if let Some(loc) = locator.locate(domain, b, mesh.vertex(v)) {
                    let other = domain.subdomain(b).simplex(loc.simplex);
                    out.push((a, v, (slope(a, own) - slope(b, other)).abs()));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub h: f64,
    pub n_total: usize,
    pub fit_residual: f64,
    /// Largest first-derivative jump (1D only).
    pub derivative_jump: Option<f64>,
}

/// Locking diagnostics at every resolution.
pub fn locking_probe(cfg: &ExperimentConfig) -> Result<Vec<ProbeRow>> {
    let resolutions = if matches!(cfg.scenario, Scenario::Custom(_)) { &cfg.resolutions[..1] } else { &cfg.resolutions[..] };
    resolutions
        .iter()
        .map(|&n| {
            let inst = cfg.instance(n)?;
            let disc = Discretization::new(&inst.domain, &cfg.quadrature, cfg.coupling)?;
            let rep = solve_instance(cfg, &inst, &disc)?;
            let overlap = overlap_vertices(&inst.domain, &disc.locator);
            let fit_residual = affine_fit_residual(&inst.domain, &rep.u, &overlap)?;
            let derivative_jump = (inst.domain.dim() == 1)
                .then(|| derivative_jumps(&inst.domain, &disc.locator, &rep.u))
                .transpose()?
                .map(|j| j.iter().map(|t| t.2).fold(0.0, f64::max));
            Ok(ProbeRow { h: mesh_size(&inst.domain), n_total: inst.domain.total_vertices(), fit_residual, derivative_jump })
        })
        .collect()
}

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("h,n_total,fit_residual,derivative_jump\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.h, r.n_total, r.fit_residual, opt(r.derivative_jump));
    }
    out
}

/// Constrained eigenvalues of the first resolution; Dirichlet vertices are
/// held at zero.
pub fn run_modes(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let inst = cfg.instance(cfg.resolutions[0])?;
    let disc = Discretization::new(&inst.domain, &cfg.quadrature, cfg.coupling)?;
    let a = with_pins(&disc.coupling, &inst.domain);
    let modes = constrained_modes(&disc.operators.laplacian, &disc.operators.mass, &a, cfg.modes)?;
    Ok(modes.into_iter().map(|m| m.0).collect())
}

/// Appends a unit row for every Dirichlet vertex.
pub fn with_pins(c: &SparseMatrix<f64>, domain: &Domain) -> SparseMatrix<f64> {
    let mut trip = c.triplets();
    for (k, (i, _)) in domain.dirichlet_global().into_iter().enumerate() {
        trip.push((c.rows() + k, i, 1.0));
    }
    SparseMatrix::from_triplets(c.rows() + domain.dirichlet().len(), c.cols(), &trip)
}

pub fn modes_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("mode,eigenvalue\n");
    for (i, l) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{i},{l}");
    }
    out
}

/// Constraint rows of the first resolution, as CSV.
pub fn run_constraints(cfg: &ExperimentConfig) -> Result<String> {
    let inst = cfg.instance(cfg.resolutions[0])?;
    let locator = Locator::new(&inst.domain);
    Ok(crate::coupling::build(&inst.domain, &locator, cfg.coupling).to_csv(inst.domain.dim()))
}

/// Solution at the first resolution: `subdomain,vertex,x[,y[,z]],u`.
pub fn run_solve(cfg: &ExperimentConfig) -> Result<String> {
    let inst = cfg.instance(cfg.resolutions[0])?;
    let disc = Discretization::new(&inst.domain, &cfg.quadrature, cfg.coupling)?;
    let rep = solve_instance(cfg, &inst, &disc)?;
    let axes = ["x", "y", "z"];
    let mut out = String::from("subdomain,vertex");
    for a in &axes[..inst.domain.dim()] {
        out.push(',');
        out.push_str(a);
    }
    out.push_str(",u\n");
    for (k, mesh) in inst.domain.subdomains().iter().enumerate() {
        for (v, u) in rep.subdomain(k).iter().enumerate() {
            let _ = write!(out, "{k},{v}");
            for x in mesh.vertex(v) {
                let _ = write!(out, ",{x}");
            }
            let _ = writeln!(out, ",{u}");
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyRow {
    pub omega: f64,
    pub h: f64,
    pub n_total: usize,
    pub error_linf: f64,
}

/// Weak coupling: `min 1/2 u^T L u - u^T M f + omega |C u|^2` for each
/// configured weight and resolution, Poisson scenarios only.
pub fn penalty_sweep(cfg: &ExperimentConfig) -> Result<Vec<PenaltyRow>> {
    let mut rows = Vec::new();
    for &omega in &cfg.penalty_weights {
        for &n in &cfg.resolutions {
            let inst = cfg.instance(n)?;
            if inst.pde != Pde::Poisson {
                return Err(Error::Config("the penalty sweep supports Poisson scenarios only".into()));
            }
            let reference = inst.reference.as_ref().ok_or_else(|| Error::Config("no closed-form reference".into()))?;
            let disc = Discretization::new(&inst.domain, &cfg.quadrature, cfg.coupling)?;
            let c = &disc.coupling;
            let q = disc.operators.laplacian.add_scaled(&c.transpose().mul(c), 2.0 * omega);
            let b = disc.operators.mass.mul_vec(&vec![inst.source; disc.size()]);
            let rep = solve_kkt(&q, &b, &SparseMatrix::zeros(0, disc.size()), &[], &inst.domain.dirichlet_global())?;
            rows.push(PenaltyRow {
                omega,
                h: mesh_size(&inst.domain),
                n_total: inst.domain.total_vertices(),
                error_linf: vertex_error(&inst.domain, &rep.u, reference),
            });
        }
    }
    Ok(rows)
}

pub fn penalty_csv(rows: &[PenaltyRow]) -> String {
    let mut out = String::from("omega,h,n_total,error_linf\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.omega, r.h, r.n_total, r.error_linf);
    }
    out
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text, Path::new(".")).unwrap()
    }

    #[test]
    fn convergence_table_for_the_parabola() {
        let cfg = config("scenario = seg1d_poisson\nresolutions = 20, 40\n");
        let rows = run_convergence(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].observed_order.is_none());
        assert!(rows[1].observed_order.unwrap() > 1.8);
        assert!(rows.iter().all(|r| r.solve_status == "ok" && r.constraint_rows == 2));
        assert_eq!((rows[0].n_total, rows[1].n_total), (40, 80));
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with("h,n_total,error_linf,observed_order,constraint_rows,solve_status\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().contains(",,2,ok"));
    }

    #[test]
    fn observed_order_of_a_clean_halving() {
        assert!((observed_order((0.2, 0.1), (4e-2, 1e-2)).unwrap() - 2.0).abs() < 1e-12);
        assert!(observed_order((0.2, 0.1), (0.0, 1e-2)).is_none());
    }

    #[test]
    fn affine_data_has_zero_fit_residual() {
        let d = two_segments(9).unwrap();
        let u: Vec<f64> = d.global_coordinates().iter().map(|p| 3.0 * p[0] - 1.0).collect();
        let locator = Locator::new(&d);
        let overlap = overlap_vertices(&d, &locator);
        assert!(!overlap.is_empty());
        assert!(affine_fit_residual(&d, &u, &overlap).unwrap() < 1e-14);
        assert!(matches!(affine_fit_residual(&d, &u, &[]), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn quadratic_data_leaves_curvature() {
        // s(1-s)/2 on [1/3, 2/3] (half-width a = 1/6): the best line misses
        // by a^2/3 = 1/108 at the ends, over a global range of 1/8
        let d = two_segments(301).unwrap();
        let u: Vec<f64> = d.global_coordinates().iter().map(|p| p[0] * (1.0 - p[0]) / 2.0).collect();
        let overlap = overlap_vertices(&d, &Locator::new(&d));
        let fit = affine_fit_residual(&d, &u, &overlap).unwrap();
        assert!((fit - 8.0 / 108.0).abs() < 1e-3, "{fit}");
    }

    #[test]
    fn jumps_vanish_for_a_global_line() {
        let d = two_segments(11).unwrap();
        let u: Vec<f64> = d.global_coordinates().iter().map(|p| 2.0 * p[0]).collect();
        let jumps = derivative_jumps(&d, &Locator::new(&d), &u).unwrap();
        assert_eq!(jumps.len(), 2);
        assert!(jumps.iter().all(|j| j.2 < 1e-12));
    }

    #[test]
    fn probe_reports_curvature_for_boundary_only() {
        let rows = locking_probe(&config("scenario = seg1d_poisson\nresolutions = 20, 40\n")).unwrap();
        assert!(rows.iter().all(|r| r.fit_residual >= 1e-3 && r.derivative_jump.is_some()));
        let csv = probe_csv(&rows);
        assert!(csv.starts_with("h,n_total,fit_residual,derivative_jump\n"));
    }

    #[test]
    fn solve_csv_lists_every_vertex() {
        let csv = run_solve(&config("scenario = halfdisk2d\nresolutions = 3, 4\n")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "subdomain,vertex,x,y,u");
        let inst = config("scenario = halfdisk2d\nresolutions = 3, 4\n").instance(3).unwrap();
        assert_eq!(lines.count(), inst.domain.total_vertices());
    }

    #[test]
    fn constraints_csv_has_one_line_per_row() {
        let cfg = config("scenario = seg1d_poisson\ncoupling = all_vertices\nresolutions = 7, 9\n");
        let csv = run_constraints(&cfg).unwrap();
        let inst = cfg.instance(7).unwrap();
        let locator = Locator::new(&inst.domain);
        let rows = crate::coupling::build(&inst.domain, &locator, cfg.coupling).len();
        assert_eq!(csv.lines().count(), rows + 1);
    }

    #[test]
    fn pinned_segment_modes_approach_k_pi_squared() {
        let cfg = config("scenario = seg1d_poisson\nresolutions = 40, 80\nmodes = 3\n");
        let eig = run_modes(&cfg).unwrap();
        assert_eq!(eig.len(), 3);
        for (k, l) in eig.iter().enumerate() {
            let exact = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
            assert!((l - exact).abs() / exact < 0.05, "{eig:?}");
        }
        assert!(modes_csv(&eig).starts_with("mode,eigenvalue\n0,"));
    }

    #[test]
    fn pins_append_unit_rows() {
        let d = two_segments(5).unwrap();
        let c = SparseMatrix::<f64>::zeros(1, 10);
        let a = with_pins(&c, &d);
        assert_eq!(a.rows(), 3);
        assert_eq!(a.mul_vec(&(0..10).map(|i| i as f64).collect::<Vec<_>>()), vec![0.0, 0.0, 9.0]);
    }

    #[test]
    fn penalty_sweep_approaches_the_constrained_solve() {
        let cfg = config("scenario = seg1d_poisson\nresolutions = 20, 40\npenalty_weights = 0, 1e6\n");
        let rows = penalty_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        let exact = run_convergence(&cfg).unwrap();
        // a huge weight reproduces the hard constraints; no coupling at all is worse
        assert!((rows[3].error_linf - exact[1].error_linf.unwrap()).abs() < 1e-5);
        assert!(rows[1].error_linf > rows[3].error_linf);
        assert!(penalty_csv(&rows).starts_with("omega,h,n_total,error_linf\n"));
        let bi = config("scenario = seg1d_bilaplace\nresolutions = 20, 40\npenalty_weights = 1\n");
        assert!(matches!(penalty_sweep(&bi), Err(Error::Config(_))));
    }

    #[test]
    fn csv_output_is_reproducible() {
        let cfg = config("scenario = annulus2d_poisson\nresolutions = 2, 3\nquadrature = monte_carlo(20, 3)\n");
        let a = convergence_csv(&run_convergence(&cfg).unwrap());
        let b = convergence_csv(&run_convergence(&cfg).unwrap());
        assert_eq!(a, b);
    }
}
