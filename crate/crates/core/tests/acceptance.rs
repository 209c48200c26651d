//! End-to-end checks of the published behaviour: convergence and locking of
//! the coupling modes, constraint precision, thinning, the mixed bi-Laplace
//! couplings and its convex form, the duplicated-mesh oracle, quadrature
//! accuracy and constrained eigenvalues. Each test writes one
//! `acceptance <id> PASS|FAIL` line to stdout.

use std::f64::consts::{LN_2, PI};
use std::io::Write;

use decon::coupling::{self, CouplingMode};
use decon::fem::{assemble_global, QuadratureSpec};
use decon::harness::{self, affine_fit_residual, derivative_jumps, mesh_size, overlap_vertices};
use decon::mesh::{generate_disk, generate_segment, load_mesh, DirichletValue};
use decon::solver::{constrained_modes, BilaplaceCoupling, Discretization, Source};
use decon::{Domain, Locator, Mesh};

const SEG_RESOLUTIONS: [usize; 4] = [20, 40, 80, 160];
const ANNULUS_RESOLUTIONS: [usize; 4] = [2, 4, 8, 16];
const SYM10: QuadratureSpec = QuadratureSpec::SymmetricFixedOrder(10);

fn report(id: &str, what: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance {id:<3} {verdict}  {what}: {detail}\n");
    // written past the test harness capture so the line always shows
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{id} {what}: {detail}");
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn order(h: (f64, f64), e: (f64, f64)) -> f64 {
    (e.0 / e.1).ln() / (h.0 / h.1).ln()
}

/// Least-squares slope of `log e` against `log h`.
fn fitted_order(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn error_against(domain: &Domain, u: &[f64], exact: impl Fn(&[f64]) -> f64) -> f64 {
    domain.global_coordinates().iter().zip(u).map(|(p, v)| (v - exact(p)).abs()).fold(0.0, f64::max)
}

fn parabola(p: &[f64]) -> f64 {
    p[0] * (1.0 - p[0]) / 2.0
}

fn quartic(p: &[f64]) -> f64 {
    let s = p[0];
    (s.powi(4) - 2.0 * s.powi(3) + s) / 24.0
}

fn seg1d_poisson(n: usize, mode: CouplingMode) -> (Domain, Vec<f64>, f64) {
    let domain = harness::two_segments(n).unwrap();
    let disc = Discretization::new(&domain, &QuadratureSpec::CornerAverage, mode).unwrap();
    let u = disc.poisson(&domain, &Source::Constant(1.0)).unwrap().u;
    let fit = affine_fit_residual(&domain, &u, &overlap_vertices(&domain, &disc.locator)).unwrap();
    (domain, u, fit)
}

#[test]
fn seg1d_poisson_boundary_only_converges() {
    let mut h = Vec::new();
    let mut e = Vec::new();
    for n in SEG_RESOLUTIONS {
        let (domain, u, _) = seg1d_poisson(n, CouplingMode::BoundaryOnly);
        h.push(mesh_size(&domain));
        e.push(error_against(&domain, &u, parabola));
    }
    let last = order((h[2], h[3]), (e[2], e[3]));
    report("1", "1D Poisson, boundary_only order on last refinement >= 1.8", last >= 1.8, &format!("errors {e_s}, order {last:.3}", e_s = sci(&e)));
}

#[test]
fn seg1d_poisson_all_vertices_locks() {
    let mut e = Vec::new();
    let mut fits = Vec::new();
    for n in SEG_RESOLUTIONS {
        let (domain, u, fit) = seg1d_poisson(n, CouplingMode::AllVertices);
        e.push(error_against(&domain, &u, parabola));
        fits.push(fit);
    }
    let stagnates = e[3] >= 0.5 * e[0];
    let locked = fits.iter().all(|f| *f <= 1e-8);
    report(
        "2",
        "1D Poisson, all_vertices stagnates and locks to a line on the overlap",
        stagnates && locked,
        &format!("errors {e_s}, fit residuals {fits_s}", e_s = sci(&e), fits_s = sci(&fits)),
    );
}

fn annulus_errors(laplace: bool, mode: CouplingMode) -> (Vec<f64>, Vec<f64>) {
    let (outer, f) = if laplace { (1.0, 0.0) } else { (0.0, -1.0) };
    let exact = move |p: &[f64]| {
        let r = p[0].hypot(p[1]);
        if laplace {
            r.ln() / LN_2
        } else {
            (r * r - 1.0) / 4.0 - 3.0 * r.ln() / (4.0 * LN_2)
        }
    };
    let mut h = Vec::new();
    let mut e = Vec::new();
    for n in ANNULUS_RESOLUTIONS {
        let domain = harness::two_annuli(n, 0.0, outer).unwrap();
        let disc = Discretization::new(&domain, &SYM10, mode).unwrap();
        let u = disc.poisson(&domain, &Source::Constant(f)).unwrap().u;
        h.push(mesh_size(&domain));
        e.push(error_against(&domain, &u, exact));
    }
    (h, e)
}

#[test]
fn annulus_laplace_both_couplings_converge() {
    let (h, bo) = annulus_errors(true, CouplingMode::BoundaryOnly);
    let (_, av) = annulus_errors(true, CouplingMode::AllVertices);
    let (p_bo, p_av) = (fitted_order(&h, &bo), fitted_order(&h, &av));
    report(
        "3",
        "2D annuli Laplace, both couplings order >= 1.5",
        p_bo >= 1.5 && p_av >= 1.5,
        &format!("boundary_only {bo_s} order {p_bo:.2}; all_vertices {av_s} order {p_av:.2}", bo_s = sci(&bo), av_s = sci(&av)),
    );
}

#[test]
fn annulus_poisson_boundary_only_converges_all_vertices_stalls() {
    let (h, bo) = annulus_errors(false, CouplingMode::BoundaryOnly);
    let (_, av) = annulus_errors(false, CouplingMode::AllVertices);
    let p_bo = fitted_order(&h, &bo);
    let stalls = av[3] >= 0.3 * av[0];
    report(
        "4",
        "2D annuli Poisson, boundary_only order >= 1.5, all_vertices stalls",
        p_bo >= 1.5 && stalls,
        &format!("boundary_only {bo_s} order {p_bo:.2}; all_vertices {av_s}", bo_s = sci(&bo), av_s = sci(&av)),
    );
}

/// `‖C 1‖∞` and the largest `‖C x_c‖∞` over coordinates, for both pairwise modes.
fn constraint_precision(domain: &Domain) -> (usize, f64, f64) {
    let locator = Locator::new(domain);
    let offsets = domain.offsets();
    let n = domain.total_vertices();
    let coords = domain.global_coordinates();
    let (mut rows, mut ones, mut linear) = (0, 0.0f64, 0.0f64);
    for mode in [CouplingMode::AllVertices, CouplingMode::BoundaryOnly] {
        let c = coupling::build(domain, &locator, mode).matrix(&offsets, n);
        rows += c.rows();
        ones = ones.max(max_abs(&c.mul_vec(&vec![1.0; n])));
        for axis in 0..domain.dim() {
            let x: Vec<f64> = coords.iter().map(|p| p[axis]).collect();
            linear = linear.max(max_abs(&c.mul_vec(&x)));
        }
    }
    (rows, ones, linear)
}

fn boxes() -> Vec<Mesh> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    ["box_a.dmesh", "box_b.dmesh"]
        .iter()
        .map(|f| load_mesh(&std::fs::read_to_string(format!("{data}/{f}")).unwrap()).unwrap())
        .collect()
}

#[test]
fn constraint_matrix_reproduces_constants_and_linears() {
    let annuli = harness::two_annuli(4, 0.0, 1.0).unwrap();
    let annuli = annuli.with_dirichlet(vec![]).unwrap();
    let (r2, o2, l2) = constraint_precision(&annuli);
    let (r3, o3, l3) = constraint_precision(&Domain::new(boxes(), vec![]).unwrap());
    let pass = r2 > 0 && r3 > 0 && o2 == 0.0 && o3 == 0.0 && l2 <= 1e-10 && l3 <= 1e-10;
    report(
        "5",
        "constraint rows: |C 1| = 0 and |C x| <= 1e-10 (annuli, 3D boxes)",
        pass,
        &format!("annuli {r2} rows |C1| {o2:e} |Cx| {l2:.1e}; boxes {r3} rows |C1| {o3:e} |Cx| {l3:.1e}"),
    );
}

fn thinning_check(domain: &Domain) -> (bool, String) {
    let locator = Locator::new(domain);
    let pairwise = coupling::build(domain, &locator, CouplingMode::BoundaryOnly);
    let thinned = coupling::build(domain, &locator, CouplingMode::BoundaryOnlyThinned);
    let targets = pairwise.targets();
    let multiple = pairwise.len() > targets.len();
    let one_each = thinned.len() == targets.len() && thinned.targets() == targets;
    let fewer = !multiple || thinned.len() < pairwise.len();
    (multiple && one_each && fewer, format!("{} -> {} rows, {} targets", pairwise.len(), thinned.len(), targets.len()))
}

#[test]
fn thinning_keeps_one_row_per_target() {
    let segments = Domain::new(
        vec![
            generate_segment(0.0, 0.6, 13).unwrap(),
            generate_segment(0.3, 0.9, 17).unwrap(),
            generate_segment(0.45, 1.0, 11).unwrap(),
        ],
        vec![],
    )
    .unwrap();
    let centers = [(0.0, 0.0), (0.8, 0.05), (0.35, 0.7)];
    let disks = centers
        .iter()
        .enumerate()
        .map(|(k, &(cx, cy))| {
            generate_disk(1.0, 6, 0.1 * k as f64).unwrap().map_vertices(|p| vec![p[0] + cx, p[1] + cy]).unwrap()
        })
        .collect();
    let disks = Domain::new(disks, vec![]).unwrap();
    let (p1, d1) = thinning_check(&segments);
    let (p2, d2) = thinning_check(&disks);
    report("6", "thinning leaves one row per constrained boundary vertex", p1 && p2, &format!("segments {d1}; disks {d2}"));
}

/// Error against the quartic and the first-derivative jump of `u` at `s = 1/3`.
fn seg1d_bilaplace(n: usize, coupling: BilaplaceCoupling) -> (f64, f64, f64) {
    let domain = harness::two_segments(n).unwrap();
    let z_pins = vec![DirichletValue::new(0, 0, 0.0), DirichletValue::new(1, n - 1, 0.0)];
    let disc = Discretization::new(&domain, &QuadratureSpec::CornerAverage, CouplingMode::BoundaryOnly).unwrap();
    let r = disc.bilaplace(&domain, coupling, &Source::Constant(1.0), &z_pins).unwrap();
    let jumps = derivative_jumps(&domain, &disc.locator, &r.u).unwrap();
    let at_third = jumps.iter().find(|j| j.0 == 1 && j.1 == 0).expect("left end of the second segment").2;
    (mesh_size(&domain), error_against(&domain, &r.u, quartic), at_third)
}

#[test]
fn seg1d_bilaplace_high_order_converges_value_only_kinks() {
    let high: Vec<_> = SEG_RESOLUTIONS.iter().map(|&n| seg1d_bilaplace(n, BilaplaceCoupling::HighOrder)).collect();
    let value: Vec<_> = SEG_RESOLUTIONS.iter().map(|&n| seg1d_bilaplace(n, BilaplaceCoupling::ValueOnly)).collect();
    let p = order((high[2].0, high[3].0), (high[2].1, high[3].1));
    let value_jumps: Vec<f64> = value.iter().map(|r| r.2).collect();
    let high_jumps: Vec<f64> = high.iter().map(|r| r.2).collect();
    let kink_stays = value_jumps.windows(2).all(|w| w[1] >= w[0]);
    let kink_halves = high_jumps.windows(2).all(|w| w[0] >= 2.0 * w[1]);
    report(
        "7",
        "1D bi-Laplace: high_order order >= 1.5, value_only kink persists, high_order kink halves",
        p >= 1.5 && kink_stays && kink_halves,
        &format!("high_order order {p:.3}, jumps {high_jumps_s}; value_only jumps {value_jumps_s}", high_jumps_s = sci(&high_jumps), value_jumps_s = sci(&value_jumps)),
    );
}

fn pinned_boundary(meshes: Vec<Mesh>, value: f64) -> Domain {
    let pins = meshes
        .iter()
        .enumerate()
        .flat_map(|(k, m)| m.boundary_vertices().into_iter().map(move |v| DirichletValue::new(k, v, value)))
        .collect();
    Domain::new(meshes, pins).unwrap()
}

/// Bi-Laplace test configurations: `(name, domain, z pins)`.
fn bilaplace_configs() -> Vec<(String, Domain, Vec<DirichletValue<f64>>)> {
    let mut out = Vec::new();
    for n in [20, 40, 80] {
        let d = harness::two_segments(n).unwrap();
        let z = vec![DirichletValue::new(0, 0, 0.0), DirichletValue::new(1, n - 1, 0.0)];
        out.push((format!("segments n={n}"), d, z));
    }
    let seg = generate_segment(0.0, 1.0, 21).unwrap();
    let dup = pinned_boundary(vec![seg.clone(), seg], 0.0);
    let z = dup.dirichlet().to_vec();
    out.push(("duplicated segment".into(), dup, z));
    let halves = harness::exterior_dirichlet(harness::half_disks(6).unwrap(), 0.0).unwrap();
    let z = halves.dirichlet().to_vec();
    out.push(("half disks".into(), halves, z));
    let boxes = harness::exterior_dirichlet(boxes(), 0.0).unwrap();
    let z = boxes.dirichlet().to_vec();
    out.push(("3D boxes".into(), boxes, z));
    out
}

#[test]
fn convex_form_matches_saddle_system() {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (name, domain, z) in bilaplace_configs() {
        let disc = Discretization::new(&domain, &QuadratureSpec::CornerAverage, CouplingMode::BoundaryOnly).unwrap();
        let f = Source::Constant(1.0);
        let kkt = disc.bilaplace(&domain, BilaplaceCoupling::HighOrder, &f, &z).unwrap().u;
        let convex = disc.bilaplace_convex(&domain, &f, &z).unwrap().u;
        let rel = max_abs_diff(&kkt, &convex) / max_abs(&kkt);
        worst = worst.max(rel);
        details.push(format!("{name} {rel:.1e}"));
    }
    report("8", "convex bi-Laplace form matches the KKT solve to 1e-8", worst <= 1e-8, &details.join(", "));
}

fn relative(a: &[f64], single: &[f64]) -> f64 {
    // both copies against the single mesh
    let n = single.len();
    max_abs_diff(&a[..n], single).max(max_abs_diff(&a[n..], single)) / max_abs(single)
}

/// Duplicated mesh against the single mesh; returns the worst relative
/// difference over the three PDEs and the adjusted-volume gap.
fn duplicated_vs_single(mesh: &Mesh, u0: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let quad = QuadratureSpec::CornerAverage;
    let mode = CouplingMode::BoundaryOnly;
    let single = pinned_boundary(vec![mesh.clone()], 0.0);
    let double = pinned_boundary(vec![mesh.clone(), mesh.clone()], 0.0);
    let ds = Discretization::new(&single, &quad, mode).unwrap();
    let dd = Discretization::new(&double, &quad, mode).unwrap();
    let f = Source::Constant(1.0);

    let poisson = relative(&dd.poisson(&double, &f).unwrap().u, &ds.poisson(&single, &f).unwrap().u);

    let free_single = single.with_dirichlet(vec![]).unwrap();
    let free_double = double.with_dirichlet(vec![]).unwrap();
    let fs = Discretization::new(&free_single, &quad, mode).unwrap();
    let fd = Discretization::new(&free_double, &quad, mode).unwrap();
    let rhs: Vec<f64> = free_single.global_coordinates().iter().map(|p| u0(p)).collect();
    let rhs2: Vec<f64> = rhs.iter().chain(&rhs).copied().collect();
    let heat = relative(
        &fd.implicit_step(&free_double, 0.01, &rhs2).unwrap().u,
        &fs.implicit_step(&free_single, 0.01, &rhs).unwrap().u,
    );

    let zs = single.dirichlet().to_vec();
    let zd = double.dirichlet().to_vec();
    let hi = BilaplaceCoupling::HighOrder;
    let bilaplace =
        relative(&dd.bilaplace(&double, hi, &f, &zd).unwrap().u, &ds.bilaplace(&single, hi, &f, &zs).unwrap().u);

    let vol_single = assemble_global(&single, &Locator::new(&single), &quad).unwrap().total_adjusted_volume();
    let vol_double = dd.operators.total_adjusted_volume();
    let vol = (vol_double - vol_single).abs() / vol_single;
    (poisson.max(heat).max(bilaplace), vol)
}

#[test]
fn duplicated_mesh_matches_single_mesh() {
    let cases: Vec<(&str, Mesh)> = vec![
        ("segment", generate_segment(0.0, 1.0, 33).unwrap()),
        ("disk", generate_disk(1.0, 8, 0.0).unwrap()),
        ("3D box", boxes().swap_remove(0)),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, mesh) in cases {
        let (sol, vol) = duplicated_vs_single(&mesh, |p| p.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x * x).sum());
        pass &= sol <= 1e-9 && vol <= 1e-12;
        details.push(format!("{name}: solutions {sol:.1e}, volume {vol:.1e}"));
    }
    report("9", "two identical copies reproduce the single-mesh solves", pass, &details.join("; "));
}

#[test]
fn higher_order_quadrature_tracks_union_area() {
    let domain = harness::two_annuli(4, 0.0, 1.0).unwrap();
    let locator = Locator::new(&domain);
    let area = 3.0 * PI;
    let err = |q: QuadratureSpec| (assemble_global(&domain, &locator, &q).unwrap().total_adjusted_volume() - area).abs();
    let corner = err(QuadratureSpec::CornerAverage);
    let sym = err(SYM10);
    let mc = err(QuadratureSpec::MonteCarlo { samples_per_element: 100, seed: 7 });
    report(
        "10",
        "union area: 10-point rule no worse than corners, Monte Carlo within 5x of it",
        sym <= corner && mc <= 5.0 * sym,
        &format!("corner {corner:.3e}, symmetric(10) {sym:.3e}, monte carlo(100) {mc:.3e}"),
    );
}

fn dirichlet_eigenvalues(domain: &Domain, k: usize) -> Vec<f64> {
    let disc = Discretization::new(domain, &QuadratureSpec::CornerAverage, CouplingMode::BoundaryOnly).unwrap();
    let a = harness::with_pins(&disc.coupling, domain);
    constrained_modes(&disc.operators.laplacian, &disc.operators.mass, &a, k).unwrap().into_iter().map(|m| m.0).collect()
}

#[test]
fn half_disk_spectrum_matches_single_disk() {
    let n = 12;
    let halves = harness::exterior_dirichlet(harness::half_disks(n).unwrap(), 0.0).unwrap();
    let single = harness::exterior_dirichlet(vec![generate_disk(1.0, n, 0.0).unwrap()], 0.0).unwrap();
    let a = dirichlet_eigenvalues(&halves, 10);
    let b = dirichlet_eigenvalues(&single, 10);
    let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs() / y).fold(0.0, f64::max);
    report(
        "11",
        "first 10 constrained eigenvalues of two half disks within 5% of one disk",
        a.len() == 10 && b.len() == 10 && worst <= 0.05,
        &format!("worst relative gap {worst:.3}, half disks {a:.2?}, disk {b:.2?}"),
    );
}
