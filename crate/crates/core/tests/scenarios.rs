use std::path::Path;

use decon::harness::{run_constraints, run_solve, ExperimentConfig, Scenario};
use decon::mesh::{generate_segment, DirichletValue};
use decon::solver::solve_poisson;
use decon::{CouplingMode, Domain32, QuadratureSpec, Source};

fn data() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data"))
}

#[test]
fn custom_boxes_hold_a_constant_boundary_value() {
    let text = "scenario = custom\nmeshes = box_a.dmesh, box_b.dmesh\nboundary_value = 2.5\n";
    let cfg = ExperimentConfig::parse(text, data()).unwrap();
    assert!(matches!(cfg.scenario, Scenario::Custom(ref p) if p.len() == 2));
    let csv = run_solve(&cfg).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("subdomain,vertex,x,y,z,u"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 128);
    for row in rows {
        let u: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((u - 2.5).abs() < 1e-10, "{row}");
    }
    assert!(run_constraints(&cfg).unwrap().lines().count() > 1);
}

#[test]
fn missing_mesh_file_is_reported() {
    let cfg = ExperimentConfig::parse("scenario = custom\nmeshes = nope.dmesh\n", data()).unwrap();
    assert!(run_solve(&cfg).is_err());
}

#[test]
fn single_precision_poisson_on_two_segments() {
    let meshes = vec![generate_segment(0.0f32, 2.0 / 3.0, 21).unwrap(), generate_segment(1.0f32 / 3.0, 1.0, 21).unwrap()];
    let pins = vec![DirichletValue::new(0, 0, 0.0f32), DirichletValue::new(1, 20, 0.0)];
    let domain = Domain32::new(meshes, pins).unwrap();
    let rep = solve_poisson(&domain, &QuadratureSpec::CornerAverage, CouplingMode::BoundaryOnly, &Source::Constant(1.0f32))
        .unwrap();
    let mut worst = 0.0f32;
    for (k, mesh) in domain.subdomains().iter().enumerate() {
        let off = domain.offsets()[k];
        for (i, p) in mesh.coordinates().chunks(1).enumerate() {
            let x = p[0];
            worst = worst.max((rep.u[off + i] - 0.5 * x * (1.0 - x)).abs());
        }
    }
    assert!(worst < 5e-3, "{worst}");
}
