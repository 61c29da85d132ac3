use std::path::Path;

use sdfem::study::{run, sweep, MeshContext, RunError, RunSpec};
use sdfem_core::bench::BenchmarkId;
use sdfem_core::system::Method;
use sdfem_core::Degree;

fn ex1_specs() -> Vec<RunSpec> {
    let mut specs = Vec::new();
    for level in [1, 0] {
        for method in [Method::Robust, Method::Classical] {
            for gamma in [1.0, 1e6] {
                specs.push(RunSpec::new(BenchmarkId::Ex1, method, Degree::Two, level).with_gamma(gamma));
            }
        }
    }
    specs
}

#[test]
fn parallel_sweep_keeps_input_order_and_results() {
    let specs = ex1_specs();
    let seq = sweep(&specs, None, 1);
    let par = sweep(&specs, None, 4);
    assert_eq!(seq.len(), specs.len());
    for ((spec, a), b) in specs.iter().zip(&seq).zip(&par) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!(a.spec, *spec);
        assert_eq!(b.spec, *spec);
        let rel = (a.errors.velocity - b.errors.velocity).abs() / a.errors.velocity;
        assert!(rel < 1e-10, "{spec:?}: {rel}");
    }
    // the classical error grows with gamma, the robust one does not
    let e = |i: usize| seq[i].as_ref().unwrap().errors.velocity;
    assert!((e(1) / e(0) - 1.0).abs() < 1e-5);
    assert!(e(3) / e(2) > 100.0, "{} {}", e(2), e(3));
}

#[test]
fn unreadable_mesh_fails_every_run_in_place() {
    let specs = ex1_specs();
    let out = sweep(&specs, Some(Path::new("/nonexistent/cavity.msh")), 2);
    assert_eq!(out.len(), specs.len());
    for r in &out {
        match r {
            Err(RunError::Setup(msg)) => assert!(msg.contains("/nonexistent/cavity.msh"), "{msg}"),
            other => panic!("{:?}", other.as_ref().map(|r| r.spec)),
        }
    }
}

#[test]
fn cavity_velocity_ignores_gradient_forcing_only_when_robust() {
    let base = RunSpec::new(BenchmarkId::Ex3, Method::Robust, Degree::Two, 0);
    let ctx = MeshContext::for_spec(&base, None).unwrap();
    let gap = |method: Method| {
        let a = run(&ctx, &base.with_method(method)).unwrap();
        let b = run(&ctx, &base.with_method(method).with_lambda(1e4)).unwrap();
        assert!(a.errors.velocity.is_nan(), "no exact solution for the cavity");
        let d = a.solution.stokes.iter().zip(&b.solution.stokes).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        (d, a.velocity_max)
    };
    let (robust, vmax) = gap(Method::Robust);
    let (classical, _) = gap(Method::Classical);
    assert!(vmax > 0.5 && vmax < 1.5, "{vmax}");
    assert!(robust < 1e-6 * vmax, "{robust}");
    assert!(classical > 1e3 * robust.max(1e-12), "{classical} vs {robust}");
}

#[test]
fn bundled_mesh_builds_the_default_cavity_spaces() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cavity.msh");
    let spec = RunSpec::new(BenchmarkId::Ex3, Method::Robust, Degree::Two, 2);
    let ctx = MeshContext::for_spec(&spec, Some(&path)).unwrap();
    assert_eq!(ctx.disc.n_total(), 39699);
    assert_eq!(ctx.disc.mesh.n_triangles(), 4608);
}
