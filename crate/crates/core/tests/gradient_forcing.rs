use proptest::prelude::*;
use sdfem_core::bench::{BenchmarkId, CustomProblem};
use sdfem_core::forms::ModelParams;
use sdfem_core::reconstruction::ReconstructionOperator;
use sdfem_core::system::{assemble, Method};
use sdfem_core::{Degree, Discretization};

/// Solves with `f = (1, x) + grad phi`, phi = a x^2 + b x y + c sin(2 y);
/// returns the velocity block.
fn velocity(disc: &Discretization, op: &ReconstructionOperator, method: Method, a: f64, b: f64, c: f64) -> Vec<f64> {
    let params = ModelParams::new(1.0, 1e-2, 1.0).unwrap();
    let problem = CustomProblem::homogeneous("gradient", params).with_force(move |p, _| {
        [1.0 + 2.0 * a * p[0] + b * p[1], p[0] + b * p[0] + 2.0 * c * (2.0 * p[1]).cos()]
    });
    let sys = assemble(disc, &problem, method, Some(op)).unwrap();
    let x = sys.solve_dense().unwrap();
    x[..disc.stokes.n_dofs() + disc.darcy.n_dofs].to_vec()
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn robust_velocity_ignores_added_gradients(a in -1e3..1e3f64, b in -1e3..1e3f64, c in -1e3..1e3f64) {
        let disc = Discretization::new(BenchmarkId::Ex1.mesh(0).unwrap(), Degree::Two).unwrap();
        let op = ReconstructionOperator::new(&disc).unwrap();
        let base = velocity(&disc, &op, Method::Robust, 0.0, 0.0, 0.0);
        let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let moved = velocity(&disc, &op, Method::Robust, a, b, c);
        prop_assert!(max_diff(&base, &moved) < 1e-7 * scale, "{}", max_diff(&base, &moved));
    }
}

#[test]
fn classical_velocity_follows_added_gradients() {
    let disc = Discretization::new(BenchmarkId::Ex1.mesh(0).unwrap(), Degree::Two).unwrap();
    let op = ReconstructionOperator::new(&disc).unwrap();
    let base = velocity(&disc, &op, Method::Classical, 0.0, 0.0, 0.0);
    let moved = velocity(&disc, &op, Method::Classical, 0.0, 0.0, 1e3);
    let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_diff(&base, &moved) > 1e-3 * scale);
}
