use super::*;
use crate::fespace::{Degree, Discretization};
use crate::mesh::{generate_structured, EdgeClass, RectPair};
use crate::quadrature::{edge_rule, triangle_rule};

fn disc(level: u32, degree: Degree) -> Discretization {
    Discretization::new(generate_structured(&RectPair::unit_square(2, 2), level).unwrap(), degree).unwrap()
}

fn field_on<'a>(d: &'a Discretization, tri: usize, w: &[f64]) -> impl Fn(Point) -> [f64; 2] + 'a {
    let el = &d.rt_elements[tri];
    let w = w.to_vec();
    move |x| el.combine(&w, &el.geo.barycentric(x)).0
}

#[test]
fn rt_functions_are_fixed() {
    for degree in [Degree::Two, Degree::Three] {
        let d = disc(0, degree);
        for cell in &d.stokes.cells {
            let n = d.rt_elements[cell.tri].len();
            for b in 0..n {
                let mut e = vec![0.0; n];
                e[b] = 1.0;
                let w = local_reconstruct(&d, cell.tri, &field_on(&d, cell.tri, &e));
                for (i, wi) in w.iter().enumerate() {
                    assert!((wi - e[i]).abs() < 1e-10, "{degree:?} tri {} b {b}: {wi}", cell.tri);
                }
            }
        }
    }
}

#[test]
fn constants_are_reproduced() {
    let d = disc(1, Degree::Three);
    let tri = d.stokes.cells[3].tri;
    let w = local_reconstruct(&d, tri, &|_| [0.7, -1.3]);
    let el = &d.rt_elements[tri];
    for lam in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5], [0.0, 0.5, 0.5]] {
        let (v, div) = el.combine(&w, &lam);
        assert!((v[0] - 0.7).abs() < 1e-11 && (v[1] + 1.3).abs() < 1e-11 && div.abs() < 1e-9);
    }
}

#[test]
fn basis_moments_are_preserved() {
    for degree in [Degree::Two, Degree::Three] {
        let d = disc(1, degree);
        let op = ReconstructionOperator::new(&d).unwrap();
        assert!(op.max_residual() < 1e-12, "{}", op.max_residual());
        for (lr, cell) in op.cells.iter().zip(&d.stokes.cells) {
            let el = &d.rt_elements[cell.tri];
            for j in 0..lr.w.cols {
                let col: Vec<f64> = (0..lr.w.rows).map(|b| lr.w[(b, j)]).collect();
                let pi = el.moments(&field_on(&d, cell.tri, &col));
                let psi = el.moments(&|x| d.stokes.eval(&el.geo, &el.geo.barycentric(x)).values[j]);
                for (a, b) in pi.iter().zip(&psi) {
                    assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn divergence_commutes_with_projection() {
    let rule = triangle_rule(8).unwrap();
    for degree in [Degree::Two, Degree::Three] {
        let d = disc(0, degree);
        let op = ReconstructionOperator::new(&d).unwrap();
        for (lr, cell) in op.cells.iter().zip(&d.stokes.cells) {
            let el = &d.rt_elements[cell.tri];
            for j in 0..lr.w.cols {
                let col: Vec<f64> = (0..lr.w.rows).map(|b| lr.w[(b, j)]).collect();
                let mut diff = vec![0.0; d.pressure.n_local()];
                for (lam, w) in rule.iter() {
                    let div_pi = el.combine(&col, lam).1;
                    let div_psi = d.stokes.eval(&el.geo, lam).divergence[j];
                    for (dq, q) in diff.iter_mut().zip(d.pressure.basis.values(lam)) {
                        *dq += w * (div_pi - div_psi) * q;
                    }
                }
                assert!(diff.iter().all(|x| x.abs() < 1e-11), "{diff:?}");
            }
        }
    }
}

#[test]
fn vanishing_boundary_traces_stay_zero() {
    let d = disc(1, Degree::Three);
    let op = ReconstructionOperator::new(&d).unwrap();
    let rule = edge_rule(8).unwrap();
    let mut checked = 0;
    for (lr, cell) in op.cells.iter().zip(&d.stokes.cells) {
        let el = &d.rt_elements[cell.tri];
        for (jloc, eid) in d.mesh.triangles[cell.tri].edges.iter().enumerate() {
            let edge = &d.mesh.edges[*eid];
            if edge.class != EdgeClass::BoundaryStokes {
                continue;
            }
            for j in 0..lr.w.cols {
                // only functions whose trace on this edge is zero
                let on_edge = rule.iter().any(|(t, _)| {
                    let v = d.stokes.eval(&el.geo, &el.geo.barycentric(edge.point(&d.mesh, t))).values[j];
                    v[0].abs() + v[1].abs() > 1e-13
                });
                if on_edge {
                    continue;
                }
                let col: Vec<f64> = (0..lr.w.rows).map(|b| lr.w[(b, j)]).collect();
                for (t, _) in rule.iter() {
                    let v = el.combine(&col, &el.geo.barycentric(edge.point(&d.mesh, t))).0;
                    assert!((v[0] * edge.normal[0] + v[1] * edge.normal[1]).abs() < 1e-10, "edge {jloc}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

fn projection_error(level: u32, degree: Degree) -> (f64, f64) {
    let d = disc(level, degree);
    let v = |x: Point| [libm::sin(2.0 * x[0]) * libm::cos(x[1]), libm::exp(x[0]) * x[1] * x[1]];
    let rule = triangle_rule(10).unwrap();
    let mut err = 0.0;
    for cell in &d.stokes.cells {
        let el = &d.rt_elements[cell.tri];
        let w = local_reconstruct(&d, cell.tri, &v);
        for (lam, wt) in rule.iter() {
            let p = el.combine(&w, lam).0;
            let e = v(el.geo.point(lam));
            err += 2.0 * el.geo.area * wt * ((p[0] - e[0]).powi(2) + (p[1] - e[1]).powi(2));
        }
    }
    (libm::sqrt(err), d.mesh.h())
}

#[test]
fn projection_converges_at_full_order() {
    for degree in [Degree::Two, Degree::Three] {
        let (e0, h0) = projection_error(1, degree);
        let (e1, h1) = projection_error(2, degree);
        let rate = libm::log(e0 / e1) / libm::log(h0 / h1);
        assert!(rate >= degree.k() as f64 - 0.2, "{degree:?}: rate {rate}");
    }
}

#[test]
fn robust_rhs_changes_only_the_stokes_block() {
    use crate::bench::CustomProblem;
    use crate::forms::{rhs_classical, ModelParams};
    let d = disc(0, Degree::Two);
    let op = ReconstructionOperator::new(&d).unwrap();
    let p = CustomProblem::homogeneous("f", ModelParams::new(1.0, 1.0, 1.0).unwrap()).with_force(|x, _| [x[1], x[0] * x[0]]);
    let c = rhs_classical(&d, &p);
    let r = rhs_robust(&d, &op, &p);
    assert_eq!(c.darcy, r.darcy);
    assert_eq!(c.pressure, r.pressure);
    assert!(c.stokes.iter().zip(&r.stokes).any(|(a, b)| (a - b).abs() > 1e-6));
}
