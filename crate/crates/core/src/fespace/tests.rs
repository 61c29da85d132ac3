use super::*;
use crate::mesh::{generate_structured, RectPair};
use crate::quadrature::{edge_rule, STANDARD_DEGREE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(level: u32) -> Mesh {
    generate_structured(&RectPair::unit_square(2, 2), level).unwrap()
}

fn random_lam(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    [1.0 - a - b, a, b]
}

#[test]
fn dimensions_match_entity_counts() {
    let m = mesh(0);
    let d = Discretization::new(m.clone(), Degree::Two).unwrap();
    assert_eq!(d.stokes.n_dofs(), 66);
    assert_eq!(d.darcy.n_dofs, 48);
    assert_eq!(d.pressure.n_dofs, 48);
    assert_eq!(d.trace.n_dofs, 4);
    for level in 0..3 {
        let m = mesh(level);
        let sp = m.subdomain_vertex_count(Subdomain::Stokes);
        let ss = m.subdomain_edge_count(Subdomain::Stokes);
        let se = m.triangles_in(Subdomain::Stokes).count();
        let ds = m.subdomain_edge_count(Subdomain::Darcy);
        let de = m.triangles_in(Subdomain::Darcy).count();
        let d3 = Discretization::new(m.clone(), Degree::Three).unwrap();
        assert_eq!(d3.stokes.n_dofs(), 2 * (sp + 2 * ss + 3 * se));
        assert_eq!(d3.darcy.n_dofs, 3 * ds + 6 * de);
        assert_eq!(d3.pressure.n_dofs, 6 * m.n_triangles());
        let d2 = Discretization::new(m, Degree::Two).unwrap();
        assert_eq!(d2.stokes.n_dofs(), 2 * (sp + ss + se));
        assert_eq!(d2.darcy.n_dofs, 2 * (ds + de));
    }
}

#[test]
fn lagrange_nodal_property_and_bubble_normalization() {
    for degree in [Degree::Two, Degree::Three] {
        let b = PolyBasis::stokes(degree);
        let n_lagrange = b.len() - b.n_interior + usize::from(degree == Degree::Three);
        for i in 0..n_lagrange {
            let v = b.values(&b.nodes[i]);
            for j in 0..n_lagrange {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v[j] - expect).abs() < 1e-14, "{degree:?} {i} {j}");
            }
        }
        let at_c = b.values(&[1.0 / 3.0; 3]);
        for v in &at_c[n_lagrange..] {
            assert!((v - 1.0).abs() < 1e-14);
        }
        // enrichment vanishes on the boundary
        for i in 0..b.len() - b.n_interior {
            for v in &b.values(&b.nodes[i])[b.len() - b.n_interior..] {
                assert!(v.abs() < 1e-15);
            }
        }
    }
    let b = PolyBasis::stokes(Degree::Two);
    assert!((b.values(&[1.0 / 3.0; 3])[6] - 1.0).abs() < 1e-15);
}

#[test]
fn partition_of_unity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (degree, n) in [(Degree::Two, 6), (Degree::Three, 10)] {
        let b = PolyBasis::stokes(degree);
        for _ in 0..50 {
            let s: f64 = b.values(&random_lam(&mut rng))[..n].iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
        let p = PolyBasis::pressure(degree);
        let s: f64 = p.values(&random_lam(&mut rng)).iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
    }
}

#[test]
fn lagrange_gradients_match_finite_differences() {
    let geo = TriangleGeometry::from_points([[0.1, 0.0], [0.9, 0.2], [0.3, 0.8]]);
    for degree in [Degree::Two, Degree::Three] {
        let b = PolyBasis::stokes(degree);
        let lam = [0.2, 0.5, 0.3];
        let x = geo.point(&lam);
        let e = b.eval(&geo, &lam);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let (vp, vm) = (b.values(&geo.barycentric(xp)), b.values(&geo.barycentric(xm)));
            for i in 0..b.len() {
                assert!(((vp[i] - vm[i]) / (2.0 * h) - e.gradients[i][c]).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn reference_rt1_dof_matrix_is_well_conditioned() {
    let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![([0, 1, 2], Subdomain::Darcy)], &[]).unwrap();
    for degree in [Degree::Two, Degree::Three] {
        let el = RtElement::new(&m, 0, degree).unwrap();
        let bound = if degree == Degree::Two { 1e3 } else { 1e4 };
        assert!(el.condition < bound, "{degree:?} cond {}", el.condition);
        // the dual basis is biorthogonal to the dof functionals
        for b in 0..el.len() {
            let chi = |p: Point| {
                let lam = el.geo.barycentric(p);
                el.eval(&lam).values[b]
            };
            let m = el.moments(&chi);
            for (f, v) in m.iter().enumerate() {
                let expect = if f == b { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "{degree:?} dof {f} basis {b}: {v}");
            }
        }
    }
}

#[test]
fn rt_divergence_is_trace_and_matches_finite_differences() {
    let m = mesh(0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for degree in [Degree::Two, Degree::Three] {
        let el = RtElement::new(&m, 3, degree).unwrap();
        for _ in 0..10 {
            let lam = random_lam(&mut rng);
            let lam = [0.1 + 0.7 * lam[0], 0.1 + 0.7 * lam[1], 0.1 + 0.7 * lam[2]];
            let e = el.eval(&lam);
            let x = el.geo.point(&lam);
            let h = 1e-5;
            for b in 0..el.len() {
                let g = e.gradients[b];
                assert!((e.divergence[b] - (g[0][0] + g[1][1])).abs() < 1e-13);
                let mut fd = 0.0;
                for c in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[c] += h;
                    xm[c] -= h;
                    let vp = el.eval(&el.geo.barycentric(xp)).values[b][c];
                    let vm = el.eval(&el.geo.barycentric(xm)).values[b][c];
                    fd += (vp - vm) / (2.0 * h);
                }
                assert!((fd - e.divergence[b]).abs() < 1e-6 * (1.0 + e.divergence[b].abs()));
            }
        }
    }
}

fn rt_value(d: &Discretization, coeffs: &[f64], tri: usize, p: Point) -> [f64; 2] {
    let cell = &d.darcy.cells[d.darcy.cell_of_triangle[tri].unwrap()];
    let el = &d.rt_elements[tri];
    let w: Vec<f64> = cell.dofs.iter().map(|g| coeffs[*g]).collect();
    el.combine(&w, &el.geo.barycentric(p)).0
}

#[test]
fn rt_normal_trace_is_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for degree in [Degree::Two, Degree::Three] {
        let d = Discretization::new(mesh(1), degree).unwrap();
        let coeffs: Vec<f64> = (0..d.darcy.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rule = edge_rule(STANDARD_DEGREE).unwrap();
        for e in d.mesh.edges_of_class(EdgeClass::InteriorDarcy) {
            let edge = &d.mesh.edges[e];
            let [t0, t1] = [edge.triangles[0].unwrap(), edge.triangles[1].unwrap()];
            for t in &rule.points {
                let p = edge.point(&d.mesh, *t);
                let (a, b) = (rt_value(&d, &coeffs, t0, p), rt_value(&d, &coeffs, t1, p));
                let jump = (a[0] - b[0]) * edge.normal[0] + (a[1] - b[1]) * edge.normal[1];
                let scale = 1.0 + a[0].abs().max(a[1].abs());
                assert!(jump.abs() < 1e-12 * scale, "{degree:?} edge {e}: {jump}");
            }
        }
    }
}

#[test]
fn interpolation_reproduces_space_members() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for degree in [Degree::Two, Degree::Three] {
        let d = Discretization::new(mesh(1), degree).unwrap();
        let lin = |p: Point| [1.0 + 2.0 * p[0] - p[1], -0.5 + 0.3 * p[0] + 4.0 * p[1]];
        let u = d.stokes.interpolate(&d.mesh, &lin);
        let q = |p: Point| [p[0] * p[0] - p[1], p[0] * p[1] + 2.0];
        let uq = d.stokes.interpolate(&d.mesh, &q);
        let rt = d.darcy.interpolate(&d.rt_elements, &|p| [p[0], p[1]]);
        for _ in 0..50 {
            let t = rng.gen_range(0..d.mesh.n_triangles());
            let lam = random_lam(&mut rng);
            let geo = TriangleGeometry::new(&d.mesh, t);
            let p = geo.point(&lam);
            match d.mesh.triangles[t].subdomain {
                Subdomain::Stokes => {
                    let cell = &d.stokes.cells[d.stokes.cell_of_triangle[t].unwrap()];
                    let e = d.stokes.eval(&geo, &lam);
                    for (coef, f) in [(&u, lin(p)), (&uq, q(p))] {
                        let mut v = [0.0; 2];
                        for i in 0..e.len() {
                            let c = coef[d.stokes.global(cell, i)];
                            v[0] += c * e.values[i][0];
                            v[1] += c * e.values[i][1];
                        }
                        assert!((v[0] - f[0]).abs() < 1e-12 && (v[1] - f[1]).abs() < 1e-12);
                    }
                }
                Subdomain::Darcy => {
                    let v = rt_value(&d, &rt, t, p);
                    assert!((v[0] - p[0]).abs() < 1e-12 && (v[1] - p[1]).abs() < 1e-12);
                }
            }
        }
        let ones = d.pressure.interpolate(&d.mesh, &|_, _| 1.0);
        assert!(ones.iter().all(|v| *v == 1.0));
    }
}

#[test]
fn shared_entities_share_dofs() {
    let d = Discretization::new(mesh(1), Degree::Three).unwrap();
    // every Stokes edge node id is used by both neighbours at the same anchor
    for cell in &d.stokes.cells {
        let geo = TriangleGeometry::new(&d.mesh, cell.tri);
        for (i, g) in cell.dofs.iter().enumerate() {
            let p = geo.point(&d.stokes.basis.nodes[i]);
            let a = d.stokes.meta[*g].anchor;
            assert!((p[0] - a[0]).abs() < 1e-14 && (p[1] - a[1]).abs() < 1e-14);
        }
    }
    let counts = d.stokes.cells.iter().flat_map(|c| c.dofs.iter()).fold(vec![0; d.stokes.n_scalar], |mut acc, g| {
        acc[*g] += 1;
        acc
    });
    assert!(counts.iter().all(|c| *c >= 1));
}

#[test]
fn boundary_flags_and_lid_precedence() {
    let mut spec = RectPair::unit_square(2, 2);
    spec.lid = true;
    let m = generate_structured(&spec, 0).unwrap();
    let s = StokesSpace::new(&m, Degree::Two).unwrap();
    for (i, meta) in s.meta.iter().enumerate() {
        let [x, y] = meta.anchor;
        let on_outer = x.abs() < 1e-14 || (x - 1.0).abs() < 1e-14 || (y - 1.0).abs() < 1e-14;
        assert_eq!(s.boundary[i].is_some(), on_outer, "{:?}", meta);
        if (y - 1.0).abs() < 1e-14 {
            assert_eq!(s.boundary[i], Some(Marker::Lid));
        }
    }
    assert!(matches!(Degree::from_k(4), Err(Error::UnsupportedOrder(4))));
}
