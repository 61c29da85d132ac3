use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdfem::solve::{solve, solve_csr, Factorization, SolveError};
use sdfem_core::bench::BenchmarkId;
use sdfem_core::linalg::{CsrMatrix, Lu};
use sdfem_core::reconstruction::ReconstructionOperator;
use sdfem_core::system::{assemble, Method};
use sdfem_core::{Degree, Discretization};

/// SPD block of size `n - m` bordered by `m` constraint rows, zero (2,2)
/// block; `dense_rows` of the constraints touch every unknown.
fn bordered(n: usize, m: usize, dense_rows: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = n - m;
    let mut t = Vec::new();
    for i in 0..k {
        t.push((i, i, 4.0 + rng.gen::<f64>()));
        for _ in 0..3 {
            let j = rng.gen_range(0..k);
            if j != i {
                let v = 0.3 * (rng.gen::<f64>() - 0.5);
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    for c in 0..m {
        let row = k + c;
        let cols: Vec<usize> = if c < dense_rows { (0..k).collect() } else { (0..4).map(|_| rng.gen_range(0..k)).collect() };
        for j in cols {
            let v = 1.0 + rng.gen::<f64>();
            t.push((row, j, v));
            t.push((j, row, v));
        }
    }
    t
}

fn dense_reference(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    Lu::new(&a.to_dense()).unwrap().solve(b)
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn small_bordered_system_matches_dense_lu() {
    let n = 50;
    let a = CsrMatrix::from_triplets(n, n, &bordered(n, 5, 1, 1)).unwrap();
    let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    assert_eq!(Factorization::new(&a, None).unwrap().border_rows(), 0);
    let x = solve_csr(&a, &b).unwrap();
    let r = dense_reference(&a, &b);
    assert!(max_diff(&x, &r) < 1e-10, "{}", max_diff(&x, &r));
}

#[test]
fn dense_border_takes_the_low_rank_path_and_stays_exact() {
    let n = 400;
    let a = CsrMatrix::from_triplets(n, n, &bordered(n, 6, 2, 2)).unwrap();
    let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
    let f = Factorization::new(&a, None).unwrap();
    assert_eq!(f.border_rows(), 2);
    let (x, stats) = f.solve(&b).unwrap();
    assert!(stats.residual < 1e-12, "{}", stats.residual);
    let r = dense_reference(&a, &b);
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_diff(&x, &r) < 1e-10 * scale);
    // the factors are reusable
    let b2: Vec<f64> = b.iter().rev().copied().collect();
    let (x2, _) = f.solve(&b2).unwrap();
    assert!(max_diff(&x2, &dense_reference(&a, &b2)) < 1e-10 * scale.max(1.0));
}

#[test]
fn assembled_system_matches_equilibrated_dense_solve() {
    let disc = Discretization::new(BenchmarkId::Ex1.mesh(0).unwrap(), Degree::Two).unwrap();
    let op = ReconstructionOperator::new(&disc).unwrap();
    let p = sdfem_core::bench::example1(1e3, 1.0, 1e-4);
    for method in [Method::Classical, Method::Robust] {
        let sys = assemble(&disc, &p, method, Some(&op)).unwrap();
        let (sol, stats) = solve(&sys).unwrap();
        assert!(stats.residual < 1e-9);
        let dense = sys.solve_dense().unwrap();
        let x = sol.to_vector();
        let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_diff(&x, &dense) < 1e-8 * scale, "{method:?}: {}", max_diff(&x, &dense));
    }
}

#[test]
fn empty_rows_are_structurally_singular() {
    let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (0, 1, 2.0)]).unwrap();
    match Factorization::new(&a, None) {
        Err(SolveError::StructurallySingular(msg)) => assert!(msg.contains('2'), "{msg}"),
        Err(e) => panic!("{e}"),
        Ok(_) => panic!("accepted a matrix with an empty row"),
    }
}

#[test]
fn numerically_singular_matrix_is_reported() {
    // rank one
    let mut t = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            t.push((i, j, ((i + 1) * (j + 1)) as f64));
        }
    }
    let a = CsrMatrix::from_triplets(4, 4, &t).unwrap();
    let res = Factorization::new(&a, None).and_then(|f| f.solve(&[1.0, 0.0, 0.0, 0.0]).map(|_| ()));
    assert!(matches!(res, Err(SolveError::Singular(_) | SolveError::Backend(_) | SolveError::StructurallySingular(_))), "{res:?}");
}

#[test]
fn non_square_matrix_is_rejected() {
    let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
    assert!(matches!(Factorization::new(&a, None), Err(SolveError::Backend(_))));
}
