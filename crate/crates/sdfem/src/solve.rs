//! Sparse direct solution of the assembled saddle-point system.

use std::time::Instant;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use sdfem_core::linalg::CsrMatrix;
use sdfem_core::system::{BlockMap, SaddleSystem, Solution};

/// Required `||Ax - b|| / ||b||` after the solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("matrix has structurally empty rows or columns: {0}")]
    StructurallySingular(String),
    #[error("matrix is numerically singular: {0}")]
    Singular(String),
    #[error("sparse factorization failed: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct SolveStats {
    pub factor_seconds: f64,
    pub solve_seconds: f64,
    pub residual: f64,
    pub refinement_steps: usize,
}

/// LU factors of a square sparse matrix, reusable across right-hand sides.
///
/// The matrix is equilibrated as `S A S` with `S = |diag A|^{-1/2}` (1 on
/// zero diagonals) before factorization; penalty rows would otherwise be
/// many orders of magnitude larger than the rest.
///
/// Rows and columns far denser than the rest (the mean-value constraint) are
/// cut down to their largest entry for the sparse factorization and the
/// difference is restored by a Woodbury correction. Left in, a single dense
/// row makes the sparse LU roughly thirty times slower at 18k unknowns.
pub struct Factorization {
    lu: Lu<usize, f64>,
    scale: Vec<f64>,
    matrix: CsrMatrix,
    labels: Option<BlockMap>,
    border: Option<Border>,
    pub factor_seconds: f64,
}

/// Low-rank part `U V^T` of the scaled matrix missing from the sparse
/// factors; `U` holds unit vectors for border rows and sparse columns, `V`
/// the opposite.
struct Border {
    dense: Vec<usize>,
    /// Removed part of each border row (scaled, all columns).
    rows: Vec<Vec<(usize, f64)>>,
    /// `K^{-1} U`, one column per low-rank term.
    y: Vec<Vec<f64>>,
    /// LU of the capacitance matrix `I + V^T K^{-1} U`.
    cap: sdfem_core::linalg::Lu,
}

const MAX_BORDER: usize = 8;

fn describe(map: Option<&BlockMap>, idx: &[usize]) -> String {
    let mut out: Vec<String> = Vec::new();
    for &i in idx.iter().take(8) {
        match map {
            Some(m) => out.push(format!("{i} ({})", m.block_of(i))),
            None => out.push(i.to_string()),
        }
    }
    if idx.len() > 8 {
        out.push(format!("... {} in total", idx.len()));
    }
    out.join(", ")
}

fn factor(n: usize, trip: &[Triplet<usize, usize, f64>]) -> Result<Lu<usize, f64>, SolveError> {
    let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trip).map_err(|e| SolveError::Backend(format!("{e:?}")))?;
    match csc.sp_lu() {
        Ok(lu) => Ok(lu),
        Err(faer::sparse::linalg::LuError::SymbolicSingular { index }) => {
            Err(SolveError::StructurallySingular(format!("no pivot at elimination step {index}")))
        }
        Err(e) => Err(SolveError::Backend(format!("{e:?}"))),
    }
}

fn lu_solve(lu: &Lu<usize, f64>, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    (0..b.len()).map(|i| rhs[(i, 0)]).collect()
}

impl Factorization {
    /// Factorizes `matrix`; `labels` names blocks in diagnostics.
    pub fn new(matrix: &CsrMatrix, labels: Option<&BlockMap>) -> Result<Factorization, SolveError> {
        let n = matrix.nrows;
        if matrix.ncols != n {
            return Err(SolveError::Backend(format!("matrix is {}x{}", n, matrix.ncols)));
        }
        let mut row_count = vec![0usize; n];
        let mut col_count = vec![0usize; n];
        let mut scale = vec![1.0; n];
        let mut scaled = Vec::with_capacity(matrix.nnz());
        for (i, j, v) in matrix.triplets() {
            if i == j && v != 0.0 {
                scale[i] = 1.0 / v.abs().sqrt();
            }
        }
        for (i, j, v) in matrix.triplets() {
            if v != 0.0 {
                row_count[i] += 1;
                col_count[j] += 1;
                scaled.push((i, j, scale[i] * v * scale[j]));
            }
        }
        let empty: Vec<usize> = (0..n).filter(|&i| row_count[i] == 0 || col_count[i] == 0).collect();
        if !empty.is_empty() {
            return Err(SolveError::StructurallySingular(describe(labels, &empty)));
        }
        let start = Instant::now();
        let threshold = (8.0 * (n as f64).sqrt()).max(64.0) as usize;
        let dense: Vec<usize> = (0..n).filter(|&i| row_count[i] > threshold || col_count[i] > threshold).collect();
        let all: Vec<_> = scaled.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mut border = None;
        let lu = if dense.is_empty() || dense.len() > MAX_BORDER {
            factor(n, &all)?
        } else {
            match Self::bordered(n, &scaled, &dense) {
                Some((lu, b)) => {
                    border = Some(b);
                    lu
                }
                None => {
                    log::debug!("bordered factorization failed, factoring {} dense rows directly", dense.len());
                    factor(n, &all)?
                }
            }
        };
        Ok(Factorization { lu, scale, matrix: matrix.clone(), labels: labels.cloned(), border, factor_seconds: start.elapsed().as_secs_f64() })
    }

    fn bordered(n: usize, scaled: &[(usize, usize, f64)], dense: &[usize]) -> Option<(Lu<usize, f64>, Border)> {
        let pos = |i: usize| dense.iter().position(|&d| d == i);
        // keep the largest off-border entry of each border row and column
        let mut keep_row = vec![(usize::MAX, 0.0f64); dense.len()];
        let mut keep_col = vec![(usize::MAX, 0.0f64); dense.len()];
        for &(i, j, v) in scaled {
            match (pos(i), pos(j)) {
                (Some(a), None) if v.abs() > keep_row[a].1.abs() => keep_row[a] = (j, v),
                (None, Some(b)) if v.abs() > keep_col[b].1.abs() => keep_col[b] = (i, v),
                _ => {}
            }
        }
        let mut trip = Vec::with_capacity(scaled.len());
        let mut rows = vec![Vec::new(); dense.len()];
        let mut cols = vec![Vec::new(); dense.len()];
        for &(i, j, v) in scaled {
            let (pi, pj) = (pos(i), pos(j));
            let kept = match (pi, pj) {
                (None, None) | (Some(_), Some(_)) => true,
                (Some(a), None) => keep_row[a].0 == j,
                (None, Some(b)) => keep_col[b].0 == i,
            };
            if kept {
                trip.push(Triplet::new(i, j, v));
            } else if let Some(a) = pi {
                rows[a].push((j, v));
            } else if let Some(b) = pj {
                cols[b].push((i, v));
            }
        }
        let lu = factor(n, &trip).ok()?;
        // U = [e_d..., c_d...], V = [r_d..., e_d...]
        let m = dense.len();
        let mut y = Vec::with_capacity(2 * m);
        for &d in dense {
            let mut e = vec![0.0; n];
            e[d] = 1.0;
            y.push(lu_solve(&lu, &e));
        }
        for c in &cols {
            let mut u = vec![0.0; n];
            for &(i, v) in c {
                u[i] = v;
            }
            y.push(lu_solve(&lu, &u));
        }
        let vt = |k: usize, x: &[f64]| -> f64 {
            if k < m {
                rows[k].iter().map(|&(j, v)| v * x[j]).sum()
            } else {
                x[dense[k - m]]
            }
        };
        let cap = sdfem_core::linalg::DenseMatrix::from_fn(2 * m, 2 * m, |a, b| vt(a, &y[b]) + if a == b { 1.0 } else { 0.0 });
        if !y.iter().flatten().all(|v| v.is_finite()) {
            return None;
        }
        let cap = sdfem_core::linalg::Lu::new(&cap).ok()?;
        Some((lu, Border { dense: dense.to_vec(), rows, y, cap }))
    }

    /// Number of dense rows handled by the low-rank correction.
    pub fn border_rows(&self) -> usize {
        self.border.as_ref().map_or(0, |b| b.dense.len())
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let sb: Vec<f64> = b.iter().zip(&self.scale).map(|(b, s)| b * s).collect();
        let mut x = lu_solve(&self.lu, &sb);
        if let Some(bd) = &self.border {
            let m = bd.dense.len();
            let proj: Vec<f64> = (0..2 * m)
                .map(|k| if k < m { bd.rows[k].iter().map(|&(j, v)| v * x[j]).sum() } else { x[bd.dense[k - m]] })
                .collect();
            let t = bd.cap.solve(&proj);
            for (tk, yk) in t.iter().zip(&bd.y) {
                for (xi, yi) in x.iter_mut().zip(yk) {
                    *xi -= tk * yi;
                }
            }
        }
        x.iter().zip(&self.scale).map(|(x, s)| x * s).collect()
    }

    /// Solves with up to two steps of iterative refinement and checks the
    /// residual, both raw and in the equilibrated scaling (the raw one alone
    /// is blind to everything but the penalty rows).
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats), SolveError> {
        let start = Instant::now();
        let rel_of = |r: &[f64]| {
            let raw = norm(r) / nonzero(norm(b));
            let sr: Vec<f64> = r.iter().zip(&self.scale).map(|(r, s)| r * s).collect();
            let sb: Vec<f64> = b.iter().zip(&self.scale).map(|(b, s)| b * s).collect();
            raw.max(norm(&sr) / nonzero(norm(&sb)))
        };
        let mut x = self.raw_solve(b);
        let mut res = residual(&self.matrix, &x, b);
        let mut rel = rel_of(&res);
        let mut steps = 0;
        while rel.is_finite() && rel > 1e-14 && steps < 2 {
            let dx = self.raw_solve(&res);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let r2 = residual(&self.matrix, &cand, b);
            let rel2 = rel_of(&r2);
            steps += 1;
            if !(rel2 < rel) {
                break;
            }
            (x, res, rel) = (cand, r2, rel2);
        }
        let xnorm = norm(&x);
        if !rel.is_finite() || !xnorm.is_finite() || rel > RESIDUAL_TOLERANCE {
            let sr: Vec<f64> = res.iter().zip(&self.scale).map(|(r, s)| r * s).collect();
            let worst = worst_rows(&sr);
            return Err(SolveError::Singular(format!(
                "relative residual {rel:.3e}, |x| {xnorm:.3e}; largest residual rows {}",
                describe(self.labels.as_ref(), &worst)
            )));
        }
        Ok((x, SolveStats { factor_seconds: self.factor_seconds, solve_seconds: start.elapsed().as_secs_f64(), residual: rel, refinement_steps: steps }))
    }
}

fn nonzero(x: f64) -> f64 {
    if x > 0.0 { x } else { 1.0 }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn worst_rows(r: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|a, b| r[*b].abs().partial_cmp(&r[*a].abs()).unwrap_or(std::cmp::Ordering::Equal));
    idx.truncate(5);
    idx
}

/// Factorizes and solves an assembled system.
pub fn solve(sys: &SaddleSystem) -> Result<(Solution, SolveStats), SolveError> {
    let f = Factorization::new(&sys.matrix, Some(&sys.map))?;
    let (x, stats) = f.solve(&sys.rhs)?;
    Ok((Solution::from_vector(&sys.map, &x), stats))
}

/// Solves a general square sparse system.
pub fn solve_csr(matrix: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    Factorization::new(matrix, None)?.solve(b).map(|(x, _)| x)
}
