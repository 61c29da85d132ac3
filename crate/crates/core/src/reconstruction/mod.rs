//! Divergence-free reconstruction of Stokes test functions into the local
//! Raviart-Thomas space and the pressure-robust right-hand side.
//!
//! On each Stokes triangle `Pi psi` is the `RT_{k-1}` function with the
//! same edge normal moments against `P_{k-1}(e)` and interior moments
//! against `[P_{k-2}]^2` as `psi`. The local basis is dual to these moments,
//! so the coefficients of `Pi psi` are the moments themselves; the Darcy
//! part of the operator is the identity.

use alloc::vec;
use alloc::vec::Vec;

use crate::bench::Problem;
use crate::fespace::Discretization;
use crate::forms::{rhs_common, RhsParts};
use crate::linalg::DenseMatrix;
use crate::mesh::Subdomain;
use crate::quadrature::{triangle_rule, STANDARD_DEGREE};
use crate::{Error, Point, Result};

/// Reconstruction of all local Stokes basis functions on one triangle.
#[derive(Debug, Clone)]
pub struct LocalReconstruction {
    pub tri: usize,
    /// Column `j` holds the RT coefficients of `Pi psi_j`.
    pub w: DenseMatrix,
    /// Relative residual of `M w = moments` over all columns.
    pub residual: f64,
}

/// RT coefficients of `Pi psi` on `tri` for an arbitrary field.
pub fn local_reconstruct(d: &Discretization, tri: usize, psi: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
    d.rt_elements[tri].moments(psi)
}

fn build_local(d: &Discretization, cell_index: usize) -> Result<LocalReconstruction> {
    let cell = &d.stokes.cells[cell_index];
    let el = &d.rt_elements[cell.tri];
    let geo = el.geo;
    let n_psi = 2 * d.stokes.n_local();
    let mut w = DenseMatrix::zeros(el.len(), n_psi);
    for mp in &el.functionals {
        let e = d.stokes.eval(&geo, &mp.lam);
        for (f, wt) in &mp.weights {
            for (j, v) in e.values.iter().enumerate() {
                w[(*f, j)] += v[0] * wt[0] + v[1] * wt[1];
            }
        }
    }
    // coefficients are the moments; check them against the raw system
    let raw = el.coef.matmul(&w);
    let back = el.dof_matrix.matmul(&raw);
    let mut residual = 0.0f64;
    for j in 0..n_psi {
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for f in 0..el.len() {
            num = num.max(libm::fabs(back[(f, j)] - w[(f, j)]));
            den = den.max(libm::fabs(w[(f, j)]));
        }
        residual = residual.max(num / den.max(f64::MIN_POSITIVE));
    }
    if !residual.is_finite() {
        return Err(Error::SingularLocalMatrix(cell.tri));
    }
    Ok(LocalReconstruction { tri: cell.tri, w, residual })
}

/// Cached reconstructions for every Stokes triangle. Independent of the
/// data, so one operator serves a whole parameter sweep on a mesh.
#[derive(Debug, Clone)]
pub struct ReconstructionOperator {
    pub cells: Vec<LocalReconstruction>,
}

impl ReconstructionOperator {
    pub fn new(d: &Discretization) -> Result<ReconstructionOperator> {
        let cells = (0..d.stokes.cells.len()).map(|c| build_local(d, c)).collect::<Result<Vec<_>>>()?;
        let worst = cells.iter().map(|c| c.residual).fold(0.0, f64::max);
        log::debug!("reconstruction built on {} triangles, max residual {worst:.2e}", cells.len());
        Ok(ReconstructionOperator { cells })
    }

    pub fn max_residual(&self) -> f64 {
        self.cells.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// RT coefficients of `Pi v` on each Stokes cell, in cell order.
    pub fn reconstruct_stokes(&self, d: &Discretization, stokes: &[f64]) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .zip(&d.stokes.cells)
            .map(|(lr, cell)| {
                let local: Vec<f64> = (0..lr.w.cols).map(|j| stokes[d.stokes.global(cell, j)]).collect();
                lr.w.matvec(&local)
            })
            .collect()
    }

    /// `Pi v` for a coupled velocity: RT coefficients per triangle (Stokes
    /// cells reconstructed, Darcy cells copied).
    pub fn reconstruct_field(&self, d: &Discretization, stokes: &[f64], darcy: &[f64]) -> ReconstructedField {
        let mut coeffs = vec![Vec::new(); d.mesh.n_triangles()];
        for (c, w) in self.reconstruct_stokes(d, stokes).into_iter().enumerate() {
            coeffs[self.cells[c].tri] = w;
        }
        for cell in &d.darcy.cells {
            coeffs[cell.tri] = cell.dofs.iter().map(|g| darcy[*g]).collect();
        }
        ReconstructedField { coeffs }
    }
}

/// A piecewise `RT_{k-1}` field on the whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedField {
    pub coeffs: Vec<Vec<f64>>,
}

impl ReconstructedField {
    /// Value and divergence on `tri` at barycentric `lam`.
    pub fn eval(&self, d: &Discretization, tri: usize, lam: &[f64; 3]) -> ([f64; 2], f64) {
        d.rt_elements[tri].combine(&self.coeffs[tri], lam)
    }
}

/// `(f, Pi psi_j)` for the Stokes test functions; Darcy and pressure parts
/// are those of the classical right-hand side.
pub fn rhs_robust(d: &Discretization, op: &ReconstructionOperator, problem: &dyn Problem) -> RhsParts {
    rhs_robust_with_degree(d, op, problem, STANDARD_DEGREE).expect("standard rule is tabulated")
}

/// [`rhs_robust`] with the Stokes load integrated by a rule of the given
/// degree.
pub fn rhs_robust_with_degree(d: &Discretization, op: &ReconstructionOperator, problem: &dyn Problem, degree: usize) -> Result<RhsParts> {
    let rule = triangle_rule(degree)?;
    let mut stokes = vec![0.0; d.stokes.n_dofs()];
    for (lr, cell) in op.cells.iter().zip(&d.stokes.cells) {
        let el = &d.rt_elements[cell.tri];
        let mut load = vec![0.0; el.len()];
        for (lam, w) in rule.iter() {
            let f = problem.f(el.geo.point(lam), Subdomain::Stokes);
            let jw = 2.0 * el.geo.area * w;
            for (l, v) in load.iter_mut().zip(el.eval(lam).values) {
                *l += jw * (f[0] * v[0] + f[1] * v[1]);
            }
        }
        for j in 0..lr.w.cols {
            let s: f64 = (0..lr.w.rows).map(|b| lr.w[(b, j)] * load[b]).sum();
            stokes[d.stokes.global(cell, j)] += s;
        }
    }
    let (darcy, pressure) = rhs_common(d, problem);
    Ok(RhsParts { stokes, darcy, pressure })
}

#[cfg(test)]
mod tests;
