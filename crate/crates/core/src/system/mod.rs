//! Global saddle-point system. Unknowns are ordered Stokes velocity,
//! Darcy velocity, pressure, interface multipliers and the pressure-mean
//! multiplier. The matrix does not depend on the method; only the Stokes
//! part of the right-hand side does.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::bench::Problem;
use crate::fespace::Discretization;
use crate::forms::{
    dirichlet_data, local_a_darcy, local_a_interface, local_a_stokes, local_b, local_interface_multiplier, local_mean_constraint,
    rhs_classical, DirichletData, LocalBlock, ModelParams, RhsParts,
};
use crate::linalg::{CsrMatrix, Lu};
use crate::reconstruction::{rhs_robust, ReconstructionOperator};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Classical,
    Robust,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Robust => "robust",
        }
    }
}

/// Offsets of the five unknown blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMap {
    pub stokes: Range<usize>,
    pub darcy: Range<usize>,
    pub pressure: Range<usize>,
    pub trace: Range<usize>,
    pub mean: usize,
    pub n: usize,
}

impl BlockMap {
    pub fn new(d: &Discretization) -> BlockMap {
        let a = d.stokes.n_dofs();
        let b = a + d.darcy.n_dofs;
        let c = b + d.pressure.n_dofs;
        let e = c + d.trace.n_dofs;
        BlockMap { stokes: 0..a, darcy: a..b, pressure: b..c, trace: c..e, mean: e, n: e + 1 }
    }

    pub fn names(&self) -> [(&'static str, Range<usize>); 5] {
        [
            ("stokes velocity", self.stokes.clone()),
            ("darcy velocity", self.darcy.clone()),
            ("pressure", self.pressure.clone()),
            ("interface multiplier", self.trace.clone()),
            ("mean multiplier", self.mean..self.mean + 1),
        ]
    }

    /// Name of the block containing a global index.
    pub fn block_of(&self, i: usize) -> &'static str {
        self.names().into_iter().find(|(_, r)| r.contains(&i)).map(|(n, _)| n).unwrap_or("out of range")
    }
}

#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub map: BlockMap,
    pub method: Method,
    pub params: ModelParams,
    pub dirichlet: DirichletData,
}

fn push_block(t: &mut Vec<(usize, usize, f64)>, blk: &LocalBlock, row_off: usize, col_off: usize, transpose: bool) {
    for (a, r) in blk.rows.iter().enumerate() {
        for (b, c) in blk.cols.iter().enumerate() {
            let v = blk.values[(a, b)];
            if v != 0.0 {
                t.push((row_off + r, col_off + c, v));
                if transpose {
                    t.push((col_off + c, row_off + r, v));
                }
            }
        }
    }
}

/// Matrix without penalty terms, as triplets.
pub fn matrix_triplets(d: &Discretization, params: &ModelParams) -> Result<Vec<(usize, usize, f64)>> {
    if d.trace.edges.is_empty() {
        return Err(Error::EmptyInterface);
    }
    let m = BlockMap::new(d);
    let mut t = Vec::new();
    for cell in &d.stokes.cells {
        push_block(&mut t, &local_a_stokes(d, cell.tri, params), 0, 0, false);
    }
    for e in &d.trace.edges {
        push_block(&mut t, &local_a_interface(d, *e, params), 0, 0, false);
    }
    for cell in &d.darcy.cells {
        push_block(&mut t, &local_a_darcy(d, cell.tri, params), m.darcy.start, m.darcy.start, false);
    }
    for tri in 0..d.mesh.n_triangles() {
        let blk = local_b(d, tri);
        let col = match d.mesh.triangles[tri].subdomain {
            crate::mesh::Subdomain::Stokes => m.stokes.start,
            crate::mesh::Subdomain::Darcy => m.darcy.start,
        };
        push_block(&mut t, &blk, m.pressure.start, col, true);
    }
    for slot in 0..d.trace.edges.len() {
        let blk = local_interface_multiplier(d, slot);
        push_block(&mut t, &blk.stokes, m.trace.start, m.stokes.start, true);
        push_block(&mut t, &blk.darcy, m.trace.start, m.darcy.start, true);
    }
    for tri in 0..d.mesh.n_triangles() {
        for (i, v) in local_mean_constraint(d, tri) {
            t.push((m.pressure.start + i, m.mean, v));
            t.push((m.mean, m.pressure.start + i, v));
        }
    }
    Ok(t)
}

/// Assembles matrix and right-hand side. `op` is required for the robust
/// method (build it once per mesh with [`ReconstructionOperator::new`]).
pub fn assemble(d: &Discretization, problem: &dyn Problem, method: Method, op: Option<&ReconstructionOperator>) -> Result<SaddleSystem> {
    let params = problem.params();
    params.validate()?;
    let map = BlockMap::new(d);
    let mut t = matrix_triplets(d, &params)?;
    let parts = match method {
        Method::Classical => rhs_classical(d, problem),
        Method::Robust => {
            let owned;
            let op = match op {
                Some(op) => op,
                None => {
                    owned = ReconstructionOperator::new(d)?;
                    &owned
                }
            };
            rhs_robust(d, op, problem)
        }
    };
    let mut rhs = stack_rhs(&map, parts);
    let dirichlet = dirichlet_data(d, problem);
    let p = params.penalty;
    for (i, v) in &dirichlet.stokes {
        t.push((map.stokes.start + i, map.stokes.start + i, p));
        rhs[map.stokes.start + i] += p * v;
    }
    for (i, v) in &dirichlet.darcy {
        t.push((map.darcy.start + i, map.darcy.start + i, p));
        rhs[map.darcy.start + i] += p * v;
    }
    let matrix = CsrMatrix::from_triplets(map.n, map.n, &t)?;
    Ok(SaddleSystem { matrix, rhs, map, method, params, dirichlet })
}

fn stack_rhs(map: &BlockMap, parts: RhsParts) -> Vec<f64> {
    let mut rhs = vec![0.0; map.n];
    rhs[map.stokes.clone()].copy_from_slice(&parts.stokes);
    rhs[map.darcy.clone()].copy_from_slice(&parts.darcy);
    rhs[map.pressure.clone()].copy_from_slice(&parts.pressure);
    rhs
}

/// A solution vector split by block.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub stokes: Vec<f64>,
    pub darcy: Vec<f64>,
    pub pressure: Vec<f64>,
    pub multiplier: Vec<f64>,
    pub mean_multiplier: f64,
}

impl Solution {
    pub fn from_vector(map: &BlockMap, x: &[f64]) -> Solution {
        Solution {
            stokes: x[map.stokes.clone()].to_vec(),
            darcy: x[map.darcy.clone()].to_vec(),
            pressure: x[map.pressure.clone()].to_vec(),
            multiplier: x[map.trace.clone()].to_vec(),
            mean_multiplier: x[map.mean],
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.stokes.len() + self.darcy.len() + self.pressure.len() + self.multiplier.len() + 1);
        v.extend_from_slice(&self.stokes);
        v.extend_from_slice(&self.darcy);
        v.extend_from_slice(&self.pressure);
        v.extend_from_slice(&self.multiplier);
        v.push(self.mean_multiplier);
        v
    }
}

impl SaddleSystem {
    /// Dense LU of the diagonally equilibrated system `S A S y = S b`,
    /// `S = |diag A|^{-1/2}`. Only for small meshes; the penalty rows would
    /// otherwise swamp the pivot threshold.
    pub fn solve_dense(&self) -> Result<Vec<f64>> {
        let n = self.map.n;
        let s: Vec<f64> = (0..n)
            .map(|i| {
                let a = libm::fabs(self.matrix.get(i, i));
                if a > 0.0 { 1.0 / libm::sqrt(a) } else { 1.0 }
            })
            .collect();
        let mut a = self.matrix.to_dense();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] *= s[i] * s[j];
            }
        }
        let b: Vec<f64> = (0..n).map(|i| s[i] * self.rhs[i]).collect();
        let y = Lu::new(&a)?.solve(&b);
        Ok(y.iter().zip(&s).map(|(y, s)| y * s).collect())
    }

    /// `||A x - b|| / ||b||` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r = self.matrix.matvec(x);
        let num: f64 = r.iter().zip(&self.rhs).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = self.rhs.iter().map(|b| b * b).sum();
        libm::sqrt(num) / if den > 0.0 { libm::sqrt(den) } else { 1.0 }
    }

    /// Infinity norm of the residual restricted to each block.
    pub fn block_residuals(&self, x: &[f64]) -> Vec<(&'static str, f64)> {
        let r = self.matrix.matvec(x);
        self.map
            .names()
            .into_iter()
            .map(|(name, range)| (name, range.map(|i| libm::fabs(r[i] - self.rhs[i])).fold(0.0, f64::max)))
            .collect()
    }
}

#[cfg(test)]
mod tests;
