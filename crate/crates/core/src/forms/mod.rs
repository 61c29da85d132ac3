//! Element and edge contributions of the coupled bilinear forms, the
//! multiplier couplings, Dirichlet data for the penalty rows and the
//! classical right-hand side.
//!
//! All local blocks index their rows and columns by dof ids inside the
//! respective space; [`crate::system`] shifts them into the global system.

use alloc::vec;
use alloc::vec::Vec;

use crate::bench::Problem;
use crate::fespace::{edge_basis, Cell, Discretization};
use crate::geometry::TriangleGeometry;
use crate::linalg::DenseMatrix;
use crate::mesh::{EdgeClass, Subdomain};
use crate::quadrature::{edge_rule, triangle_rule, STANDARD_DEGREE};
use crate::{Error, Result};

/// Penalty weight per unit `mu + 1` on constrained boundary dofs. The
/// consistency error of the penalty rows is `O(load / penalty)`, so this has
/// to sit far above `1e10` for gradient loads of size `1e5` to stay invisible.
pub const DEFAULT_PENALTY: f64 = 1e16;

/// Physical parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    /// Scalar permeability.
    pub k: f64,
    /// Slip coefficient `alpha_1 / sqrt(kappa)`; the interface form uses
    /// `mu` times this value.
    pub alpha1_over_sqrt_kappa: f64,
    pub penalty: f64,
}

impl ModelParams {
    /// Penalty defaults to `1e16 (mu + 1)`.
    pub fn new(mu: f64, k: f64, alpha1_over_sqrt_kappa: f64) -> Result<ModelParams> {
        let p = ModelParams { mu, k, alpha1_over_sqrt_kappa, penalty: DEFAULT_PENALTY * (mu + 1.0) };
        p.validate()?;
        Ok(p)
    }

    pub fn with_penalty(mut self, penalty: f64) -> Result<ModelParams> {
        self.penalty = penalty;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.mu) || !ok(self.k) || !ok(self.penalty) || !(self.alpha1_over_sqrt_kappa >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("{self:?}")));
        }
        Ok(())
    }
}

/// Dense local matrix with the ids of its rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: DenseMatrix,
}

impl LocalBlock {
    fn new(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        let values = DenseMatrix::zeros(rows.len(), cols.len());
        LocalBlock { rows, cols, values }
    }
}

fn stokes_cols(d: &Discretization, cell: &Cell) -> Vec<usize> {
    (0..2 * d.stokes.n_local()).map(|i| d.stokes.global(cell, i)).collect()
}

fn stokes_cell(d: &Discretization, tri: usize) -> &Cell {
    &d.stokes.cells[d.stokes.cell_of_triangle[tri].expect("Stokes triangle")]
}

fn darcy_cell(d: &Discretization, tri: usize) -> &Cell {
    &d.darcy.cells[d.darcy.cell_of_triangle[tri].expect("Darcy triangle")]
}

/// `2 mu (D(u), D(v))_T`.
pub fn local_a_stokes(d: &Discretization, tri: usize, params: &ModelParams) -> LocalBlock {
    let cell = stokes_cell(d, tri);
    let ids = stokes_cols(d, cell);
    let mut blk = LocalBlock::new(ids.clone(), ids);
    let geo = TriangleGeometry::new(&d.mesh, tri);
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let n = blk.rows.len();
    let mut sym = vec![[[0.0; 2]; 2]; n];
    for (lam, w) in rule.iter() {
        let e = d.stokes.eval(&geo, lam);
        for (s, g) in sym.iter_mut().zip(&e.gradients) {
            *s = [[g[0][0], 0.5 * (g[0][1] + g[1][0])], [0.5 * (g[0][1] + g[1][0]), g[1][1]]];
        }
        let jw = 2.0 * params.mu * 2.0 * geo.area * w;
        for a in 0..n {
            for b in a..n {
                let v = jw * (sym[a][0][0] * sym[b][0][0] + 2.0 * sym[a][0][1] * sym[b][0][1] + sym[a][1][1] * sym[b][1][1]);
                blk.values[(a, b)] += v;
            }
        }
    }
    symmetrize(&mut blk.values);
    blk
}

fn symmetrize(m: &mut DenseMatrix) {
    for a in 0..m.rows {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
}

/// `mu (K^{-1} u, v)_T` on a Darcy triangle.
pub fn local_a_darcy(d: &Discretization, tri: usize, params: &ModelParams) -> LocalBlock {
    let cell = darcy_cell(d, tri);
    let mut blk = LocalBlock::new(cell.dofs.clone(), cell.dofs.clone());
    let el = &d.rt_elements[tri];
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let n = cell.dofs.len();
    for (lam, w) in rule.iter() {
        let e = el.eval(lam);
        let jw = params.mu / params.k * 2.0 * el.geo.area * w;
        for a in 0..n {
            for b in a..n {
                blk.values[(a, b)] += jw * (e.values[a][0] * e.values[b][0] + e.values[a][1] * e.values[b][1]);
            }
        }
    }
    symmetrize(&mut blk.values);
    blk
}

/// Slip term `mu alpha_1 / sqrt(kappa) <u . tau, v . tau>_e` on an
/// interface edge, acting on the adjacent Stokes triangle.
pub fn local_a_interface(d: &Discretization, edge: usize, params: &ModelParams) -> LocalBlock {
    let e = &d.mesh.edges[edge];
    let tri = e.triangles[0].unwrap();
    let cell = stokes_cell(d, tri);
    let ids = stokes_cols(d, cell);
    let mut blk = LocalBlock::new(ids.clone(), ids);
    let geo = TriangleGeometry::new(&d.mesh, tri);
    let c = params.mu * params.alpha1_over_sqrt_kappa;
    let rule = edge_rule(STANDARD_DEGREE).unwrap();
    for (t, w) in rule.iter() {
        let lam = geo.barycentric(e.point(&d.mesh, t));
        let ev = d.stokes.eval(&geo, &lam);
        let vt: Vec<f64> = ev.values.iter().map(|v| v[0] * e.tangent[0] + v[1] * e.tangent[1]).collect();
        for a in 0..vt.len() {
            for b in 0..vt.len() {
                blk.values[(a, b)] += c * w * e.length * vt[a] * vt[b];
            }
        }
    }
    blk
}

/// `-(div v, q)_T`: pressure rows, velocity columns of the triangle's own
/// velocity space.
pub fn local_b(d: &Discretization, tri: usize) -> LocalBlock {
    let geo = TriangleGeometry::new(&d.mesh, tri);
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let rows: Vec<usize> = d.pressure.dofs(tri).collect();
    match d.mesh.triangles[tri].subdomain {
        Subdomain::Stokes => {
            let mut blk = LocalBlock::new(rows, stokes_cols(d, stokes_cell(d, tri)));
            for (lam, w) in rule.iter() {
                let q = d.pressure.basis.values(lam);
                let e = d.stokes.eval(&geo, lam);
                fill_b(&mut blk.values, &q, &e.divergence, 2.0 * geo.area * w);
            }
            blk
        }
        Subdomain::Darcy => {
            let mut blk = LocalBlock::new(rows, darcy_cell(d, tri).dofs.clone());
            let el = &d.rt_elements[tri];
            for (lam, w) in rule.iter() {
                let q = d.pressure.basis.values(lam);
                let e = el.eval(lam);
                fill_b(&mut blk.values, &q, &e.divergence, 2.0 * geo.area * w);
            }
            blk
        }
    }
}

fn fill_b(m: &mut DenseMatrix, q: &[f64], div: &[f64], jw: f64) {
    for (i, qi) in q.iter().enumerate() {
        for (j, dj) in div.iter().enumerate() {
            m[(i, j)] -= jw * qi * dj;
        }
    }
}

/// Multiplier coupling on one interface edge: `<v^s . n^s, mu_i>_e` for
/// the Stokes columns and `<v^d . n^d, mu_i>_e` for the Darcy columns.
/// Since Darcy edge dofs are the moments against the same `mu_i` taken with
/// `n = n^s`, the Darcy part is exactly minus the identity.
pub struct MultiplierBlock {
    pub stokes: LocalBlock,
    pub darcy: LocalBlock,
}

pub fn local_interface_multiplier(d: &Discretization, slot: usize) -> MultiplierBlock {
    let edge = d.trace.edges[slot];
    let e = &d.mesh.edges[edge];
    let tri = e.triangles[0].unwrap();
    let rows: Vec<usize> = d.trace.dofs(slot).collect();
    let k = rows.len();
    let mut stokes = LocalBlock::new(rows.clone(), stokes_cols(d, stokes_cell(d, tri)));
    let geo = TriangleGeometry::new(&d.mesh, tri);
    let rule = edge_rule(STANDARD_DEGREE).unwrap();
    for (t, w) in rule.iter() {
        let lam = geo.barycentric(e.point(&d.mesh, t));
        let ev = d.stokes.eval(&geo, &lam);
        let q = edge_basis(d.degree, t);
        for i in 0..k {
            for (j, v) in ev.values.iter().enumerate() {
                stokes.values[(i, j)] += w * e.length * q[i] * (v[0] * e.normal[0] + v[1] * e.normal[1]);
            }
        }
    }
    let first = d.darcy.edge_first[edge].expect("interface edge has Darcy dofs");
    let mut darcy = LocalBlock::new(rows, (first..first + k).collect());
    for i in 0..k {
        darcy.values[(i, i)] = -1.0;
    }
    MultiplierBlock { stokes, darcy }
}

/// `int_T q` for each local pressure function (a single row).
pub fn local_mean_constraint(d: &Discretization, tri: usize) -> Vec<(usize, f64)> {
    let geo = TriangleGeometry::new(&d.mesh, tri);
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let mut row: Vec<(usize, f64)> = d.pressure.dofs(tri).map(|i| (i, 0.0)).collect();
    for (lam, w) in rule.iter() {
        for (r, q) in row.iter_mut().zip(d.pressure.basis.values(lam)) {
            r.1 += 2.0 * geo.area * w * q;
        }
    }
    row
}

/// Prescribed values for the penalty rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletData {
    /// `(vector dof, value)` on the external Stokes boundary.
    pub stokes: Vec<(usize, f64)>,
    /// `(dof, value)` for Darcy edge moments on the external Darcy boundary.
    pub darcy: Vec<(usize, f64)>,
}

/// Evaluates the boundary data of `problem` at the constrained dofs:
/// nodal values for Stokes, normal-flux moments for Darcy.
pub fn dirichlet_data(d: &Discretization, problem: &dyn Problem) -> DirichletData {
    let s = &d.stokes;
    let mut stokes = Vec::new();
    for (i, m) in s.boundary.iter().enumerate() {
        if let Some(marker) = m {
            let v = problem.stokes_boundary(s.meta[i].anchor, *marker);
            stokes.push((i, v[0]));
            stokes.push((s.n_scalar + i, v[1]));
        }
    }
    let mut darcy = Vec::new();
    let rule = edge_rule(STANDARD_DEGREE).unwrap();
    for e in d.mesh.edges_of_class(EdgeClass::BoundaryDarcy) {
        let edge = &d.mesh.edges[e];
        let first = d.darcy.edge_first[e].unwrap();
        let mut m = vec![0.0; d.degree.k()];
        for (t, w) in rule.iter() {
            let v = problem.darcy_boundary(edge.point(&d.mesh, t));
            let q = edge_basis(d.degree, t);
            for (i, mi) in m.iter_mut().enumerate() {
                *mi += w * edge.length * q[i] * (v[0] * edge.normal[0] + v[1] * edge.normal[1]);
            }
        }
        darcy.extend(m.into_iter().enumerate().map(|(i, v)| (first + i, v)));
    }
    DirichletData { stokes, darcy }
}

/// Right-hand side split by block.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsParts {
    pub stokes: Vec<f64>,
    pub darcy: Vec<f64>,
    pub pressure: Vec<f64>,
}

/// Darcy and pressure parts shared by both methods: `(f, chi_j)_d` and
/// `-(g, q_j)` (the constraint rows read `-(div u, q) = -(g, q)`).
pub(crate) fn rhs_common(d: &Discretization, problem: &dyn Problem) -> (Vec<f64>, Vec<f64>) {
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let mut darcy = vec![0.0; d.darcy.n_dofs];
    let mut pressure = vec![0.0; d.pressure.n_dofs];
    for t in 0..d.mesh.n_triangles() {
        let dom = d.mesh.triangles[t].subdomain;
        let geo = TriangleGeometry::new(&d.mesh, t);
        let el = &d.rt_elements[t];
        let dofs = d.pressure.dofs(t);
        for (lam, w) in rule.iter() {
            let x = geo.point(lam);
            let jw = 2.0 * geo.area * w;
            let g = problem.g(x, dom);
            for (i, q) in dofs.clone().zip(d.pressure.basis.values(lam)) {
                pressure[i] -= jw * g * q;
            }
            if dom == Subdomain::Darcy {
                let f = problem.f(x, dom);
                let e = el.eval(lam);
                for (gid, v) in darcy_cell(d, t).dofs.iter().zip(&e.values) {
                    darcy[*gid] += jw * (f[0] * v[0] + f[1] * v[1]);
                }
            }
        }
    }
    (darcy, pressure)
}

/// `(f, psi_j)` for all velocity test functions and `-(g, q_j)` for pressures.
pub fn rhs_classical(d: &Discretization, problem: &dyn Problem) -> RhsParts {
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let mut stokes = vec![0.0; d.stokes.n_dofs()];
    for cell in &d.stokes.cells {
        let geo = TriangleGeometry::new(&d.mesh, cell.tri);
        for (lam, w) in rule.iter() {
            let f = problem.f(geo.point(lam), Subdomain::Stokes);
            let e = d.stokes.eval(&geo, lam);
            let jw = 2.0 * geo.area * w;
            for (i, v) in e.values.iter().enumerate() {
                stokes[d.stokes.global(cell, i)] += jw * (f[0] * v[0] + f[1] * v[1]);
            }
        }
    }
    let (darcy, pressure) = rhs_common(d, problem);
    RhsParts { stokes, darcy, pressure }
}
