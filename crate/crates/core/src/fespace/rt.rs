use alloc::vec;
use alloc::vec::Vec;

use super::{edge_basis, Degree};
use crate::geometry::TriangleGeometry;
use crate::linalg::{DenseMatrix, Lu};
use crate::mesh::Mesh;
use crate::quadrature::{edge_rule, triangle_rule, STANDARD_DEGREE};
use crate::{Point, Result};

/// Values, gradients (`g[i][j] = d v_i / d x_j`) and divergences of a set of
/// vector basis functions at one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorBasisEval {
    pub values: Vec<[f64; 2]>,
    pub gradients: Vec<[[f64; 2]; 2]>,
    pub divergence: Vec<f64>,
}

impl VectorBasisEval {
    pub fn with_capacity(n: usize) -> Self {
        VectorBasisEval { values: Vec::with_capacity(n), gradients: Vec::with_capacity(n), divergence: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, v: [f64; 2], g: [[f64; 2]; 2]) {
        self.values.push(v);
        self.gradients.push(g);
        self.divergence.push(g[0][0] + g[1][1]);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(super) fn n_interior(degree: Degree) -> usize {
    match degree {
        Degree::Two => 2,
        Degree::Three => 6,
    }
}

/// One evaluation point of the dof functionals: `l_f(v) = sum v(x) . w`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPoint {
    pub lam: [f64; 3],
    pub point: Point,
    /// `(local dof, weight vector)` pairs.
    pub weights: Vec<(usize, [f64; 2])>,
}

/// Raviart-Thomas element of index `k - 1` on one triangle.
///
/// Local dofs: for local edge `j` (opposite vertex `j`) the `k` normal
/// moments `int_e v . n_e q_i`, with `n_e` the stored mesh normal and `q_i`
/// the Lagrange basis on nodes running from the lower global vertex; then
/// the interior moments against `e_x, e_y` (`k = 2`) or `lambda_m e_c`
/// (`k = 3`, index `2 m + c`).
///
/// The raw basis is the Bernstein-Bezier set for `k = 2` and scaled
/// monomials `[P_2]^2 + xi P~_2` for `k = 3`; the returned basis is dual to
/// the dofs.
#[derive(Debug, Clone)]
pub struct RtElement {
    pub tri: usize,
    pub degree: Degree,
    pub geo: TriangleGeometry,
    /// Raw-basis dof matrix `M[f][a] = l_f(rho_a)`.
    pub dof_matrix: DenseMatrix,
    /// `chi_b = sum_a coef[(a, b)] rho_a`, the inverse of `dof_matrix`.
    pub coef: DenseMatrix,
    pub functionals: Vec<MomentPoint>,
    pub condition: f64,
    center: Point,
    h: f64,
}

impl RtElement {
    pub fn new(mesh: &Mesh, tri: usize, degree: Degree) -> Result<RtElement> {
        let geo = TriangleGeometry::new(mesh, tri);
        let k = degree.k();
        let mut functionals = Vec::new();
        let erule = edge_rule(STANDARD_DEGREE)?;
        for j in 0..3 {
            let e = &mesh.edges[mesh.triangles[tri].edges[j]];
            for (t, w) in erule.points.iter().zip(&erule.weights) {
                let point = e.point(mesh, *t);
                let q = edge_basis(degree, *t);
                let weights = (0..k).map(|i| (j * k + i, [w * e.length * q[i] * e.normal[0], w * e.length * q[i] * e.normal[1]])).collect();
                functionals.push(MomentPoint { lam: geo.barycentric(point), point, weights });
            }
        }
        let trule = triangle_rule(STANDARD_DEGREE)?;
        for (lam, w) in trule.points.iter().zip(&trule.weights) {
            let jw = 2.0 * geo.area * w;
            let weights = match degree {
                Degree::Two => vec![(3 * k, [jw, 0.0]), (3 * k + 1, [0.0, jw])],
                Degree::Three => (0..3).flat_map(|m| [(3 * k + 2 * m, [jw * lam[m], 0.0]), (3 * k + 2 * m + 1, [0.0, jw * lam[m]])]).collect(),
            };
            functionals.push(MomentPoint { lam: *lam, point: geo.point(lam), weights });
        }
        let n = 3 * k + n_interior(degree);
        let mut el = RtElement {
            tri,
            degree,
            geo,
            dof_matrix: DenseMatrix::zeros(n, n),
            coef: DenseMatrix::zeros(n, n),
            functionals,
            condition: 0.0,
            center: geo.centroid(),
            h: geo.diameter(),
        };
        let mut m = DenseMatrix::zeros(n, n);
        for mp in &el.functionals {
            let (vals, _) = el.raw(&mp.lam);
            for (f, w) in &mp.weights {
                for (a, v) in vals.iter().enumerate() {
                    m[(*f, a)] += v[0] * w[0] + v[1] * w[1];
                }
            }
        }
        let lu = Lu::new(&m).map_err(|_| crate::Error::SingularLocalMatrix(tri))?;
        el.condition = lu.condition();
        if el.condition > 1e8 {
            log::warn!("ill-conditioned Raviart-Thomas element {tri}: cond {:.3e}", el.condition);
        }
        el.coef = lu.inverse();
        el.dof_matrix = m;
        Ok(el)
    }

    pub fn len(&self) -> usize {
        self.dof_matrix.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Applies the local dof functionals to a vector field.
    pub fn moments(&self, f: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for mp in &self.functionals {
            let v = f(mp.point);
            for (d, w) in &mp.weights {
                out[*d] += v[0] * w[0] + v[1] * w[1];
            }
        }
        out
    }

    /// Raw basis values and gradients.
    pub fn raw(&self, lam: &[f64; 3]) -> (Vec<[f64; 2]>, Vec<[[f64; 2]; 2]>) {
        match self.degree {
            Degree::Two => self.raw_bernstein(lam),
            Degree::Three => self.raw_monomial(lam),
        }
    }

    fn raw_bernstein(&self, l: &[f64; 3]) -> (Vec<[f64; 2]>, Vec<[[f64; 2]; 2]>) {
        let z = &self.geo.vertices;
        let g = &self.geo.grad_lambda;
        let a = self.geo.area;
        // edge vectors E_j = z_{j+2} - z_{j+1}
        let ev: [[f64; 2]; 3] = core::array::from_fn(|j| {
            let (p, q) = (z[(j + 1) % 3], z[(j + 2) % 3]);
            [q[0] - p[0], q[1] - p[1]]
        });
        // each function is a sum of s * (prod lambda) * E_c
        let table: [(f64, &[(f64, &[usize], usize)]); 8] = [
            (0.5 / a, &[(1.0, &[1], 2), (-1.0, &[2], 1)]),
            (0.5 / a, &[(1.0, &[2], 0), (-1.0, &[0], 2)]),
            (0.5 / a, &[(1.0, &[0], 1), (-1.0, &[1], 0)]),
            (1.0 / a, &[(1.0, &[2], 1), (1.0, &[1], 2)]),
            (1.0 / a, &[(1.0, &[2], 0), (1.0, &[0], 2)]),
            (1.0 / a, &[(1.0, &[1], 0), (1.0, &[0], 1)]),
            (1.0 / a, &[(1.0, &[0, 1], 2), (-1.0, &[0, 2], 1)]),
            (1.0 / a, &[(1.0, &[0, 2], 1), (-1.0, &[1, 2], 0)]),
        ];
        let mut vals = Vec::with_capacity(8);
        let mut grads = Vec::with_capacity(8);
        for (s, terms) in table {
            let mut v = [0.0; 2];
            let mut gr = [[0.0; 2]; 2];
            for (c, lams, e) in terms {
                let (p, dp) = match lams {
                    [i] => (l[*i], g[*i]),
                    [i, j] => (l[*i] * l[*j], [l[*i] * g[*j][0] + l[*j] * g[*i][0], l[*i] * g[*j][1] + l[*j] * g[*i][1]]),
                    _ => unreachable!(),
                };
                for r in 0..2 {
                    v[r] += s * c * p * ev[*e][r];
                    for col in 0..2 {
                        gr[r][col] += s * c * ev[*e][r] * dp[col];
                    }
                }
            }
            vals.push(v);
            grads.push(gr);
        }
        (vals, grads)
    }

    fn raw_monomial(&self, lam: &[f64; 3]) -> (Vec<[f64; 2]>, Vec<[[f64; 2]; 2]>) {
        let x = self.geo.point(lam);
        let h = self.h;
        let (a, b) = ((x[0] - self.center[0]) / h, (x[1] - self.center[1]) / h);
        // scalar monomials and their xi-gradients
        let mono = [(1.0, [0.0, 0.0]), (a, [1.0, 0.0]), (b, [0.0, 1.0]), (a * a, [2.0 * a, 0.0]), (a * b, [b, a]), (b * b, [0.0, 2.0 * b])];
        let mut vals = Vec::with_capacity(15);
        let mut grads = Vec::with_capacity(15);
        for c in 0..2 {
            for (m, dm) in &mono {
                let mut v = [0.0; 2];
                v[c] = *m;
                let mut g = [[0.0; 2]; 2];
                g[c] = [dm[0] / h, dm[1] / h];
                vals.push(v);
                grads.push(g);
            }
        }
        for (m, dm) in &mono[3..] {
            vals.push([a * m, b * m]);
            grads.push([
                [(m + a * dm[0]) / h, a * dm[1] / h],
                [b * dm[0] / h, (m + b * dm[1]) / h],
            ]);
        }
        (vals, grads)
    }

    /// The dual basis at `lam`.
    pub fn eval(&self, lam: &[f64; 3]) -> VectorBasisEval {
        let (rv, rg) = self.raw(lam);
        let n = self.len();
        let mut out = VectorBasisEval::with_capacity(n);
        for b in 0..n {
            let mut v = [0.0; 2];
            let mut g = [[0.0; 2]; 2];
            for a in 0..n {
                let c = self.coef[(a, b)];
                if c == 0.0 {
                    continue;
                }
                for r in 0..2 {
                    v[r] += c * rv[a][r];
                    for s in 0..2 {
                        g[r][s] += c * rg[a][r][s];
                    }
                }
            }
            out.push(v, g);
        }
        out
    }

    /// Value of `sum_b w_b chi_b` at `lam`.
    pub fn combine(&self, w: &[f64], lam: &[f64; 3]) -> ([f64; 2], f64) {
        let e = self.eval(lam);
        let mut v = [0.0; 2];
        let mut div = 0.0;
        for (b, wb) in w.iter().enumerate() {
            v[0] += wb * e.values[b][0];
            v[1] += wb * e.values[b][1];
            div += wb * e.divergence[b];
        }
        (v, div)
    }
}
