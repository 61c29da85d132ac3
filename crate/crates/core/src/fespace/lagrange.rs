use alloc::vec;
use alloc::vec::Vec;

use super::Degree;
use crate::geometry::TriangleGeometry;
use crate::linalg::DenseMatrix;

type Term = (f64, [u8; 3]);

/// A local scalar basis written as polynomials in the barycentric
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    terms: Vec<Vec<Term>>,
    /// Barycentric anchor of each function (collocation point for interior ones).
    pub nodes: Vec<[f64; 3]>,
    /// The last `n_interior` functions vanish on the element boundary.
    pub n_interior: usize,
    pub interior_points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBasisEval {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

const E: [[u8; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

fn add(a: [u8; 3], b: [u8; 3]) -> [u8; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: [u8; 3], s: u8) -> [u8; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn unit(i: usize) -> [f64; 3] {
    let mut l = [0.0; 3];
    l[i] = 1.0;
    l
}

fn p2_terms() -> (Vec<Vec<Term>>, Vec<[f64; 3]>) {
    let mut terms = Vec::new();
    let mut nodes = Vec::new();
    for i in 0..3 {
        terms.push(vec![(2.0, scale(E[i], 2)), (-1.0, E[i])]);
        nodes.push(unit(i));
    }
    for j in 0..3 {
        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
        terms.push(vec![(4.0, add(E[a], E[b]))]);
        let mut l = [0.0; 3];
        l[a] = 0.5;
        l[b] = 0.5;
        nodes.push(l);
    }
    (terms, nodes)
}

impl PolyBasis {
    /// `P_k` Lagrange with interior enrichment: `27 b_T` for `k = 2`; for
    /// `k = 3` the cubic centroid function plus `81 b_T lambda_i`, `i = 0, 1`.
    pub fn stokes(degree: Degree) -> PolyBasis {
        let bubble = [1u8, 1, 1];
        let c = [1.0 / 3.0; 3];
        match degree {
            Degree::Two => {
                let (mut terms, mut nodes) = p2_terms();
                terms.push(vec![(27.0, bubble)]);
                nodes.push(c);
                PolyBasis { terms, nodes, n_interior: 1, interior_points: vec![c] }
            }
            Degree::Three => {
                let mut terms = Vec::new();
                let mut nodes = Vec::new();
                for i in 0..3 {
                    terms.push(vec![(4.5, scale(E[i], 3)), (-4.5, scale(E[i], 2)), (1.0, E[i])]);
                    nodes.push(unit(i));
                }
                for j in 0..3 {
                    let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                    for (near, far) in [(a, b), (b, a)] {
                        terms.push(vec![(13.5, add(scale(E[near], 2), E[far])), (-4.5, add(E[a], E[b]))]);
                        let mut l = [0.0; 3];
                        l[near] = 2.0 / 3.0;
                        l[far] = 1.0 / 3.0;
                        nodes.push(l);
                    }
                }
                terms.push(vec![(27.0, bubble)]);
                terms.push(vec![(81.0, add(bubble, E[0]))]);
                terms.push(vec![(81.0, add(bubble, E[1]))]);
                let interior_points = vec![c, [0.5, 0.25, 0.25], [0.25, 0.5, 0.25]];
                nodes.extend(interior_points.iter().copied());
                PolyBasis { terms, nodes, n_interior: 3, interior_points }
            }
        }
    }

    /// Nodal `P_{k-1}`: vertex values for `k = 2`, vertex and midpoint
    /// values for `k = 3`.
    pub fn pressure(degree: Degree) -> PolyBasis {
        match degree {
            Degree::Two => PolyBasis {
                terms: (0..3).map(|i| vec![(1.0, E[i])]).collect(),
                nodes: (0..3).map(unit).collect(),
                n_interior: 0,
                interior_points: Vec::new(),
            },
            Degree::Three => {
                let (terms, nodes) = p2_terms();
                PolyBasis { terms, nodes, n_interior: 0, interior_points: Vec::new() }
            }
        }
    }

    /// Plain `P_1` Lagrange, used by the unstable reference pair.
    pub fn linear() -> PolyBasis {
        Self::pressure(Degree::Two)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn values(&self, lam: &[f64; 3]) -> Vec<f64> {
        self.terms.iter().map(|ts| ts.iter().map(|(c, e)| c * pow3(lam, *e)).sum()).collect()
    }

    /// Derivatives with respect to the three barycentric coordinates.
    pub fn lambda_derivatives(&self, lam: &[f64; 3]) -> Vec<[f64; 3]> {
        self.terms
            .iter()
            .map(|ts| {
                let mut d = [0.0; 3];
                for (c, e) in ts {
                    for m in 0..3 {
                        if e[m] > 0 {
                            let mut em = *e;
                            em[m] -= 1;
                            d[m] += c * e[m] as f64 * pow3(lam, em);
                        }
                    }
                }
                d
            })
            .collect()
    }

    pub fn eval(&self, geo: &TriangleGeometry, lam: &[f64; 3]) -> ScalarBasisEval {
        let values = self.values(lam);
        let gradients = self
            .lambda_derivatives(lam)
            .into_iter()
            .map(|d| {
                let g = &geo.grad_lambda;
                [
                    d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
                    d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
                ]
            })
            .collect();
        ScalarBasisEval { values, gradients }
    }

    /// `G[q][i]` = interior function `i` at interior point `q`.
    pub fn interior_collocation(&self) -> DenseMatrix {
        let n_bdry = self.len() - self.n_interior;
        DenseMatrix::from_fn(self.n_interior, self.n_interior, |q, i| self.values(&self.interior_points[q])[n_bdry + i])
    }
}

fn pow3(lam: &[f64; 3], e: [u8; 3]) -> f64 {
    let mut v = 1.0;
    for m in 0..3 {
        for _ in 0..e[m] {
            v *= lam[m];
        }
    }
    v
}
