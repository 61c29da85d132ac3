//! Evaluation of a discrete solution at points of the mesh.

use crate::fespace::Discretization;
use crate::geometry::TriangleGeometry;
use crate::mesh::Subdomain;
use crate::system::Solution;
use crate::Point;

/// Discrete velocity and pressure of one solve, evaluable per triangle or
/// at physical points.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteFields<'a> {
    pub disc: &'a Discretization,
    pub solution: &'a Solution,
}

/// Everything known about the discrete fields at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub subdomain: Subdomain,
    pub velocity: [f64; 2],
    /// `g[i][j] = d u_i / d x_j`.
    pub gradient: [[f64; 2]; 2],
    pub divergence: f64,
    pub pressure: f64,
}

impl<'a> DiscreteFields<'a> {
    pub fn new(disc: &'a Discretization, solution: &'a Solution) -> Self {
        DiscreteFields { disc, solution }
    }

    /// Values on `tri` at barycentric coordinates `lam`. The gradient is
    /// zero on Darcy triangles (only the divergence is meaningful there).
    pub fn at(&self, tri: usize, lam: &[f64; 3]) -> PointValue {
        let d = self.disc;
        let subdomain = d.mesh.triangles[tri].subdomain;
        let mut velocity = [0.0; 2];
        let mut gradient = [[0.0; 2]; 2];
        let mut divergence = 0.0;
        match subdomain {
            Subdomain::Stokes => {
                let cell = &d.stokes.cells[d.stokes.cell_of_triangle[tri].unwrap()];
                let geo = TriangleGeometry::new(&d.mesh, tri);
                let e = d.stokes.eval(&geo, lam);
                for j in 0..e.len() {
                    let c = self.solution.stokes[d.stokes.global(cell, j)];
                    for a in 0..2 {
                        velocity[a] += c * e.values[j][a];
                        for b in 0..2 {
                            gradient[a][b] += c * e.gradients[j][a][b];
                        }
                    }
                    divergence += c * e.divergence[j];
                }
            }
            Subdomain::Darcy => {
                let cell = &d.darcy.cells[d.darcy.cell_of_triangle[tri].unwrap()];
                let w: alloc::vec::Vec<f64> = cell.dofs.iter().map(|g| self.solution.darcy[*g]).collect();
                (velocity, divergence) = d.rt_elements[tri].combine(&w, lam);
            }
        }
        let pressure = d.pressure.dofs(tri).zip(d.pressure.basis.values(lam)).map(|(i, q)| self.solution.pressure[i] * q).sum();
        PointValue { subdomain, velocity, gradient, divergence, pressure }
    }

    /// Values at a physical point, `None` outside the mesh. Points on an
    /// edge take the value of one adjacent triangle.
    pub fn eval(&self, p: Point) -> Option<PointValue> {
        self.disc.mesh.locate(p).map(|(tri, lam)| self.at(tri, &lam))
    }
}
