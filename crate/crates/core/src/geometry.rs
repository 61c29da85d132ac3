//! Affine triangle geometry: area, barycentric gradients and the
//! barycentric-to-physical map.

use crate::mesh::{signed_area, Mesh};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Gradient of each barycentric coordinate (constant on the triangle).
    pub grad_lambda: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(mesh: &Mesh, tri: usize) -> Self {
        let v = mesh.triangles[tri].vertices;
        Self::from_points([mesh.vertices[v[0]], mesh.vertices[v[1]], mesh.vertices[v[2]]])
    }

    pub fn from_points(vertices: [Point; 3]) -> Self {
        let area = signed_area(vertices[0], vertices[1], vertices[2]);
        let mut grad_lambda = [[0.0; 2]; 3];
        for (j, g) in grad_lambda.iter_mut().enumerate() {
            let a = vertices[(j + 1) % 3];
            let b = vertices[(j + 2) % 3];
            // lambda_j = area(x, a, b) / area
            *g = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
        }
        TriangleGeometry { vertices, area, grad_lambda }
    }

    /// Physical point with barycentric coordinates `lam`.
    pub fn point(&self, lam: &[f64; 3]) -> Point {
        let v = &self.vertices;
        [
            lam[0] * v[0][0] + lam[1] * v[1][0] + lam[2] * v[2][0],
            lam[0] * v[0][1] + lam[1] * v[1][1] + lam[2] * v[2][1],
        ]
    }

    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let v = &self.vertices;
        let l1 = signed_area(v[0], p, v[2]) / self.area;
        let l2 = signed_area(v[0], v[1], p) / self.area;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn centroid(&self) -> Point {
        self.point(&[1.0 / 3.0; 3])
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        (0..3)
            .map(|j| {
                let (a, b) = (v[(j + 1) % 3], v[(j + 2) % 3]);
                libm::hypot(b[0] - a[0], b[1] - a[1])
            })
            .fold(0.0, f64::max)
    }
}
