//! Discrete spaces: bubble-enriched vector Lagrange on the Stokes region,
//! Raviart-Thomas on the Darcy region, discontinuous pressures on the whole
//! mesh and a scalar multiplier space on interface edges.
//!
//! Global numbering of every space is deterministic and derived from mesh
//! entity order only.

mod lagrange;
mod rt;

use alloc::vec;
use alloc::vec::Vec;

pub use lagrange::{PolyBasis, ScalarBasisEval};
pub use rt::{RtElement, VectorBasisEval};

use crate::geometry::TriangleGeometry;
use crate::mesh::{EdgeClass, Marker, Mesh, Subdomain};
use crate::{Error, Point, Result};

/// Velocity polynomial degree `k`; pressures and fluxes use `k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degree {
    Two,
    Three,
}

impl Degree {
    pub fn from_k(k: usize) -> Result<Degree> {
        match k {
            2 => Ok(Degree::Two),
            3 => Ok(Degree::Three),
            _ => Err(Error::UnsupportedOrder(k)),
        }
    }

    pub fn k(self) -> usize {
        match self {
            Degree::Two => 2,
            Degree::Three => 3,
        }
    }
}

/// The element families used by the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementFamily {
    LagrangeBubbleVec(Degree),
    RaviartThomas(Degree),
    Discontinuous(Degree),
    Trace(Degree),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofKind {
    Vertex(usize),
    EdgeNode { edge: usize, node: usize },
    Interior { tri: usize, index: usize },
    EdgeMoment { edge: usize, node: usize },
    InteriorMoment { tri: usize, index: usize },
    CellNode { tri: usize, node: usize },
    TraceNode { edge: usize, node: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofMeta {
    pub kind: DofKind,
    pub anchor: Point,
}

/// Lagrange nodes of `P_{k-1}` on `[0, 1]`, used for edge moments and the
/// multiplier space.
pub fn edge_nodes(degree: Degree) -> &'static [f64] {
    match degree {
        Degree::Two => &[0.0, 1.0],
        Degree::Three => &[0.0, 0.5, 1.0],
    }
}

/// Values of the `P_{k-1}` Lagrange basis on `[0, 1]` at `t`.
pub fn edge_basis(degree: Degree, t: f64) -> [f64; 3] {
    match degree {
        Degree::Two => [1.0 - t, t, 0.0],
        Degree::Three => [(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)],
    }
}

/// Continuous vector `P_k` plus interior bubbles on the Stokes triangles.
/// Components are blocked: all first-component dofs, then all second.
#[derive(Debug, Clone)]
pub struct StokesSpace {
    pub degree: Degree,
    pub basis: PolyBasis,
    /// Number of scalar dofs; the vector space has twice as many.
    pub n_scalar: usize,
    pub cells: Vec<Cell>,
    pub cell_of_triangle: Vec<Option<usize>>,
    pub meta: Vec<DofMeta>,
    /// Marker of scalar dofs on the external Stokes boundary. At corners a
    /// lid marker takes precedence over a wall marker.
    pub boundary: Vec<Option<Marker>>,
    interior_inverse: crate::linalg::Lu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub tri: usize,
    pub dofs: Vec<usize>,
}

impl StokesSpace {
    pub fn new(mesh: &Mesh, degree: Degree) -> Result<StokesSpace> {
        let basis = PolyBasis::stokes(degree);
        let k = degree.k();
        let per_edge = k - 1;
        let n_int = basis.n_interior;
        let mut vertex_id = vec![usize::MAX; mesh.n_vertices()];
        let mut edge_first = vec![usize::MAX; mesh.n_edges()];
        let mut meta = Vec::new();
        let stokes: Vec<usize> = mesh.triangles_in(Subdomain::Stokes).collect();
        if stokes.is_empty() {
            return Err(Error::InvalidParameter("mesh has no Stokes triangles".into()));
        }
        for &t in &stokes {
            for v in mesh.triangles[t].vertices {
                vertex_id[v] = 0;
            }
            for e in mesh.triangles[t].edges {
                edge_first[e] = 0;
            }
        }
        for (v, id) in vertex_id.iter_mut().enumerate() {
            if *id == 0 {
                *id = meta.len();
                meta.push(DofMeta { kind: DofKind::Vertex(v), anchor: mesh.vertices[v] });
            }
        }
        for (e, first) in edge_first.iter_mut().enumerate() {
            if *first == 0 {
                *first = meta.len();
                for node in 0..per_edge {
                    let t = (node + 1) as f64 / k as f64;
                    meta.push(DofMeta { kind: DofKind::EdgeNode { edge: e, node }, anchor: mesh.edges[e].point(mesh, t) });
                }
            }
        }
        let mut cells = Vec::with_capacity(stokes.len());
        let mut cell_of_triangle = vec![None; mesh.n_triangles()];
        for &t in &stokes {
            let tri = &mesh.triangles[t];
            let mut dofs = Vec::with_capacity(basis.len());
            dofs.extend(tri.vertices.iter().map(|v| vertex_id[*v]));
            for j in 0..3 {
                let e = tri.edges[j];
                // local nodes run from local vertex j+1 to j+2
                let forward = tri.vertices[(j + 1) % 3] == mesh.edges[e].vertices[0];
                for node in 0..per_edge {
                    let g = if forward { node } else { per_edge - 1 - node };
                    dofs.push(edge_first[e] + g);
                }
            }
            let geo = TriangleGeometry::new(mesh, t);
            for index in 0..n_int {
                dofs.push(meta.len());
                meta.push(DofMeta { kind: DofKind::Interior { tri: t, index }, anchor: geo.point(&basis.interior_points[index]) });
            }
            cell_of_triangle[t] = Some(cells.len());
            cells.push(Cell { tri: t, dofs });
        }
        let mut boundary = vec![None; meta.len()];
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.class != EdgeClass::BoundaryStokes {
                continue;
            }
            let mut ids: Vec<usize> = edge.vertices.iter().map(|v| vertex_id[*v]).collect();
            ids.extend((0..per_edge).map(|n| edge_first[e] + n));
            for id in ids {
                boundary[id] = match (boundary[id], edge.marker) {
                    (Some(Marker::Lid), _) | (_, Marker::Lid) => Some(Marker::Lid),
                    _ => Some(Marker::Wall),
                };
            }
        }
        let interior_inverse = crate::linalg::Lu::new(&basis.interior_collocation())?;
        Ok(StokesSpace { degree, basis, n_scalar: meta.len(), cells, cell_of_triangle, meta, boundary, interior_inverse })
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_scalar
    }

    /// Local scalar basis size.
    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    /// Global vector dof of local vector function `comp * n_local + i`.
    pub fn global(&self, cell: &Cell, local: usize) -> usize {
        let n = self.n_local();
        (local / n) * self.n_scalar + cell.dofs[local % n]
    }

    /// Values, gradients and divergences of the `2 * n_local` local vector
    /// functions (first component block, then second).
    pub fn eval(&self, geo: &TriangleGeometry, lam: &[f64; 3]) -> VectorBasisEval {
        let s = self.basis.eval(geo, lam);
        let n = s.values.len();
        let mut out = VectorBasisEval::with_capacity(2 * n);
        for c in 0..2 {
            for i in 0..n {
                let mut v = [0.0; 2];
                v[c] = s.values[i];
                let mut g = [[0.0; 2]; 2];
                g[c] = s.gradients[i];
                out.push(v, g);
            }
        }
        out
    }

    /// Interpolates a vector field: point values at vertex and edge nodes,
    /// element-wise collocation for the interior coefficients.
    pub fn interpolate(&self, mesh: &Mesh, f: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        let n_int = self.basis.n_interior;
        let n_bdry = self.n_local() - n_int;
        for cell in &self.cells {
            let geo = TriangleGeometry::new(mesh, cell.tri);
            let mut vals = [[0.0; 2]; 12];
            for (i, lam) in self.basis.nodes.iter().enumerate().take(n_bdry) {
                vals[i] = f(geo.point(lam));
            }
            for c in 0..2 {
                let mut rhs = vec![0.0; n_int];
                for (q, lam) in self.basis.interior_points.iter().enumerate() {
                    let phi = self.basis.values(lam);
                    rhs[q] = f(geo.point(lam))[c] - (0..n_bdry).map(|j| phi[j] * vals[j][c]).sum::<f64>();
                }
                let coef = self.interior_inverse.solve(&rhs);
                for j in 0..n_bdry {
                    out[c * self.n_scalar + cell.dofs[j]] = vals[j][c];
                }
                for (q, v) in coef.iter().enumerate() {
                    out[c * self.n_scalar + cell.dofs[n_bdry + q]] = *v;
                }
            }
        }
        out
    }
}

/// Raviart-Thomas space of index `k - 1` on the Darcy triangles. Edge dofs
/// are normal moments against the `P_{k-1}` Lagrange basis on the edge,
/// taken with the stored mesh normal; the global basis is the dual basis,
/// so shared edges need no sign correction.
#[derive(Debug, Clone)]
pub struct RtSpace {
    pub degree: Degree,
    pub n_dofs: usize,
    pub cells: Vec<Cell>,
    pub cell_of_triangle: Vec<Option<usize>>,
    pub meta: Vec<DofMeta>,
    /// First dof of each Darcy edge.
    pub edge_first: Vec<Option<usize>>,
    /// Dofs on the external Darcy boundary.
    pub boundary: Vec<bool>,
}

impl RtSpace {
    pub fn new(mesh: &Mesh, degree: Degree) -> Result<RtSpace> {
        let k = degree.k();
        let n_int = rt::n_interior(degree);
        let darcy: Vec<usize> = mesh.triangles_in(Subdomain::Darcy).collect();
        let mut edge_first = vec![None; mesh.n_edges()];
        for &t in &darcy {
            for e in mesh.triangles[t].edges {
                edge_first[e] = Some(0);
            }
        }
        let mut meta = Vec::new();
        for (e, first) in edge_first.iter_mut().enumerate() {
            if first.is_some() {
                *first = Some(meta.len());
                for (node, t) in edge_nodes(degree).iter().enumerate() {
                    meta.push(DofMeta { kind: DofKind::EdgeMoment { edge: e, node }, anchor: mesh.edges[e].point(mesh, *t) });
                }
            }
        }
        let mut cells = Vec::with_capacity(darcy.len());
        let mut cell_of_triangle = vec![None; mesh.n_triangles()];
        for &t in &darcy {
            let mut dofs = Vec::with_capacity(3 * k + n_int);
            for e in mesh.triangles[t].edges {
                let first = edge_first[e].unwrap();
                dofs.extend(first..first + k);
            }
            let centroid = TriangleGeometry::new(mesh, t).centroid();
            for index in 0..n_int {
                dofs.push(meta.len());
                meta.push(DofMeta { kind: DofKind::InteriorMoment { tri: t, index }, anchor: centroid });
            }
            cell_of_triangle[t] = Some(cells.len());
            cells.push(Cell { tri: t, dofs });
        }
        let mut boundary = vec![false; meta.len()];
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.class == EdgeClass::BoundaryDarcy {
                let first = edge_first[e].unwrap();
                boundary[first..first + k].iter_mut().for_each(|b| *b = true);
            }
        }
        Ok(RtSpace { degree, n_dofs: meta.len(), cells, cell_of_triangle, meta, edge_first, boundary })
    }

    /// Applies the dof functionals to a vector field.
    pub fn interpolate(&self, elements: &[RtElement], f: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        for cell in &self.cells {
            let m = elements[cell.tri].moments(f);
            for (d, v) in cell.dofs.iter().zip(m) {
                out[*d] = v;
            }
        }
        out
    }
}

/// Discontinuous nodal `P_{k-1}` on every triangle.
#[derive(Debug, Clone)]
pub struct PressureSpace {
    pub degree: Degree,
    pub basis: PolyBasis,
    pub n_dofs: usize,
}

impl PressureSpace {
    pub fn new(mesh: &Mesh, degree: Degree) -> PressureSpace {
        let basis = PolyBasis::pressure(degree);
        PressureSpace { degree, n_dofs: basis.len() * mesh.n_triangles(), basis }
    }

    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    pub fn dofs(&self, tri: usize) -> core::ops::Range<usize> {
        let n = self.n_local();
        tri * n..(tri + 1) * n
    }

    pub fn meta(&self, mesh: &Mesh, dof: usize) -> DofMeta {
        let (tri, node) = (dof / self.n_local(), dof % self.n_local());
        let geo = TriangleGeometry::new(mesh, tri);
        DofMeta { kind: DofKind::CellNode { tri, node }, anchor: geo.point(&self.basis.nodes[node]) }
    }

    pub fn interpolate(&self, mesh: &Mesh, f: &dyn Fn(Point, Subdomain) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs];
        for t in 0..mesh.n_triangles() {
            let geo = TriangleGeometry::new(mesh, t);
            let dom = mesh.triangles[t].subdomain;
            for (i, d) in self.dofs(t).enumerate() {
                out[d] = f(geo.point(&self.basis.nodes[i]), dom);
            }
        }
        out
    }
}

/// Scalar `P_{k-1}` on each interface edge, discontinuous between edges.
#[derive(Debug, Clone)]
pub struct TraceSpace {
    pub degree: Degree,
    pub edges: Vec<usize>,
    pub n_dofs: usize,
}

impl TraceSpace {
    pub fn new(mesh: &Mesh, degree: Degree) -> TraceSpace {
        let edges = mesh.interface_edges();
        TraceSpace { degree, n_dofs: edges.len() * degree.k(), edges }
    }

    pub fn dofs(&self, slot: usize) -> core::ops::Range<usize> {
        let k = self.degree.k();
        slot * k..(slot + 1) * k
    }
}

/// All four spaces plus the local Raviart-Thomas elements of every
/// triangle (the Stokes ones serve the reconstruction).
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub degree: Degree,
    pub stokes: StokesSpace,
    pub darcy: RtSpace,
    pub pressure: PressureSpace,
    pub trace: TraceSpace,
    pub rt_elements: Vec<RtElement>,
}

impl Discretization {
    pub fn new(mesh: Mesh, degree: Degree) -> Result<Discretization> {
        let stokes = StokesSpace::new(&mesh, degree)?;
        let darcy = RtSpace::new(&mesh, degree)?;
        let pressure = PressureSpace::new(&mesh, degree);
        let trace = TraceSpace::new(&mesh, degree);
        let rt_elements = (0..mesh.n_triangles()).map(|t| RtElement::new(&mesh, t, degree)).collect::<Result<Vec<_>>>()?;
        Ok(Discretization { mesh, degree, stokes, darcy, pressure, trace, rt_elements })
    }

    pub fn family_dims(&self) -> [(ElementFamily, usize); 4] {
        [
            (ElementFamily::LagrangeBubbleVec(self.degree), self.stokes.n_dofs()),
            (ElementFamily::RaviartThomas(self.degree), self.darcy.n_dofs),
            (ElementFamily::Discontinuous(self.degree), self.pressure.n_dofs),
            (ElementFamily::Trace(self.degree), self.trace.n_dofs),
        ]
    }

    /// Size of the full saddle-point system including the mean multiplier.
    pub fn n_total(&self) -> usize {
        self.stokes.n_dofs() + self.darcy.n_dofs + self.pressure.n_dofs + self.trace.n_dofs + 1
    }
}

#[cfg(test)]
mod tests;
