//! Interface-matched triangulations of a Stokes region and a Darcy region.
//!
//! Orientation conventions:
//! * triangles are stored counter-clockwise; local edge `j` is opposite
//!   local vertex `j` and runs from vertex `j + 1` to vertex `j + 2`;
//! * every edge keeps its vertices in increasing global order, which fixes
//!   the parametrisation used by edge degrees of freedom;
//! * the stored edge normal points from `triangles[0]` to `triangles[1]`.
//!   Boundary normals point outward, interface normals point from the Stokes
//!   side into the Darcy side (the Stokes outward normal), interior normals
//!   point from the lower to the higher triangle index;
//! * the stored tangent is the normal rotated by +90 degrees.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subdomain {
    Stokes,
    Darcy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeClass {
    InteriorStokes,
    InteriorDarcy,
    Interface,
    BoundaryStokes,
    BoundaryDarcy,
}

impl EdgeClass {
    pub fn is_boundary(self) -> bool {
        matches!(self, EdgeClass::BoundaryStokes | EdgeClass::BoundaryDarcy)
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeClass::InteriorStokes => "interior_s",
            EdgeClass::InteriorDarcy => "interior_d",
            EdgeClass::Interface => "interface",
            EdgeClass::BoundaryStokes => "boundary_s",
            EdgeClass::BoundaryDarcy => "boundary_d",
        }
    }
}

/// Boundary marker attached to external edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Marker {
    #[default]
    Wall,
    /// Moving lid of the cavity benchmark.
    Lid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub subdomain: Subdomain,
    /// `edges[j]` is the edge opposite `vertices[j]`.
    pub edges: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints in increasing order.
    pub vertices: [usize; 2],
    pub class: EdgeClass,
    /// Adjacent triangles; the normal points from the first to the second.
    pub triangles: [Option<usize>; 2],
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
    pub length: f64,
    pub marker: Marker,
}

impl Edge {
    pub fn midpoint(&self, mesh: &Mesh) -> Point {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Point at parameter `t` from the lower to the higher vertex.
    pub fn point(&self, mesh: &Mesh, t: f64) -> Point {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// `+1` if `tri` lies on the side the stored normal points away from.
    pub fn orientation_in(&self, tri: usize) -> f64 {
        if self.triangles[0] == Some(tri) {
            1.0
        } else {
            -1.0
        }
    }
}

/// An immutable triangulation with classified edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Two rectangles sharing a horizontal edge plus the coarsest cell counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectPair {
    pub stokes: Rect,
    pub darcy: Rect,
    pub cells_x: usize,
    pub cells_y_stokes: usize,
    pub cells_y_darcy: usize,
    /// Mark the Stokes edge opposite the interface as a lid.
    pub lid: bool,
}

impl RectPair {
    /// Unit square split at `y = 1/2`, Stokes on top.
    pub fn unit_square(cells_x: usize, cells_y: usize) -> Self {
        RectPair {
            stokes: Rect::new(0.0, 1.0, 0.5, 1.0),
            darcy: Rect::new(0.0, 1.0, 0.0, 0.5),
            cells_x,
            cells_y_stokes: cells_y,
            cells_y_darcy: cells_y,
            lid: false,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-12 * (1.0 + libm::fabs(a) + libm::fabs(b))
}

/// Uniform triangulation of a rectangle pair; every cell is split along the
/// diagonal from its lower-left to its upper-right corner and each level
/// halves the cell size.
pub fn generate_structured(spec: &RectPair, level: u32) -> Result<Mesh> {
    let (s, d) = (spec.stokes, spec.darcy);
    if !(close(s.x0, d.x0) && close(s.x1, d.x1)) || !(s.x1 > s.x0 && s.y1 > s.y0 && d.y1 > d.y0) {
        return Err(Error::RectanglesNotAdjacent);
    }
    let stokes_on_top = if close(s.y0, d.y1) {
        true
    } else if close(s.y1, d.y0) {
        false
    } else {
        return Err(Error::RectanglesNotAdjacent);
    };
    if spec.cells_x == 0 || spec.cells_y_stokes == 0 || spec.cells_y_darcy == 0 {
        return Err(Error::InvalidParameter("cell counts must be positive".into()));
    }
    let f = 1usize << level;
    let nx = spec.cells_x * f;
    let (ns, nd) = (spec.cells_y_stokes * f, spec.cells_y_darcy * f);

    // y-lines bottom to top, remembering which subdomain each row belongs to
    let mut ys = Vec::new();
    let mut row_domain = Vec::new();
    let (lower, n_lower, upper, n_upper, lower_dom, upper_dom) = if stokes_on_top {
        (d, nd, s, ns, Subdomain::Darcy, Subdomain::Stokes)
    } else {
        (s, ns, d, nd, Subdomain::Stokes, Subdomain::Darcy)
    };
    for j in 0..=n_lower {
        ys.push(lower.y0 + (lower.y1 - lower.y0) * j as f64 / n_lower as f64);
    }
    row_domain.extend(core::iter::repeat_n(lower_dom, n_lower));
    for j in 1..=n_upper {
        ys.push(upper.y0 + (upper.y1 - upper.y0) * j as f64 / n_upper as f64);
    }
    row_domain.extend(core::iter::repeat_n(upper_dom, n_upper));

    let columns: Vec<Vec<f64>> = (0..=nx).map(|_| ys.clone()).collect();
    let xs: Vec<f64> = (0..=nx).map(|i| s.x0 + (s.x1 - s.x0) * i as f64 / nx as f64).collect();
    let lid_on_top = spec.lid && stokes_on_top;
    let lid_on_bottom = spec.lid && !stokes_on_top;
    grid_mesh(&xs, &columns, &row_domain, lid_on_top, lid_on_bottom)
}

/// Interface-fitted mesh of the unit-square cavity: Stokes above, Darcy
/// below, separated by the polyline through `interface` (x must increase
/// from 0 to 1). Vertical grid lines pass through every polyline kink when
/// `cells_x` is a multiple of the number of polyline segments. The top edge
/// is marked as lid.
pub fn generate_cavity(interface: &[Point], cells_x: usize, cells_y_stokes: usize, cells_y_darcy: usize) -> Result<Mesh> {
    if interface.len() < 2 || cells_x == 0 || cells_y_stokes == 0 || cells_y_darcy == 0 {
        return Err(Error::InvalidParameter("cavity needs a polyline and positive cell counts".into()));
    }
    let x0 = interface[0][0];
    let x1 = interface[interface.len() - 1][0];
    let height = |x: f64| -> f64 {
        for w in interface.windows(2) {
            if x <= w[1][0] + 1e-14 {
                let t = (x - w[0][0]) / (w[1][0] - w[0][0]);
                return w[0][1] + t * (w[1][1] - w[0][1]);
            }
        }
        interface[interface.len() - 1][1]
    };
    let mut xs: Vec<f64> = (0..=cells_x).map(|i| x0 + (x1 - x0) * i as f64 / cells_x as f64).collect();
    // snap grid lines onto nearby kinks
    for p in &interface[1..interface.len() - 1] {
        let i = libm::round((p[0] - x0) / (x1 - x0) * cells_x as f64) as usize;
        xs[i] = p[0];
    }
    let columns: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| {
            let yi = height(x);
            let mut col = Vec::with_capacity(cells_y_darcy + cells_y_stokes + 1);
            for j in 0..=cells_y_darcy {
                col.push(yi * j as f64 / cells_y_darcy as f64);
            }
            for j in 1..=cells_y_stokes {
                col.push(yi + (1.0 - yi) * j as f64 / cells_y_stokes as f64);
            }
            col
        })
        .collect();
    let mut row_domain = vec![Subdomain::Darcy; cells_y_darcy];
    row_domain.extend(core::iter::repeat_n(Subdomain::Stokes, cells_y_stokes));
    grid_mesh(&xs, &columns, &row_domain, true, false)
}

fn grid_mesh(xs: &[f64], columns: &[Vec<f64>], row_domain: &[Subdomain], lid_top: bool, lid_bottom: bool) -> Result<Mesh> {
    let nx = xs.len() - 1;
    let ny = row_domain.len();
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([xs[i], columns[i][j]]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for (j, dom) in row_domain.iter().enumerate() {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push(([v00, v10, v11], *dom));
            triangles.push(([v00, v11, v01], *dom));
        }
    }
    let mut markers = Vec::new();
    if lid_top {
        for i in 0..nx {
            markers.push(([id(i, ny), id(i + 1, ny)], Marker::Lid));
        }
    }
    if lid_bottom {
        for i in 0..nx {
            markers.push(([id(i, 0), id(i + 1, 0)], Marker::Lid));
        }
    }
    Mesh::from_parts(vertices, triangles, &markers)
}

impl Mesh {
    /// Builds a mesh from raw vertices and tagged triangles, deriving edges,
    /// adjacency, classification and normals. Clockwise triangles are
    /// reoriented; `markers` tags boundary edges (untagged ones are walls).
    pub fn from_parts(vertices: Vec<Point>, tris: Vec<([usize; 3], Subdomain)>, markers: &[([usize; 2], Marker)]) -> Result<Mesh> {
        let nv = vertices.len();
        let mut triangles = Vec::with_capacity(tris.len());
        for (t, (mut v, dom)) in tris.into_iter().enumerate() {
            for &i in &v {
                if i >= nv {
                    return Err(Error::VertexOutOfRange { index: i, len: nv });
                }
            }
            let a = signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            if a < 0.0 {
                v.swap(1, 2);
            }
            if libm::fabs(a) <= 1e-14 * bbox_scale(&vertices, &v) {
                return Err(Error::DegenerateTriangle(t));
            }
            triangles.push(Triangle { vertices: v, subdomain: dom, edges: [usize::MAX; 3] });
        }

        let mut lookup: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut adjacency: Vec<Vec<usize>> = Vec::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for j in 0..3 {
                let (a, b) = (tri.vertices[(j + 1) % 3], tri.vertices[(j + 2) % 3]);
                let key = if a < b { [a, b] } else { [b, a] };
                let e = *lookup.entry(key).or_insert_with(|| {
                    edge_vertices.push(key);
                    adjacency.push(Vec::new());
                    edge_vertices.len() - 1
                });
                if adjacency[e].len() == 2 {
                    return Err(Error::NonManifoldEdge(key[0], key[1]));
                }
                adjacency[e].push(t);
                tri.edges[j] = e;
            }
        }

        let mut marker_of = BTreeMap::new();
        for (v, m) in markers {
            let key = if v[0] < v[1] { *v } else { [v[1], v[0]] };
            marker_of.insert(key, *m);
        }

        let mut edges = Vec::with_capacity(edge_vertices.len());
        for (e, key) in edge_vertices.iter().enumerate() {
            let adj = &adjacency[e];
            let (class, first, second) = match adj.as_slice() {
                [t] => {
                    let class = match triangles[*t].subdomain {
                        Subdomain::Stokes => EdgeClass::BoundaryStokes,
                        Subdomain::Darcy => EdgeClass::BoundaryDarcy,
                    };
                    (class, *t, None)
                }
                [t0, t1] => {
                    let (d0, d1) = (triangles[*t0].subdomain, triangles[*t1].subdomain);
                    match (d0, d1) {
                        (Subdomain::Stokes, Subdomain::Stokes) => (EdgeClass::InteriorStokes, *t0.min(t1), Some(*t0.max(t1))),
                        (Subdomain::Darcy, Subdomain::Darcy) => (EdgeClass::InteriorDarcy, *t0.min(t1), Some(*t0.max(t1))),
                        (Subdomain::Stokes, Subdomain::Darcy) => (EdgeClass::Interface, *t0, Some(*t1)),
                        (Subdomain::Darcy, Subdomain::Stokes) => (EdgeClass::Interface, *t1, Some(*t0)),
                    }
                }
                _ => unreachable!("every edge has one or two triangles"),
            };
            let (pa, pb) = (vertices[key[0]], vertices[key[1]]);
            let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
            let length = libm::hypot(dx, dy);
            let mut normal = [dy / length, -dx / length];
            // orient away from the first triangle: its opposite vertex must lie behind
            let tri = &triangles[first];
            let opposite = tri.vertices.iter().copied().find(|v| *v != key[0] && *v != key[1]).unwrap();
            let po = vertices[opposite];
            if (po[0] - pa[0]) * normal[0] + (po[1] - pa[1]) * normal[1] > 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            let tangent = [-normal[1], normal[0]];
            let marker = if class.is_boundary() { marker_of.get(key).copied().unwrap_or_default() } else { Marker::Wall };
            edges.push(Edge { vertices: *key, class, triangles: [Some(first), second], normal, tangent, length, marker });
        }
        let mesh = Mesh { vertices, triangles, edges };
        mesh.check_conforming_interface()?;
        Ok(mesh)
    }

    /// Rejects Stokes and Darcy boundary edges that overlap without being
    /// the same edge (hanging nodes on the interface).
    fn check_conforming_interface(&self) -> Result<()> {
        let stokes: Vec<usize> = self.edges_of_class(EdgeClass::BoundaryStokes).collect();
        let darcy: Vec<usize> = self.edges_of_class(EdgeClass::BoundaryDarcy).collect();
        for &s in &stokes {
            let es = &self.edges[s];
            let (a, b) = (self.vertices[es.vertices[0]], self.vertices[es.vertices[1]]);
            let tol = 1e-10 * es.length;
            for &d in &darcy {
                let ed = &self.edges[d];
                let (c, e) = (self.vertices[ed.vertices[0]], self.vertices[ed.vertices[1]]);
                // distance of c, e from the line through a, b
                let dist = |p: Point| libm::fabs((p[0] - a[0]) * es.normal[0] + (p[1] - a[1]) * es.normal[1]);
                if dist(c) > tol || dist(e) > tol {
                    continue;
                }
                let t = |p: Point| ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (es.length * es.length);
                let (t0, t1) = (t(c).min(t(e)), t(c).max(t(e)));
                if t1.min(1.0) - t0.max(0.0) > 1e-10 {
                    return Err(Error::NonMatchingInterface(es.vertices[0], es.vertices[1]));
                }
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Signed area of a triangle (positive after construction).
    pub fn area(&self, tri: usize) -> f64 {
        let v = self.triangles[tri].vertices;
        signed_area(self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]])
    }

    /// Diameter of a triangle (its longest edge).
    pub fn diameter(&self, tri: usize) -> f64 {
        self.triangles[tri].edges.iter().map(|e| self.edges[*e].length).fold(0.0, f64::max)
    }

    /// Mesh size `h = max_T h_T`.
    pub fn h(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// `(normal, tangent, length)` of an edge.
    pub fn edge_geometry(&self, edge: usize) -> ([f64; 2], [f64; 2], f64) {
        let e = &self.edges[edge];
        (e.normal, e.tangent, e.length)
    }

    pub fn triangles_in(&self, dom: Subdomain) -> impl Iterator<Item = usize> + '_ {
        self.triangles.iter().enumerate().filter(move |(_, t)| t.subdomain == dom).map(|(i, _)| i)
    }

    pub fn edges_of_class(&self, class: EdgeClass) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(move |(_, e)| e.class == class).map(|(i, _)| i)
    }

    pub fn interface_edges(&self) -> Vec<usize> {
        self.edges_of_class(EdgeClass::Interface).collect()
    }

    /// Number of edges touching a subdomain (interface edges count for both).
    pub fn subdomain_edge_count(&self, dom: Subdomain) -> usize {
        self.edges
            .iter()
            .filter(|e| e.triangles.iter().flatten().any(|t| self.triangles[*t].subdomain == dom))
            .count()
    }

    /// Number of vertices touching a subdomain.
    pub fn subdomain_vertex_count(&self, dom: Subdomain) -> usize {
        let mut seen = vec![false; self.n_vertices()];
        for t in self.triangles_in(dom) {
            for v in self.triangles[t].vertices {
                seen[v] = true;
            }
        }
        seen.iter().filter(|s| **s).count()
    }

    /// Outward unit normal of local edge `j` of `tri`.
    pub fn outward_normal(&self, tri: usize, j: usize) -> [f64; 2] {
        let e = &self.edges[self.triangles[tri].edges[j]];
        let s = e.orientation_in(tri);
        [s * e.normal[0], s * e.normal[1]]
    }

    /// Locates the triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices.map(|v| self.vertices[v]);
            let det = signed_area(a, b, c);
            let l1 = signed_area(a, p, c) / det;
            let l2 = signed_area(a, b, p) / det;
            let lam = [1.0 - l1 - l2, l1, l2];
            let worst = lam.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -1e-12 {
                return Some((t, lam));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, lam, worst));
            }
        }
        best.filter(|b| b.2 > -1e-9).map(|b| (b.0, b.1))
    }
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn bbox_scale(vertices: &[Point], v: &[usize; 3]) -> f64 {
    let mut s = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let (p, q) = (vertices[v[i]], vertices[v[j]]);
            s = s.max((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]));
        }
    }
    s
}
