//! Executable checks of the structural properties behind the robust
//! method: the reconstruction maps discretely divergence-free velocities to
//! exactly divergence-free, normally continuous fields; the pressure
//! consistency functional vanishes after reconstruction; the velocity-pressure
//! pair is inf-sup stable.

use std::fmt;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdfem_core::bench::ExactSolution;
use sdfem_core::errors::compute_errors;
use sdfem_core::fespace::PolyBasis;
use sdfem_core::fespace::DofKind;
use sdfem_core::field::DiscreteFields;
use sdfem_core::forms::ModelParams;
use sdfem_core::geometry::TriangleGeometry;
use sdfem_core::linalg::CsrMatrix;
use sdfem_core::mesh::{EdgeClass, Mesh, Subdomain};
use sdfem_core::quadrature::{edge_rule, triangle_rule, STANDARD_DEGREE};
use sdfem_core::reconstruction::{ReconstructedField, ReconstructionOperator};
use sdfem_core::system::{matrix_triplets, BlockMap, Solution};
use sdfem_core::{Degree, Discretization, Point};

use crate::solve::{Factorization, SolveError};

/// Which constraints generated velocities satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// Divergence rows, multiplier rows and homogeneous boundary values.
    DivergenceFree,
    /// Multiplier rows and homogeneous boundary values only.
    InterfaceConforming,
}

/// Random velocities from a constrained subspace, obtained by orthogonal
/// projection of random coefficient vectors (one sparse KKT factorization).
pub struct KernelSampler<'a> {
    disc: &'a Discretization,
    free: Vec<usize>,
    n_rows: usize,
    kkt: Factorization,
    n_velocity: usize,
}

impl<'a> KernelSampler<'a> {
    pub fn new(disc: &'a Discretization, membership: Membership) -> Result<KernelSampler<'a>, SolveError> {
        let map = BlockMap::new(disc);
        let nv = map.pressure.start;
        let mut fixed = vec![false; nv];
        for (i, m) in disc.stokes.boundary.iter().enumerate() {
            if m.is_some() {
                fixed[i] = true;
                fixed[disc.stokes.n_scalar + i] = true;
            }
        }
        for (i, b) in disc.darcy.boundary.iter().enumerate() {
            fixed[map.darcy.start + i] = *b;
        }
        let free: Vec<usize> = (0..nv).filter(|i| !fixed[*i]).collect();
        let mut col = vec![usize::MAX; nv];
        for (c, i) in free.iter().enumerate() {
            col[*i] = c;
        }
        // drop the last pressure row: with homogeneous boundary values the
        // sum of all divergence and multiplier rows vanishes
        let keep_row = |r: usize| match membership {
            Membership::DivergenceFree => (map.pressure.start..map.pressure.end - 1).contains(&r) || map.trace.contains(&r),
            Membership::InterfaceConforming => map.trace.contains(&r),
        };
        let params = ModelParams::new(1.0, 1.0, 1.0).expect("unit parameters");
        let triplets = matrix_triplets(disc, &params).map_err(|e| SolveError::Backend(e.to_string()))?;
        let mut row_id = std::collections::BTreeMap::new();
        let nf = free.len();
        let mut kkt = Vec::new();
        for (r, c, v) in triplets {
            if c < nv && keep_row(r) && col[c] != usize::MAX {
                let next = row_id.len();
                let rr = nf + *row_id.entry(r).or_insert(next);
                kkt.push((rr, col[c], v));
                kkt.push((col[c], rr, v));
            }
        }
        for i in 0..nf {
            kkt.push((i, i, 1.0));
        }
        let n = nf + row_id.len();
        let m = CsrMatrix::from_triplets(n, n, &kkt).map_err(|e| SolveError::Backend(e.to_string()))?;
        let kkt = Factorization::new(&m, None)?;
        Ok(KernelSampler { disc, free, n_rows: row_id.len(), kkt, n_velocity: nv })
    }

    /// Projection of a standard normal random vector.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Solution, SolveError> {
        let nf = self.free.len();
        let mut b = vec![0.0; nf + self.n_rows];
        for x in b.iter_mut().take(nf) {
            let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
            *x = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
        let (x, _) = self.kkt.solve(&b)?;
        let mut v = vec![0.0; self.n_velocity];
        for (c, i) in self.free.iter().enumerate() {
            v[*i] = x[c];
        }
        let map = BlockMap::new(self.disc);
        let mut full = vec![0.0; map.n];
        full[..self.n_velocity].copy_from_slice(&v);
        Ok(Solution::from_vector(&map, &full))
    }
}

/// Maxima over quadrature points of a reconstructed field.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct FieldChecks {
    pub max_divergence: f64,
    pub max_interface_jump: f64,
    pub max_interior_jump: f64,
    pub max_boundary_normal: f64,
    pub scale: f64,
}

impl FieldChecks {
    fn merge(&mut self, o: &FieldChecks) {
        self.max_divergence = self.max_divergence.max(o.max_divergence);
        self.max_interface_jump = self.max_interface_jump.max(o.max_interface_jump);
        self.max_interior_jump = self.max_interior_jump.max(o.max_interior_jump);
        self.max_boundary_normal = self.max_boundary_normal.max(o.max_boundary_normal);
        self.scale = self.scale.max(o.scale);
    }

    /// The three maxima divided by the field scale (absolute when the field
    /// vanishes).
    pub fn relative(&self) -> [f64; 4] {
        let s = if self.scale > 0.0 { self.scale } else { 1.0 };
        [self.max_divergence / s, self.max_interface_jump / s, self.max_interior_jump / s, self.max_boundary_normal / s]
    }
}

fn edge_side_normal(disc: &Discretization, field: &ReconstructedField, tri: usize, p: Point, n: [f64; 2]) -> f64 {
    let geo = &disc.rt_elements[tri].geo;
    let v = field.eval(disc, tri, &geo.barycentric(p)).0;
    v[0] * n[0] + v[1] * n[1]
}

/// Divergence, normal jumps and boundary normal traces of `field`.
pub fn field_checks(disc: &Discretization, field: &ReconstructedField) -> FieldChecks {
    let mut c = FieldChecks::default();
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    for t in 0..disc.mesh.n_triangles() {
        for (lam, _) in rule.iter() {
            let (v, div) = field.eval(disc, t, lam);
            c.max_divergence = c.max_divergence.max(div.abs());
            c.scale = c.scale.max(v[0].hypot(v[1]));
        }
    }
    let erule = edge_rule(STANDARD_DEGREE).unwrap();
    for e in &disc.mesh.edges {
        for (s, _) in erule.iter() {
            let p = e.point(&disc.mesh, s);
            let a = edge_side_normal(disc, field, e.triangles[0].unwrap(), p, e.normal);
            match e.triangles[1] {
                Some(t1) => {
                    let jump = (a - edge_side_normal(disc, field, t1, p, e.normal)).abs();
                    if e.class == EdgeClass::Interface {
                        c.max_interface_jump = c.max_interface_jump.max(jump);
                    } else {
                        c.max_interior_jump = c.max_interior_jump.max(jump);
                    }
                }
                None => c.max_boundary_normal = c.max_boundary_normal.max(a.abs()),
            }
        }
    }
    c
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ReconstructionReport {
    pub members: usize,
    /// Reconstructions of discretely divergence-free members.
    pub kernel: FieldChecks,
    /// Reconstructions of members satisfying only the interface and
    /// boundary constraints.
    pub general: FieldChecks,
}

impl ReconstructionReport {
    /// Kernel divergence and interface jump, relative to the field scale.
    pub fn kernel_relative(&self) -> [f64; 4] {
        self.kernel.relative()
    }
}

impl fmt::Display for ReconstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.kernel.relative();
        let g = self.general.relative();
        writeln!(f, "reconstruction of {} random velocities per class (maxima relative to field scale)", self.members)?;
        writeln!(f, "  {:<26} {:>12} {:>12} {:>12} {:>12}", "", "divergence", "interface", "interior", "boundary")?;
        writeln!(f, "  {:<26} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}", "divergence-free members", k[0], k[1], k[2], k[3])?;
        write!(f, "  {:<26} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}", "interface-conforming", g[0], g[1], g[2], g[3])
    }
}

/// Applies the reconstruction to `n_random` members of each constrained
/// subspace and reports the worst divergence, jumps and boundary traces.
pub fn check_reconstruction(disc: &Discretization, recon: &ReconstructionOperator, n_random: usize, seed: u64) -> Result<ReconstructionReport, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ReconstructionReport { members: n_random, kernel: FieldChecks::default(), general: FieldChecks::default() };
    for (membership, slot) in [(Membership::DivergenceFree, 0), (Membership::InterfaceConforming, 1)] {
        let sampler = KernelSampler::new(disc, membership)?;
        for _ in 0..n_random {
            let v = sampler.sample(&mut rng)?;
            let field = recon.reconstruct_field(disc, &v.stokes, &v.darcy);
            let c = field_checks(disc, &field);
            if slot == 0 {
                out.kernel.merge(&c);
            } else {
                out.general.merge(&c);
            }
        }
    }
    Ok(out)
}

/// A pressure field defined on both subdomains.
pub type PressureFn<'a> = &'a (dyn Fn(Point, Subdomain) -> f64 + Sync);

struct Zero;

impl ExactSolution for Zero {
    fn u_stokes(&self, _: Point) -> [f64; 2] {
        [0.0; 2]
    }
    fn grad_u_stokes(&self, _: Point) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn u_darcy(&self, _: Point) -> [f64; 2] {
        [0.0; 2]
    }
    fn div_u_darcy(&self, _: Point) -> f64 {
        0.0
    }
    fn pressure(&self, _: Point, _: Subdomain) -> f64 {
        0.0
    }
}

/// `(|v^s|_1^2 + ||v^d||^2 + ||div v^d||^2)^{1/2}`.
pub fn velocity_norm(disc: &Discretization, v: &Solution) -> f64 {
    compute_errors(disc, v, &Zero, STANDARD_DEGREE).map(|r| r.velocity).unwrap_or(f64::NAN)
}

/// `b(w, p) - <w^s . n^s + w^d . n^d, p^d>_Gamma` for a velocity given by
/// its value and divergence on each triangle.
fn consistency_functional(disc: &Discretization, p: PressureFn, eval: &dyn Fn(usize, &[f64; 3]) -> ([f64; 2], f64)) -> f64 {
    let rule = triangle_rule(STANDARD_DEGREE).unwrap();
    let mut b = 0.0;
    for t in 0..disc.mesh.n_triangles() {
        let geo = TriangleGeometry::new(&disc.mesh, t);
        let dom = disc.mesh.triangles[t].subdomain;
        for (lam, w) in rule.iter() {
            b -= 2.0 * geo.area * w * eval(t, lam).1 * p(geo.point(lam), dom);
        }
    }
    let erule = edge_rule(STANDARD_DEGREE).unwrap();
    let mut gamma = 0.0;
    for e in disc.mesh.interface_edges() {
        let edge = &disc.mesh.edges[e];
        let (ts, td) = (edge.triangles[0].unwrap(), edge.triangles[1].unwrap());
        let (gs, gd) = (TriangleGeometry::new(&disc.mesh, ts), TriangleGeometry::new(&disc.mesh, td));
        for (s, w) in erule.iter() {
            let x = edge.point(&disc.mesh, s);
            let vs = eval(ts, &gs.barycentric(x)).0;
            let vd = eval(td, &gd.barycentric(x)).0;
            let n = edge.normal;
            let jump = (vs[0] - vd[0]) * n[0] + (vs[1] - vd[1]) * n[1];
            gamma += w * edge.length * jump * p(x, Subdomain::Darcy);
        }
    }
    b - gamma
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConsistencyReport {
    pub members: usize,
    /// Largest `|c_p(psi)| / ||psi||_X` over the samples, `c_p` the functional below.
    pub plain: f64,
    /// The same for `c_p(Pi psi)`.
    pub reconstructed: f64,
    pub h: f64,
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pressure consistency functional over {} divergence-free velocities (h = {:.4}): plain {:.3e}, reconstructed {:.3e}",
            self.members, self.h, self.plain, self.reconstructed
        )
    }
}

/// Evaluates the consistency functional of `p` before and after
/// reconstruction on random normalized discretely divergence-free velocities.
pub fn check_consistency(
    disc: &Discretization,
    recon: &ReconstructionOperator,
    p: PressureFn,
    n_random: usize,
    seed: u64,
) -> Result<ConsistencyReport, SolveError> {
    let sampler = KernelSampler::new(disc, Membership::DivergenceFree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = ConsistencyReport { members: n_random, plain: 0.0, reconstructed: 0.0, h: disc.mesh.h() };
    for _ in 0..n_random {
        let v = sampler.sample(&mut rng)?;
        let norm = velocity_norm(disc, &v);
        let fields = DiscreteFields::new(disc, &v);
        let plain = consistency_functional(disc, p, &|t, lam| {
            let pv = fields.at(t, lam);
            (pv.velocity, pv.divergence)
        });
        let pi = recon.reconstruct_field(disc, &v.stokes, &v.darcy);
        let reconstructed = consistency_functional(disc, p, &|t, lam| pi.eval(disc, t, lam));
        rep.plain = rep.plain.max(plain.abs() / norm);
        rep.reconstructed = rep.reconstructed.max(reconstructed.abs() / norm);
    }
    Ok(rep)
}

/// Velocity space used by the inf-sup probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbePair {
    /// The bubble-enriched Lagrange velocity of the method with
    /// discontinuous `P_{k-1}` pressure.
    Method(Degree),
    /// Continuous `P1` velocity with discontinuous `P1` pressure, which is
    /// not stable.
    LinearLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InfSupEstimate {
    pub h: f64,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Square root of the smallest eigenvalue of the pressure Schur
    /// complement relative to the pressure mass, constants excluded.
    pub beta: f64,
}

/// Inf-sup constant of a velocity-pressure pair on the Stokes triangles
/// with the velocity vanishing on the whole Stokes boundary (including the
/// interface), by a dense generalized eigenvalue problem.
pub fn infsup_probe(mesh: &Mesh, pair: ProbePair) -> Result<InfSupEstimate, String> {
    let stokes: Vec<usize> = mesh.triangles_in(Subdomain::Stokes).collect();
    if stokes.is_empty() {
        return Err("no Stokes triangles".into());
    }
    // scalar velocity dofs per Stokes triangle and their boundary flags
    let mut on_boundary_vertex = vec![false; mesh.n_vertices()];
    for e in &mesh.edges {
        if matches!(e.class, EdgeClass::BoundaryStokes | EdgeClass::Interface) {
            on_boundary_vertex[e.vertices[0]] = true;
            on_boundary_vertex[e.vertices[1]] = true;
        }
    }
    let boundary_edge = |e: usize| matches!(mesh.edges[e].class, EdgeClass::BoundaryStokes | EdgeClass::Interface);
    let (vbasis, pdeg, cells, fixed): (PolyBasis, Degree, Vec<Vec<usize>>, Vec<bool>) = match pair {
        ProbePair::Method(degree) => {
            let disc = Discretization::new(mesh.clone(), degree).map_err(|e| e.to_string())?;
            let fixed = disc
                .stokes
                .meta
                .iter()
                .map(|m| match m.kind {
                    DofKind::Vertex(v) => on_boundary_vertex[v],
                    DofKind::EdgeNode { edge, .. } => boundary_edge(edge),
                    _ => false,
                })
                .collect();
            let cells = stokes.iter().map(|t| disc.stokes.cells[disc.stokes.cell_of_triangle[*t].unwrap()].dofs.clone()).collect();
            (disc.stokes.basis.clone(), degree, cells, fixed)
        }
        ProbePair::LinearLinear => {
            let cells = stokes.iter().map(|t| mesh.triangles[*t].vertices.to_vec()).collect();
            (PolyBasis::linear(), Degree::Two, cells, on_boundary_vertex.clone())
        }
    };
    let pbasis = PolyBasis::pressure(pdeg);
    let np_local = pbasis.len();
    let mut vid = vec![usize::MAX; fixed.len()];
    let mut nfree = 0;
    for (i, f) in fixed.iter().enumerate() {
        if !f && cells.iter().any(|c| c.contains(&i)) {
            vid[i] = nfree;
            nfree += 1;
        }
    }
    let nu = 2 * nfree;
    let np = np_local * stokes.len();
    let mut a = Mat::<f64>::zeros(nu, nu);
    let mut b = Mat::<f64>::zeros(np, nu);
    let mut mass = Mat::<f64>::zeros(np, np);
    let rule = triangle_rule(STANDARD_DEGREE).map_err(|e| e.to_string())?;
    for (c, &t) in stokes.iter().enumerate() {
        let geo = TriangleGeometry::new(mesh, t);
        for (lam, w) in rule.iter() {
            let jw = 2.0 * geo.area * w;
            let s = vbasis.eval(&geo, lam);
            let q = pbasis.values(lam);
            for (i, gi) in s.gradients.iter().enumerate() {
                let gi_id = vid[cells[c][i]];
                if gi_id == usize::MAX {
                    continue;
                }
                for (j, gj) in s.gradients.iter().enumerate() {
                    let gj_id = vid[cells[c][j]];
                    if gj_id != usize::MAX {
                        let k = jw * (gi[0] * gj[0] + gi[1] * gj[1]);
                        a[(gi_id, gj_id)] += k;
                        a[(nfree + gi_id, nfree + gj_id)] += k;
                    }
                }
                for (l, ql) in q.iter().enumerate() {
                    b[(c * np_local + l, gi_id)] -= jw * ql * gi[0];
                    b[(c * np_local + l, nfree + gi_id)] -= jw * ql * gi[1];
                }
            }
            for (l, ql) in q.iter().enumerate() {
                for (m, qm) in q.iter().enumerate() {
                    mass[(c * np_local + l, c * np_local + m)] += jw * ql * qm;
                }
            }
        }
    }
    // M^{-1/2} blockwise, then S = M^{-1/2} B A^{-1} B^T M^{-1/2}
    let mut mh = Mat::<f64>::zeros(np, np);
    for c in 0..stokes.len() {
        let r = c * np_local..(c + 1) * np_local;
        let blk = mass.as_ref().submatrix(r.start, r.start, np_local, np_local).to_owned();
        let evd = blk.self_adjoint_eigen(Side::Lower).map_err(|e| format!("{e:?}"))?;
        let (u, s) = (evd.U(), evd.S());
        for i in 0..np_local {
            for j in 0..np_local {
                let mut v = 0.0;
                for k in 0..np_local {
                    v += u[(i, k)] * u[(j, k)] / s[k].sqrt();
                }
                mh[(r.start + i, r.start + j)] = v;
            }
        }
    }
    let bs = &mh * &b;
    let lu = a.partial_piv_lu();
    let ainv_bt = faer::linalg::solvers::Solve::solve(&lu, bs.transpose().to_owned());
    let schur = &bs * &ainv_bt;
    let sym = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (schur[(i, j)] + schur[(j, i)]));
    let mut ev = sym.self_adjoint_eigenvalues(Side::Lower).map_err(|e| format!("{e:?}"))?;
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // the constant pressure is always in the kernel
    let beta = ev.get(1).copied().unwrap_or(0.0).max(0.0).sqrt();
    Ok(InfSupEstimate { h: mesh.h(), n_velocity: nu, n_pressure: np, beta })
}
