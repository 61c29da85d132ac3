//! Single runs and parameter sweeps over the benchmark problems.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use sdfem_core::bench::{example1, example2, example3, BenchmarkId, Problem};
use sdfem_core::errors::{compute_errors, ErrorReport};
use sdfem_core::field::DiscreteFields;
use sdfem_core::mesh::Mesh;
use sdfem_core::quadrature::STANDARD_DEGREE;
use sdfem_core::reconstruction::ReconstructionOperator;
use sdfem_core::system::{assemble, Method, SaddleSystem, Solution};
use sdfem_core::{Degree, Discretization};

use crate::msh::{read_msh, MshError};
use crate::solve::{solve, SolveError, SolveStats};

/// Permeability used by all benchmarks unless overridden.
pub const DEFAULT_PERMEABILITY: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] sdfem_core::Error),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Mesh(#[from] MshError),
    #[error("mesh setup failed: {0}")]
    Setup(String),
}

/// One solve: example, method, discretization and data parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub example: BenchmarkId,
    pub method: Method,
    pub degree: Degree,
    pub level: u32,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub permeability: f64,
    /// Interface friction `alpha_1 / sqrt(kappa)` for the second example,
    /// or `alpha_1` for the cavity; the first example fixes its own.
    pub alpha: Option<f64>,
}

impl RunSpec {
    pub fn new(example: BenchmarkId, method: Method, degree: Degree, level: u32) -> RunSpec {
        RunSpec { example, method, degree, level, gamma: 1.0, mu: 1.0, lambda: 0.0, permeability: DEFAULT_PERMEABILITY, alpha: None }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn problem(&self) -> Box<dyn Problem> {
        match self.example {
            BenchmarkId::Ex1 => Box::new(example1(self.gamma, self.mu, self.permeability)),
            BenchmarkId::Ex2 => {
                let mut p = example2(self.mu, self.permeability);
                if let Some(a) = self.alpha {
                    p.alpha1_over_sqrt_kappa = a;
                }
                Box::new(p)
            }
            BenchmarkId::Ex3 => Box::new(example3(self.mu, self.lambda, self.permeability, self.alpha.unwrap_or(1.0))),
        }
    }

    fn mesh_key(&self) -> (BenchmarkId, u32, Degree) {
        (self.example, self.level, self.degree)
    }
}

/// Spaces and reconstruction on one mesh, shared by all runs on it.
pub struct MeshContext {
    pub disc: Discretization,
    pub recon: ReconstructionOperator,
}

impl MeshContext {
    pub fn new(mesh: Mesh, degree: Degree) -> Result<MeshContext, RunError> {
        let disc = Discretization::new(mesh, degree)?;
        let recon = ReconstructionOperator::new(&disc)?;
        Ok(MeshContext { disc, recon })
    }

    /// Benchmark mesh for `spec`, or the mesh file when given.
    pub fn for_spec(spec: &RunSpec, mesh_file: Option<&Path>) -> Result<MeshContext, RunError> {
        let mesh = match mesh_file {
            Some(path) => read_msh(path)?,
            None => spec.example.mesh(spec.level)?,
        };
        MeshContext::new(mesh, spec.degree)
    }

    pub fn assemble(&self, spec: &RunSpec) -> Result<SaddleSystem, RunError> {
        let problem = spec.problem();
        Ok(assemble(&self.disc, problem.as_ref(), spec.method, Some(&self.recon))?)
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub spec: RunSpec,
    /// Error components; NaN when the example has no exact solution.
    pub errors: ErrorReport,
    pub solution: Solution,
    pub stats: SolveStats,
    /// Largest velocity magnitude at triangle vertices and centroids.
    pub velocity_max: f64,
}

fn nan_report(disc: &Discretization) -> ErrorReport {
    let n = f64::NAN;
    ErrorReport {
        velocity: n,
        velocity_stokes: n,
        velocity_darcy: n,
        velocity_darcy_div: n,
        pressure: n,
        pressure_stokes: n,
        pressure_darcy: n,
        dof: disc.n_total(),
        h: disc.mesh.h(),
        wall_time: 0.0,
    }
}

/// Largest velocity magnitude over the vertices and centroid of every
/// triangle.
pub fn velocity_max(disc: &Discretization, sol: &Solution) -> f64 {
    let fields = DiscreteFields::new(disc, sol);
    let mut m = 0.0f64;
    for t in 0..disc.mesh.n_triangles() {
        for lam in &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0 / 3.0; 3]] {
            let v = fields.at(t, lam).velocity;
            m = m.max(v[0].hypot(v[1]));
        }
    }
    m
}

/// Assembles, solves and measures one run.
pub fn run(ctx: &MeshContext, spec: &RunSpec) -> Result<RunRecord, RunError> {
    let start = Instant::now();
    let problem = spec.problem();
    let sys = assemble(&ctx.disc, problem.as_ref(), spec.method, Some(&ctx.recon))?;
    let (solution, stats) = solve(&sys)?;
    let wall = start.elapsed().as_secs_f64();
    let mut errors = match problem.exact() {
        Some(exact) => compute_errors(&ctx.disc, &solution, exact, STANDARD_DEGREE)?,
        None => nan_report(&ctx.disc),
    };
    errors.wall_time = wall;
    let vmax = velocity_max(&ctx.disc, &solution);
    log::info!(
        "{} {} k={} level={} dof={} E_h={:.4e} e_h={:.4e} ({:.2}s)",
        spec.example.name(),
        spec.method.name(),
        spec.degree.k(),
        spec.level,
        errors.dof,
        errors.velocity,
        errors.pressure,
        wall
    );
    Ok(RunRecord { spec: *spec, errors, solution, stats, velocity_max: vmax })
}

/// Runs every spec, building each mesh context once. Results keep the
/// order of `specs`; failures are returned in place without aborting the
/// other runs. `jobs` bounds the worker threads (1 runs sequentially).
pub fn sweep(specs: &[RunSpec], mesh_file: Option<&Path>, jobs: usize) -> Vec<Result<RunRecord, RunError>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(|| {
        let mut keys: Vec<(BenchmarkId, u32, Degree)> = specs.iter().map(RunSpec::mesh_key).collect();
        keys.sort_by_key(|k| (k.0.name(), k.1, k.2.k()));
        keys.dedup();
        let file: Option<PathBuf> = mesh_file.map(Path::to_path_buf);
        let contexts: BTreeMap<(&'static str, u32, usize), Arc<Result<MeshContext, String>>> = keys
            .par_iter()
            .map(|k| {
                let spec = specs.iter().find(|s| s.mesh_key() == *k).unwrap();
                let ctx = MeshContext::for_spec(spec, file.as_deref()).map_err(|e| e.to_string());
                ((k.0.name(), k.1, k.2.k()), Arc::new(ctx))
            })
            .collect();
        specs
            .par_iter()
            .map(|spec| {
                let key = (spec.example.name(), spec.level, spec.degree.k());
                match contexts[&key].as_ref() {
                    Ok(ctx) => run(ctx, spec),
                    Err(msg) => Err(RunError::Setup(msg.clone())),
                }
            })
            .collect()
    })
}
