//! CSV reports, field samples, MatrixMarket dumps and mesh summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use sdfem_core::field::DiscreteFields;
use sdfem_core::linalg::CsrMatrix;
use sdfem_core::mesh::{EdgeClass, Mesh, Subdomain};

use crate::study::RunRecord;

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "SDFEM_OUTPUT_DIR";

/// `SDFEM_OUTPUT_DIR` if set, otherwise `fallback`.
pub fn output_dir(fallback: &Path) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| fallback.to_path_buf())
}

pub const CSV_HEADER: [&str; 17] =
    ["method", "example", "k", "level", "dof", "h", "E_h", "E_h^s", "E_h1_d", "E_h2_d", "e_h", "e_h^s", "e_h^d", "gamma", "mu", "lambda", "time_s"];

fn sci(x: f64) -> String {
    format!("{x:.10e}")
}

/// One CSV row per successful run, in the given order.
pub fn write_report_csv<W: Write>(out: W, runs: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in runs {
        let e = &r.errors;
        let mut row = vec![r.spec.method.name().to_string(), r.spec.example.name().to_string(), r.spec.degree.k().to_string(), r.spec.level.to_string(), e.dof.to_string(), sci(e.h)];
        row.extend(e.components().iter().map(|c| sci(*c)));
        row.extend([sci(r.spec.gamma), sci(r.spec.mu), sci(r.spec.lambda), format!("{:.6}", e.wall_time)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Samples velocity and pressure on an `n x n` grid of cell centres of
/// the bounding box. Points outside the mesh are skipped.
pub fn sample_fields(fields: &DiscreteFields, n: usize) -> Vec<[f64; 6]> {
    let mesh = &fields.disc.mesh;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &mesh.vertices {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64;
            let y = lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64;
            if let Some(v) = fields.eval([x, y]) {
                let dom = if v.subdomain == Subdomain::Stokes { 0.0 } else { 1.0 };
                out.push([x, y, dom, v.velocity[0], v.velocity[1], v.pressure]);
            }
        }
    }
    out
}

pub fn write_field_csv<W: Write>(out: W, samples: &[[f64; 6]]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "subdomain", "u1", "u2", "p"])?;
    for s in samples {
        let dom = if s[2] == 0.0 { "stokes" } else { "darcy" };
        w.write_record([sci(s[0]), sci(s[1]), dom.to_string(), sci(s[3]), sci(s[4]), sci(s[5])])?;
    }
    w.flush()?;
    Ok(())
}

/// MatrixMarket coordinate file (general, real).
pub fn write_matrix_market<W: Write>(mut out: W, a: &CsrMatrix) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows, a.ncols, a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// MatrixMarket array file for a vector.
pub fn write_vector_market<W: Write>(mut out: W, b: &[f64]) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} 1", b.len())?;
    for v in b {
        writeln!(out, "{v:e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub triangles_stokes: usize,
    pub triangles_darcy: usize,
    pub edges: usize,
    pub edges_by_class: Vec<(String, usize)>,
    pub h: f64,
    pub min_area: f64,
    pub bounding_box: [f64; 4],
}

pub fn mesh_summary(mesh: &Mesh) -> MeshSummary {
    let classes = [EdgeClass::InteriorStokes, EdgeClass::InteriorDarcy, EdgeClass::Interface, EdgeClass::BoundaryStokes, EdgeClass::BoundaryDarcy];
    let mut bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in &mesh.vertices {
        bbox = [bbox[0].min(p[0]), bbox[1].min(p[1]), bbox[2].max(p[0]), bbox[3].max(p[1])];
    }
    MeshSummary {
        vertices: mesh.n_vertices(),
        triangles: mesh.n_triangles(),
        triangles_stokes: mesh.triangles_in(Subdomain::Stokes).count(),
        triangles_darcy: mesh.triangles_in(Subdomain::Darcy).count(),
        edges: mesh.n_edges(),
        edges_by_class: classes.iter().map(|c| (c.name().to_string(), mesh.edges_of_class(*c).count())).collect(),
        h: mesh.h(),
        min_area: (0..mesh.n_triangles()).map(|t| mesh.area(t)).fold(f64::INFINITY, f64::min),
        bounding_box: bbox,
    }
}
