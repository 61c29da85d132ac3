//! Command-line front end.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sdfem_core::bench::BenchmarkId;
use sdfem_core::errors::{convergence_rates, ErrorReport, OrderConvention};
use sdfem_core::field::DiscreteFields;
use sdfem_core::mesh::Subdomain;
use sdfem_core::system::Method;
use sdfem_core::Degree;

use crate::diagnostics::{check_reconstruction, check_consistency, infsup_probe, ProbePair};
use crate::msh::{read_msh, write_msh};
use crate::output::{mesh_summary, output_dir, sample_fields, write_field_csv, write_matrix_market, write_report_csv, write_vector_market};
use crate::study::{sweep, MeshContext, RunRecord, RunSpec, DEFAULT_PERMEABILITY};

#[derive(Debug, Parser)]
#[command(name = "sdfem", version, about = "Coupled Stokes-Darcy solver with classical and pressure-robust discretizations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    Ex1,
    Ex2,
    Ex3,
}

impl From<ExampleArg> for BenchmarkId {
    fn from(e: ExampleArg) -> Self {
        match e {
            ExampleArg::Ex1 => BenchmarkId::Ex1,
            ExampleArg::Ex2 => BenchmarkId::Ex2,
            ExampleArg::Ex3 => BenchmarkId::Ex3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Classical,
    Robust,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Classical => vec![Method::Classical],
            MethodArg::Robust => vec![Method::Robust],
            MethodArg::Both => vec![Method::Classical, Method::Robust],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    Reconstruction,
    Consistency,
    Infsup,
    All,
}

fn parse_k(s: &str) -> Result<u32, String> {
    match s {
        "2" => Ok(2),
        "3" => Ok(3),
        _ => Err(format!("k must be 2 or 3, got {s}")),
    }
}

fn degree(k: u32) -> Degree {
    if k == 3 {
        Degree::Three
    } else {
        Degree::Two
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a benchmark over refinement levels and parameter lists.
    Solve {
        #[arg(long, value_enum)]
        example: ExampleArg,
        #[arg(long, value_enum, default_value = "both")]
        method: MethodArg,
        #[arg(long, default_value = "2", value_parser = parse_k)]
        k: u32,
        /// Number of refinement levels.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        levels: u32,
        /// Coarsest level (default 0; 2 for the cavity, i.e. 48 columns).
        #[arg(long)]
        first_level: Option<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        gamma: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        mu: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_PERMEABILITY)]
        permeability: f64,
        /// Interface friction (second example: alpha/sqrt(kappa); cavity: alpha).
        #[arg(long)]
        alpha: Option<f64>,
        /// MSH mesh file replacing the generated mesh (one level).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Output directory (default: $SDFEM_OUTPUT_DIR or ./results).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write matrix and right-hand side of every run in MatrixMarket format.
        #[arg(long)]
        dump_system: bool,
        /// Grid size of the field samples (cavity runs, or always with --fields).
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        fields: bool,
    },
    /// Structural checks of the discretization.
    Diagnose {
        #[arg(long, value_enum, default_value = "all")]
        check: CheckArg,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, default_value = "2", value_parser = parse_k)]
        k: u32,
        #[arg(long, value_enum, default_value = "ex1")]
        example: ExampleArg,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write a JSON summary here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write a benchmark mesh as MSH, or summarize a mesh file, as JSON.
    Mesh {
        #[arg(long, value_enum, default_value = "ex1")]
        example: ExampleArg,
        #[arg(long, default_value_t = 0)]
        level: u32,
        /// Summarize this file instead of a generated mesh.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the mesh here in MSH 2.2 format.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` and runs; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve {
            example,
            method,
            k,
            levels,
            first_level,
            gamma,
            mu,
            lambda,
            permeability,
            alpha,
            mesh,
            out,
            jobs,
            dump_system,
            samples,
            fields,
        } => {
            let example: BenchmarkId = example.into();
            let first = first_level.unwrap_or(if example == BenchmarkId::Ex3 { 2 } else { 0 });
            let level_list: Vec<u32> = if mesh.is_some() { vec![first] } else { (first..first + levels).collect() };
            let dir = out.unwrap_or_else(|| output_dir(Path::new("results")));
            fs::create_dir_all(&dir)?;
            let methods = method.methods();
            let mut specs = Vec::new();
            for m in &methods {
                for g in &gamma {
                    for u in &mu {
                        for l in &lambda {
                            for lv in &level_list {
                                let mut s = RunSpec::new(example, *m, degree(k), *lv).with_gamma(*g).with_mu(*u).with_lambda(*l);
                                s.permeability = permeability;
                                s.alpha = alpha;
                                specs.push(s);
                            }
                        }
                    }
                }
            }
            let results = sweep(&specs, mesh.as_deref(), jobs);
            let mut failed = false;
            let mut ok: Vec<RunRecord> = Vec::new();
            for (spec, r) in specs.iter().zip(results) {
                match r {
                    Ok(r) => ok.push(r),
                    Err(e) => {
                        failed = true;
                        eprintln!("run {} {} level {} failed: {e}", spec.example.name(), spec.method.name(), spec.level);
                    }
                }
            }
            for m in &methods {
                let rows: Vec<RunRecord> = ok.iter().filter(|r| r.spec.method == *m).cloned().collect();
                let path = dir.join(format!("{}_{}_k{}.csv", example.name(), m.name(), k));
                write_report_csv(BufWriter::new(File::create(&path)?), &rows)?;
                println!("wrote {}", path.display());
            }
            if fields || example == BenchmarkId::Ex3 || dump_system {
                write_run_files(&dir, &ok, mesh.as_deref(), samples, fields || example == BenchmarkId::Ex3, dump_system)?;
            }
            let table = summary_table(&ok);
            print!("{table}");
            fs::write(dir.join(format!("{}_k{}_summary.txt", example.name(), k)), &table)?;
            Ok(if failed { 1 } else { 0 })
        }
        Command::Diagnose { check, level, k, example, samples, seed, json } => {
            let example: BenchmarkId = example.into();
            let mesh = example.mesh(level)?;
            let mut summary = serde_json::Map::new();
            if !matches!(check, CheckArg::Infsup) {
                let ctx = MeshContext::new(mesh.clone(), degree(k))?;
                if matches!(check, CheckArg::Reconstruction | CheckArg::All) {
                    let rep = check_reconstruction(&ctx.disc, &ctx.recon, samples, seed)?;
                    println!("{rep}");
                    summary.insert("reconstruction".into(), serde_json::to_value(&rep)?);
                }
                if matches!(check, CheckArg::Consistency | CheckArg::All) {
                    let p = |x: [f64; 2], _: Subdomain| (2.0 * x[0] + 0.3).sin() * (1.5 * x[1]).cos() + x[0] * x[1];
                    let rep = check_consistency(&ctx.disc, &ctx.recon, &p, samples.min(10), seed)?;
                    println!("{rep}");
                    summary.insert("consistency".into(), serde_json::to_value(rep)?);
                }
            }
            if matches!(check, CheckArg::Infsup | CheckArg::All) {
                let mut rows = Vec::new();
                for lv in 0..=level.min(2) {
                    let m = example.mesh(lv)?;
                    let stable = infsup_probe(&m, ProbePair::Method(degree(k))).map_err(anyhow::Error::msg)?;
                    let broken = infsup_probe(&m, ProbePair::LinearLinear).map_err(anyhow::Error::msg)?;
                    println!("inf-sup level {lv}: h = {:.4}, method pair {:.4e}, P1/P1 control {:.4e}", stable.h, stable.beta, broken.beta);
                    rows.push(serde_json::json!({"level": lv, "h": stable.h, "method": stable.beta, "p1p1": broken.beta}));
                }
                summary.insert("infsup".into(), serde_json::Value::Array(rows));
            }
            if let Some(path) = json {
                fs::write(path, serde_json::to_string_pretty(&serde_json::Value::Object(summary))?)?;
            }
            Ok(0)
        }
        Command::Mesh { example, level, input, out } => {
            let mesh = match input {
                Some(p) => read_msh(&p)?,
                None => BenchmarkId::from(example).mesh(level)?,
            };
            if let Some(p) = out {
                fs::write(&p, write_msh(&mesh))?;
            }
            println!("{}", serde_json::to_string_pretty(&mesh_summary(&mesh))?);
            Ok(0)
        }
    }
}

fn run_stem(r: &RunRecord) -> String {
    let s = &r.spec;
    format!("{}_{}_k{}_level{}_gamma{:e}_mu{:e}_lambda{:e}", s.example.name(), s.method.name(), s.degree.k(), s.level, s.gamma, s.mu, s.lambda)
}

fn write_run_files(dir: &Path, runs: &[RunRecord], mesh_file: Option<&Path>, n: usize, fields: bool, dump: bool) -> anyhow::Result<()> {
    for r in runs {
        let ctx = MeshContext::for_spec(&r.spec, mesh_file)?;
        if fields {
            let samples = sample_fields(&DiscreteFields::new(&ctx.disc, &r.solution), n);
            write_field_csv(BufWriter::new(File::create(dir.join(format!("{}_field.csv", run_stem(r))))?), &samples)?;
        }
        if dump {
            let sys = ctx.assemble(&r.spec)?;
            write_matrix_market(BufWriter::new(File::create(dir.join(format!("{}_matrix.mtx", run_stem(r))))?), &sys.matrix)?;
            write_vector_market(BufWriter::new(File::create(dir.join(format!("{}_rhs.mtx", run_stem(r))))?), &sys.rhs)?;
        }
    }
    Ok(())
}

fn fmt_rate(r: Option<&sdfem_core::errors::Rate>) -> String {
    match r {
        Some(r) if r.defined => format!("{:.3}", r.value),
        Some(_) => "nan".into(),
        None => "-".into(),
    }
}

/// Text table grouped by method and parameters, one line per level.
pub fn summary_table(runs: &[RunRecord]) -> String {
    let mut out = String::new();
    let mut groups: Vec<Vec<&RunRecord>> = Vec::new();
    for r in runs {
        let key = |x: &RunRecord| (x.spec.method, x.spec.gamma.to_bits(), x.spec.mu.to_bits(), x.spec.lambda.to_bits());
        match groups.iter_mut().find(|g| key(g[0]) == key(r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    for g in groups {
        let s = &g[0].spec;
        let _ = writeln!(
            out,
            "\n{} {} k={} gamma={:e} mu={:e} lambda={:e}",
            s.example.name(),
            s.method.name(),
            s.degree.k(),
            s.gamma,
            s.mu,
            s.lambda
        );
        let reports: Vec<ErrorReport> = g.iter().map(|r| r.errors).collect();
        let dof_e = convergence_rates(&reports, |r| r.velocity, OrderConvention::Dof);
        let h_e = convergence_rates(&reports, |r| r.velocity, OrderConvention::MeshSize);
        let dof_p = convergence_rates(&reports, |r| r.pressure, OrderConvention::Dof);
        let h_p = convergence_rates(&reports, |r| r.pressure, OrderConvention::MeshSize);
        let _ = writeln!(
            out,
            "{:>8} {:>10} {:>11} {:>7} {:>7} {:>11} {:>7} {:>7} {:>11} {:>9}",
            "dof", "h", "E_h", "ord", "ord_h", "e_h", "ord", "ord_h", "|u|max", "time_s"
        );
        for (i, r) in g.iter().enumerate() {
            let e = &r.errors;
            let j = i.checked_sub(1);
            let pick = |v: &Vec<sdfem_core::errors::Rate>| fmt_rate(j.and_then(|j| v.get(j)));
            let _ = writeln!(
                out,
                "{:>8} {:>10.4e} {:>11.4e} {:>7} {:>7} {:>11.4e} {:>7} {:>7} {:>11.4e} {:>9.3}",
                e.dof,
                e.h,
                e.velocity,
                pick(&dof_e),
                pick(&h_e),
                e.pressure,
                pick(&dof_p),
                pick(&h_p),
                r.velocity_max,
                e.wall_time
            );
        }
    }
    out
}
