use std::process::Command;

use sdfem::cli::run_cli;
use sdfem::msh::read_msh;

fn sdfem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdfem"))
}

#[test]
fn flag_errors_exit_with_two() {
    let out = sdfem().args(["solve", "--example", "ex4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = sdfem().args(["solve", "--example", "ex1", "--k", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("k must be 2 or 3"));
    assert_eq!(run_cli(["sdfem", "solve", "--example", "ex1", "--levels", "0"]), 2);
    assert_eq!(run_cli(["sdfem", "--help"]), 0);
}

#[test]
fn solve_writes_reports_tables_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = sdfem()
        .args(["solve", "--example", "ex1", "--levels", "2", "--gamma", "1,1e3", "--dump-system", "--fields", "--samples", "8", "--jobs", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ex1 robust k=2 gamma=1e3"));
    for method in ["classical", "robust"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("ex1_{method}_k2.csv"))).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("method,example,k,level,dof,h,E_h"));
        // two gammas times two levels, ordered as requested
        assert_eq!(lines.len(), 5);
        assert!(lines[1].contains(",319,") && lines[2].contains(",1179,"));
    }
    assert!(dir.path().join("ex1_k2_summary.txt").exists());
    let names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(names.iter().filter(|n| n.ends_with("_matrix.mtx")).count(), 8);
    assert_eq!(names.iter().filter(|n| n.ends_with("_rhs.mtx")).count(), 8);
    let field = names.iter().find(|n| n.ends_with("_field.csv")).unwrap();
    let text = std::fs::read_to_string(dir.path().join(field)).unwrap();
    assert_eq!(text.lines().count(), 1 + 8 * 8);
    let mtx = std::fs::read_to_string(dir.path().join(names.iter().find(|n| n.contains("level0") && n.ends_with("_matrix.mtx")).unwrap())).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general"));
}

#[test]
fn failing_runs_give_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let code = run_cli([
        "sdfem".as_ref(),
        "solve".as_ref(),
        "--example".as_ref(),
        "ex1".as_ref(),
        "--mesh".as_ref(),
        std::ffi::OsStr::new("/nonexistent/mesh.msh"),
        "--out".as_ref(),
        dir.path().as_os_str(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn cavity_solve_on_the_bundled_mesh_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = concat!(env!("CARGO_MANIFEST_DIR"), "/data/cavity.msh");
    let out = sdfem()
        .args(["solve", "--example", "ex3", "--method", "robust", "--mu", "1e-6", "--lambda", "1e4", "--samples", "16", "--mesh", mesh, "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let field = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.to_string_lossy().ends_with("_field.csv")).unwrap();
    let text = std::fs::read_to_string(field).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,subdomain,u1,u2,p");
    let speeds: Vec<f64> = lines
        .map(|l| {
            let c: Vec<f64> = l.split(',').filter_map(|v| v.parse().ok()).collect();
            c[2].hypot(c[3])
        })
        .collect();
    assert_eq!(speeds.len(), 16 * 16);
    let max = speeds.iter().copied().filter(|s| s.is_finite()).fold(0.0, f64::max);
    // lid speed 1; the gradient forcing must not show up
    assert!(max > 0.1 && max < 1.5, "{max}");
}

#[test]
fn diagnose_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("diag.json");
    let code = run_cli([
        "sdfem".as_ref(),
        "diagnose".as_ref(),
        "--check".as_ref(),
        "reconstruction".as_ref(),
        "--level".as_ref(),
        "1".as_ref(),
        "--samples".as_ref(),
        "4".as_ref(),
        "--json".as_ref(),
        json.as_os_str(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let div = v["reconstruction"]["kernel"]["max_divergence"].as_f64().unwrap();
    let scale = v["reconstruction"]["kernel"]["scale"].as_f64().unwrap();
    assert!(div < 1e-9 * scale);
    assert!(v.get("infsup").is_none());
}

#[test]
fn mesh_command_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex2.msh");
    let out = sdfem().args(["mesh", "--example", "ex2", "--level", "1", "--out"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mesh = read_msh(&path).unwrap();
    assert_eq!(summary["triangles"].as_u64().unwrap() as usize, mesh.n_triangles());
    let again = sdfem().args(["mesh", "--input"]).arg(&path).output().unwrap();
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&again.stdout).unwrap(), summary);
}
