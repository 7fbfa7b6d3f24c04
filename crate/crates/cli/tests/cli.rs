use std::path::PathBuf;
use std::process::{Command, Output};

use spla_cli::bench::BenchReport;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn spla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spla"))
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> BenchReport {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn cg_on_spd_file() {
    let m = data("spd_2x2.mtx");
    let out = spla(&[
        "--matrix",
        m.to_str().unwrap(),
        "--solver",
        "cg",
        "--reduction-factor",
        "1e-10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.converged);
    assert!(r.iterations <= 2);
    assert_eq!((r.rows, r.cols, r.nnz), (2, 2, 4));
    assert_eq!(r.matrix, "spd_2x2");
}

#[test]
fn lu_reports_zero_iterations() {
    let m = data("spd_2x2.mtx");
    for solver in ["lu", "gmres_lu"] {
        let out = spla(&["--matrix", m.to_str().unwrap(), "--solver", solver]);
        assert_eq!(out.status.code(), Some(0));
        let r = report(&out);
        assert!(r.converged);
        assert_eq!(r.algorithm, solver);
        if solver == "lu" {
            assert_eq!(r.iterations, 0);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let m = data("laplace_1d_100.mtx");
    let args = [
        "--matrix",
        m.to_str().unwrap(),
        "--solver",
        "bicgstab",
        "--rhs",
        "random(9)",
    ];
    let mut a = report(&spla(&args));
    let mut b = report(&spla(&args));
    a.wall_time_ms = 0.0;
    b.wall_time_ms = 0.0;
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn errors_exit_nonzero_without_json() {
    let missing = spla(&["--matrix", "/nonexistent/a.mtx"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(missing.stdout.is_empty());
    assert!(!missing.stderr.is_empty());

    let bad = data("malformed.mtx");
    let out = spla(&["--matrix", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));

    let m = data("spd_2x2.mtx");
    let out = spla(&["--matrix", m.to_str().unwrap(), "--backend", "cuda"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn non_convergence_still_reports() {
    let m = data("laplace_1d_100.mtx");
    let out = spla(&["--matrix", m.to_str().unwrap(), "--max-iters", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(!r.converged);
    assert_eq!(r.iterations, 3);
}

#[test]
fn config_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_path = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        format!(
            "matrix = {}\nsolver = cg\nbackend = parallel\npreconditioner = jacobi\noutput = {}\n",
            data("laplace_1d_100.mtx").display(),
            out_path.display()
        ),
    )
    .unwrap();
    let out = spla(&[
        "--config",
        cfg.to_str().unwrap(),
        "--solver",
        "gmres",
        "--restart",
        "100",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let r: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r.algorithm, "gmres");
    assert_eq!(r.backend, "parallel");
    assert!(r.converged);

    std::fs::write(&cfg, "matrix = x.mtx\nsolver-typo = cg\n").unwrap();
    let out = spla(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver-typo"));
}

#[test]
fn output_file_untouched_on_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let bad = data("malformed.mtx");
    let out = spla(&[
        "--matrix",
        bad.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
}

#[test]
fn file_rhs_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let rhs = dir.path().join("b.txt");
    std::fs::write(&rhs, "1.0\n2.0\n").unwrap();
    let m = data("spd_2x2.mtx");
    let out = spla(&[
        "--matrix",
        m.to_str().unwrap(),
        "--rhs",
        rhs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!((report(&out).initial_residual_norm - 5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn demo_binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_spla-demo"))
        .args(["euler", "--steps", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_spla-demo"))
        .args(["heat", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
