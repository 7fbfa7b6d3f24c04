//! Acceptance checks. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with
//! `cargo test -p spla-cli --test acceptance -- --nocapture` to see them.
//!
//! Expected values come from independent oracles in this file (closed
//! forms, dense triple loops, dense residuals, loop-of-singles) rather than
//! from the library under test.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spla_cli::bench::BenchReport;
use spla_cli::demo::{euler, heat};
use spla_core::facade::{AbstractSolver, AppMatrix, AppVector, LibrarySolver, SolverOptions};
use spla_core::{
    batch_solve, instrument, lu_factorize, Algorithm, BatchAlgorithm, BatchCsr, BatchDense, Csr,
    Dense, Dim, Executor, LinOp, MatrixData, PreconditionerKind, SolverFactory, StoppingCriterion,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

// ---- oracles and generators ----

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| {
            if rng.gen::<f64>() < density {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn matmul(a: &[f64], rows: usize, inner: usize, b: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            for l in 0..inner {
                out[i * cols + j] += a[i * inner + l] * b[l * cols + j];
            }
        }
    }
    out
}

fn spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let m = random_dense(rng, n, n, 1.0);
    let mut mt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            mt[j * n + i] = m[i * n + j];
        }
    }
    let mut a = matmul(&mt, n, n, &m, n);
    for i in 0..n {
        a[i * n + i] += n as f64;
    }
    a
}

fn nonsymmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut a = random_dense(rng, n, n, 1.0);
    for i in 0..n {
        a[i * n + i] += n as f64;
    }
    a
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &[f64], n: usize, x: &[f64], b: &[f64]) -> f64 {
    let ax = matmul(a, n, n, x, 1);
    norm(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm(b)
}

fn to_csr(exec: &Executor, rows: usize, cols: usize, a: &[f64]) -> Csr {
    let mut md = MatrixData::new(Dim::new(rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            if a[i * cols + j] != 0.0 {
                md.add(i, j, a[i * cols + j]).unwrap();
            }
        }
    }
    Csr::read(exec, &md).unwrap()
}

fn solve(
    factory: &SolverFactory,
    exec: &Executor,
    n: usize,
    a: &[f64],
    b: &[f64],
) -> Option<(Vec<f64>, usize, bool)> {
    let solver = factory.generate(to_csr(exec, n, n, a)).ok()?;
    let mut x = Dense::new(exec, Dim::new(n, 1)).unwrap();
    let report = solver.solve(&Dense::vector(exec, b), &mut x).ok()?;
    Some((x.to_row_major(), report.iterations, report.converged))
}

fn criteria(max_iters: usize, reduction: f64) -> [StoppingCriterion; 2] {
    [
        StoppingCriterion::Iteration(max_iters),
        StoppingCriterion::ResidualNorm(reduction),
    ]
}

// ---- criteria ----

fn cg_exactness() -> Outcome {
    let exec = Executor::reference();
    let solver = SolverFactory::new(Algorithm::Cg)
        .with_criteria(criteria(100, 1e-10))
        .generate(to_csr(&exec, 2, 2, &[4.0, 1.0, 1.0, 3.0]))
        .unwrap();
    let b = Dense::vector(&exec, &[1.0, 2.0]);
    let mut x = Dense::new(&exec, Dim::new(2, 1)).unwrap();
    let (report, elapsed) = timed(|| solver.solve(&b, &mut x).unwrap());
    // Cramer's rule with det = 11
    let expect = [1.0 / 11.0, 7.0 / 11.0];
    let err = (x.at(0, 0) - expect[0])
        .abs()
        .max((x.at(1, 0) - expect[1]).abs());
    check(
        err <= 1e-9 && report.iterations <= 2 && within(elapsed, Duration::from_millis(1)),
        format!(
            "error {err:.1e}, {} iterations, {elapsed:?}",
            report.iterations
        ),
    )
}

fn spmv_oracle() -> Outcome {
    let exec = Executor::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ((worst, bad), elapsed) = timed(|| {
        let mut worst = 0.0f64;
        let mut bad = 0;
        for _ in 0..200 {
            let rows = rng.gen_range(1..=50);
            let cols = rng.gen_range(1..=50);
            let density = rng.gen_range(0.0..=0.3);
            let dense = random_dense(&mut rng, rows, cols, density);
            let a = to_csr(&exec, rows, cols, &dense);
            let v = random_vec(&mut rng, cols);
            let mut x = Dense::new(&exec, Dim::new(rows, 1)).unwrap();
            a.apply(&Dense::vector(&exec, &v), &mut x).unwrap();
            let expect = matmul(&dense, rows, cols, &v, 1);
            let scale = expect
                .iter()
                .fold(0.0f64, |m, e| m.max(e.abs()))
                .max(f64::MIN_POSITIVE);
            let err = x
                .to_row_major()
                .iter()
                .zip(&expect)
                .fold(0.0f64, |m, (p, q)| m.max((p - q).abs() / scale));
            worst = worst.max(err);
            if err > 1e-13 {
                bad += 1;
            }
        }
        (worst, bad)
    });
    check(
        bad == 0 && within(elapsed, Duration::from_secs(1)),
        format!("200 instances, worst relative error {worst:.1e}, {elapsed:?}"),
    )
}

fn krylov_suite() -> Outcome {
    let exec = Executor::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (failures, elapsed) = timed(|| {
        let mut failures = Vec::new();
        for case in 0..30 {
            let n = rng.gen_range(1..=30);
            let a = spd(&mut rng, n);
            let b = random_vec(&mut rng, n);
            for pre in [None, Some(PreconditionerKind::Jacobi)] {
                let factory = SolverFactory::new(Algorithm::Cg)
                    .with_criteria(criteria(n + 2, 1e-10))
                    .with_preconditioner(pre);
                match solve(&factory, &exec, n, &a, &b) {
                    Some((x, iters, _))
                        if iters <= n + 2 && relative_residual(&a, n, &x, &b) <= 1e-8 => {}
                    _ => failures.push(format!("cg {pre:?} case {case}")),
                }
            }
        }
        for case in 0..30 {
            let n = rng.gen_range(1..=30);
            let a = nonsymmetric(&mut rng, n);
            let b = random_vec(&mut rng, n);
            for alg in [Algorithm::BiCgStab, Algorithm::Gmres { restart: 30 }] {
                let factory = SolverFactory::new(alg).with_criteria(criteria(1000, 1e-10));
                match solve(&factory, &exec, n, &a, &b) {
                    Some((x, _, _)) if relative_residual(&a, n, &x, &b) <= 1e-8 => {}
                    _ => failures.push(format!("{alg:?} case {case}")),
                }
            }
        }
        failures
    });
    check(
        failures.is_empty() && within(elapsed, Duration::from_secs(5)),
        format!("{} failures {:?}, {elapsed:?}", failures.len(), failures),
    )
}

fn direct_solver() -> Outcome {
    let exec = Executor::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 20;
    let ((worst, max_iters, all_converged), elapsed) = timed(|| {
        let mut worst = 0.0f64;
        let mut max_iters = 0;
        let mut all_converged = true;
        let factory = SolverFactory::new(Algorithm::gmres_lu()).with_criteria(criteria(100, 1e-12));
        for _ in 0..10 {
            let a = random_dense(&mut rng, n, n, 1.0);
            let f = lu_factorize(&to_csr(&exec, n, n, &a), 1e-14).unwrap();
            let pa = matmul(&f.permutation_matrix(), n, n, &a, n);
            let lu = matmul(&f.lower(), n, n, &f.upper(), n);
            let max_a = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = pa
                .iter()
                .zip(&lu)
                .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            worst = worst.max(err / max_a);
            let b = random_vec(&mut rng, n);
            match solve(&factory, &exec, n, &a, &b) {
                Some((_, iters, converged)) => {
                    max_iters = max_iters.max(iters);
                    all_converged &= converged;
                }
                None => all_converged = false,
            }
        }
        (worst, max_iters, all_converged)
    });
    check(
        worst <= 1e-12
            && max_iters <= 2
            && all_converged
            && within(elapsed, Duration::from_secs(1)),
        format!("reconstruction {worst:.1e}, GMRES+LU at most {max_iters} iterations, {elapsed:?}"),
    )
}

fn batch_loop_equivalence() -> Outcome {
    let exec = Executor::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (count, n) = (1000, 8);
    let mut pattern = MatrixData::new(Dim::square(n));
    for i in 0..n {
        for j in 0..n {
            pattern.add(i, j, 1.0).unwrap();
        }
    }
    let mut values = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..count {
        values.extend(spd(&mut rng, n));
        rhs.extend(random_vec(&mut rng, n));
    }
    let crit = criteria(100, 1e-12);
    let ((worst, mismatched), elapsed) = timed(|| {
        let a = BatchCsr::read(&exec, count, &pattern, &values).unwrap();
        let b = BatchDense::from_values(count, Dim::new(n, 1), rhs.clone()).unwrap();
        let mut x = BatchDense::zeros(count, Dim::new(n, 1));
        let report = batch_solve(BatchAlgorithm::Cg, &crit, &a, &b, &mut x).unwrap();
        let factory = SolverFactory::new(Algorithm::Cg).with_criteria(crit);
        let mut worst = 0.0f64;
        let mut mismatched = 0;
        for k in 0..count {
            let (xs, iters, _) = solve(
                &factory,
                &exec,
                n,
                &values[k * n * n..(k + 1) * n * n],
                b.system(k),
            )
            .unwrap();
            if iters != report.systems[k].iterations {
                mismatched += 1;
            }
            for (p, q) in x.system(k).iter().zip(&xs) {
                worst = worst.max((p - q).abs());
            }
        }
        (worst, mismatched)
    });
    check(
        worst <= 1e-12 && mismatched == 0 && within(elapsed, Duration::from_secs(5)),
        format!("max deviation {worst:.1e}, {mismatched} iteration mismatches, {elapsed:?}"),
    )
}

/// Max difference to the reference backend and bitwise agreement across
/// worker counts for one grid size.
fn heat_backends(n: usize) -> Result<(f64, bool), spla_core::facade::FacadeError> {
    let reference = heat::heat_demo(n, "reference", None)?;
    let parallel: Vec<_> = [1, 2, 4]
        .into_iter()
        .map(|w| heat::heat_demo(n, "parallel", Some(w)))
        .collect::<Result<_, _>>()?;
    let diff = reference
        .solution
        .iter()
        .zip(&parallel[0].solution)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let bitwise = parallel.windows(2).all(|w| {
        w[0].solution
            .iter()
            .map(|v| v.to_bits())
            .eq(w[1].solution.iter().map(|v| v.to_bits()))
    });
    Ok((diff, bitwise))
}

fn backend_equivalence() -> Outcome {
    let (result, elapsed) = timed(|| heat_backends(32));
    let Ok((diff, bitwise)) = result else {
        return check(false, format!("{:?}", result.err()));
    };
    // 64 x 64 has enough rows to go through the worker pool
    let Ok((diff64, bitwise64)) = heat_backends(64) else {
        return check(false, "n = 64 failed");
    };
    check(
        diff <= 1e-8 && bitwise && diff64 <= 1e-8 && bitwise64 && within(elapsed, Duration::from_secs(5)),
        format!(
            "n = 32: reference vs parallel {diff:.1e}, workers 1/2/4 bitwise equal: {bitwise}, {elapsed:?}; \
             n = 64: {diff64:.1e}, bitwise {bitwise64}"
        ),
    )
}

fn heat_convergence_order() -> Outcome {
    let (result, elapsed) = timed(|| {
        Ok::<_, spla_core::facade::FacadeError>((
            heat::heat_demo(32, "reference", None)?,
            heat::heat_demo(64, "reference", None)?,
        ))
    });
    let Ok((coarse, fine)) = result else {
        return check(false, format!("{:?}", result.err()));
    };
    let ratio = coarse.max_error / fine.max_error;
    check(
        (3.5..=4.5).contains(&ratio)
            && coarse.relative_residual <= 1e-8
            && fine.relative_residual <= 1e-8
            && within(elapsed, Duration::from_secs(10)),
        format!(
            "errors {:.3e} / {:.3e} = {ratio:.3}, {elapsed:?}",
            coarse.max_error, fine.max_error
        ),
    )
}

fn implicit_euler() -> Outcome {
    let exec = Executor::reference();
    let (u, elapsed) = timed(|| euler::decay(&exec, 1.0, 0.1, 10).unwrap());
    let err = (u[9] - 1.1f64.powi(-10)).abs();
    check(
        err <= 1e-10 && within(elapsed, Duration::from_millis(1)),
        format!("u10 = {:.10}, error {err:.1e}, {elapsed:?}", u[9]),
    )
}

fn zero_copy() -> Outcome {
    let exec = Executor::reference();
    let n = 64;
    let mut m = AppMatrix::new(n, n);
    for i in 0..n {
        m.insert(i, i, 3.0);
        if i > 0 {
            m.insert(i, i - 1, -1.0);
            m.insert(i - 1, i, -1.0);
        }
    }
    instrument::reset();
    let solver = LibrarySolver::new(&exec, &m, SolverOptions::default()).unwrap();
    let b = AppVector::from_column(vec![1.0; n]);
    let mut x = AppVector::new(n, 1);
    let copies_before = instrument::array_copies();
    let mut converged = true;
    for _ in 0..100 {
        x.data_mut().fill(0.0);
        converged &= solver.solve(&b, &mut x).unwrap().converged;
    }
    let copies = instrument::array_copies() - copies_before;
    let conversions = instrument::matrix_conversions();
    check(
        copies == 0 && conversions == 1 && converged,
        format!("100 solves: {copies} vector copies, {conversions} matrix conversions"),
    )
}

fn facade_size() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/src/facade");
    let mut counts = Vec::new();
    for name in ["interface.rs", "library.rs", "registry.rs", "mod.rs"] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        let lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with("//"))
            .count();
        counts.push((name, lines));
    }
    let implementation: usize = counts
        .iter()
        .filter(|(n, _)| *n == "library.rs" || *n == "registry.rs")
        .map(|(_, c)| c)
        .sum();
    check(
        counts.iter().all(|(_, c)| *c <= 500) && implementation <= 500,
        format!("{counts:?}, library + registry = {implementation}"),
    )
}

fn cli_round_trip() -> Outcome {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let good = Command::new(env!("CARGO_BIN_EXE_spla"))
        .args([
            "--matrix",
            data.join("spd_2x2.mtx").to_str().unwrap(),
            "--solver",
            "cg",
        ])
        .output()
        .unwrap();
    let value: serde_json::Value = match serde_json::from_slice(&good.stdout) {
        Ok(v) => v,
        Err(e) => return check(false, format!("report is not JSON: {e}")),
    };
    let keys: Vec<&str> = value
        .as_object()
        .map(|o| o.keys().map(String::as_str).collect())
        .unwrap_or_default();
    let mut expected = BenchReport::KEYS.to_vec();
    expected.sort_unstable();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    let schema_ok =
        sorted == expected && serde_json::from_value::<BenchReport>(value.clone()).is_ok();
    let converged = value["converged"] == serde_json::Value::Bool(true);

    let bad = Command::new(env!("CARGO_BIN_EXE_spla"))
        .args(["--matrix", data.join("malformed.mtx").to_str().unwrap()])
        .output()
        .unwrap();
    check(
        schema_ok && converged && good.status.code() == Some(0) && bad.status.code() != Some(0) && bad.stdout.is_empty(),
        format!(
            "good: exit {:?}, schema ok {schema_ok}, converged {converged}; malformed: exit {:?}, {} bytes on stdout",
            good.status.code(),
            bad.status.code(),
            bad.stdout.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("CG exactness", cg_exactness),
        ("SpMV oracle suite", spmv_oracle),
        ("Krylov convergence suite", krylov_suite),
        ("Direct solver", direct_solver),
        ("Batch-loop equivalence", batch_loop_equivalence),
        ("Backend equivalence", backend_equivalence),
        ("Heat-demo convergence order", heat_convergence_order),
        ("Implicit Euler demo", implicit_euler),
        ("Zero-copy contract", zero_copy),
        ("Facade size", facade_size),
        ("CLI round trip", cli_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name}: {}", i + 1, outcome.detail);
        if !outcome.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
