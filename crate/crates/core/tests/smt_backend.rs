//! The external solver path, driven by shell scripts posing as solvers.
#![cfg(unix)]

use std::os::unix::fs::PermissionsExt;
use std::path::PathBuf;
use std::time::Duration;

use pcw_core::symexec::{check_sat, CmpOp, Constraint, IntExpr, ProcessBackend, SatResult, SmtError, SolverConfig, Value};

fn fake_solver(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pcw-smt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    path
}

fn square_is_49() -> Constraint {
    let x = || IntExpr::Var("x".into());
    Constraint::IntCmp { op: CmpOp::Eq, lhs: IntExpr::Mul(Box::new(x()), Box::new(x())), rhs: IntExpr::Const(49.into()) }
}

fn config(solver: &std::path::Path, timeout: Duration) -> SolverConfig {
    SolverConfig {
        backend: ProcessBackend::from_command(solver.to_str().unwrap(), timeout),
        ..SolverConfig::default()
    }
}

#[test]
fn nonlinear_falls_back_to_backend() {
    let c = square_is_49();
    assert!(matches!(check_sat(std::slice::from_ref(&c), &SolverConfig::default()), SatResult::Unknown(_)));
    let log = std::env::temp_dir().join(format!("pcw-smt-{}-script.smt2", std::process::id()));
    let solver = fake_solver(
        "good.sh",
        &format!("cat > {}\necho sat\necho '((define-fun x () Int (- 7)))'", log.display()),
    );
    match check_sat(&[c], &config(&solver, Duration::from_secs(5))) {
        SatResult::Sat(m) => assert_eq!(m["x"], Value::Int((-7).into())),
        other => panic!("{other:?}"),
    }
    let script = std::fs::read_to_string(&log).unwrap();
    assert!(script.contains("(declare-const x Int)"));
    assert!(script.contains("(check-sat)"));
}

#[test]
fn wrong_backend_models_are_not_trusted() {
    let solver = fake_solver("liar.sh", "cat > /dev/null\necho sat\necho '((define-fun x () Int 6))'");
    assert!(matches!(check_sat(&[square_is_49()], &config(&solver, Duration::from_secs(5))), SatResult::Unknown(_)));
}

#[test]
fn slow_backend_times_out() {
    let solver = fake_solver("slow.sh", "sleep 5\necho unsat");
    let backend = ProcessBackend::from_command(solver.to_str().unwrap(), Duration::from_millis(200)).unwrap();
    let started = std::time::Instant::now();
    assert!(matches!(backend.check(&[square_is_49()]), Err(SmtError::Timeout(_))));
    assert!(started.elapsed() < Duration::from_secs(4));
}

#[test]
fn missing_backend_is_reported() {
    let backend = ProcessBackend::from_command("/nonexistent/solver -in", Duration::from_secs(1)).unwrap();
    assert!(matches!(backend.check(&[square_is_49()]), Err(SmtError::BackendUnavailable(_))));
}

#[test]
fn garbage_output_is_malformed() {
    let solver = fake_solver("garbage.sh", "cat > /dev/null\necho '(error \"boom\")'");
    let backend = ProcessBackend::from_command(solver.to_str().unwrap(), Duration::from_secs(5)).unwrap();
    assert!(matches!(backend.check(&[square_is_49()]), Err(SmtError::MalformedSolverOutput(_))));
}
