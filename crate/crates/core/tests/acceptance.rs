//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line.

use std::process::Command;

use dho::verification::{run_criterion, VerifyOptions};

fn dho() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dho"))
}

fn check(id: u8) {
    let t = run_criterion(id, &VerifyOptions::default());
    let o = &t.outcome;
    println!(
        "criterion {id:>2}: {} | {} | {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.detail
    );
    assert!(o.pass, "criterion {id} failed: {}", o.detail);
}

#[test]
fn criterion_01_real_spectrum_fock() {
    check(1);
}

#[test]
fn criterion_02_grid_cross_check() {
    check(2);
}

#[test]
fn criterion_03_ordering_shift() {
    check(3);
}

#[test]
fn criterion_04_sign_adjudication() {
    check(4);
}

#[test]
fn criterion_05_nu_regression() {
    check(5);
}

#[test]
fn criterion_06_gauge_equivalence() {
    check(6);
}

#[test]
fn criterion_07_completed_square() {
    check(7);
}

#[test]
fn criterion_08_eigensolver_health() {
    check(8);
}

#[test]
fn criterion_09_critical_and_overdamped() {
    check(9);
    let out = dho().args(["spectrum", "--lambda", "3"]).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    println!(
        "criterion  9 (binary): spectrum --lambda 3 exit={:?}",
        out.status.code()
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr.contains("overdamped"));
}

#[test]
fn criterion_10_determinism() {
    check(10);
    let run = || dho().args(["verify", "--json"]).output().unwrap();
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    println!("criterion 10 (binary): verify --json twice byte-identical={same}");
    assert!(same);
}
