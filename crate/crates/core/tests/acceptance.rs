//! Acceptance criteria 1-10. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test --release -p kdv-ginibre --test acceptance -- --nocapture`.

use kdv_ginibre::acceptance::{self, CriterionReport};

fn check(report: CriterionReport) {
    println!("{report}");
    assert!(report.passed, "{report}");
}

#[test]
fn criterion_01_constants() {
    check(acceptance::criterion_1());
}

#[test]
fn criterion_02_scattering_identities() {
    check(acceptance::criterion_2());
}

#[test]
fn criterion_03_rhp_solver() {
    check(acceptance::criterion_3());
}

#[test]
fn criterion_04_tail_at_gamma_one() {
    check(acceptance::criterion_4());
}

#[test]
fn criterion_05_tail_below_gamma_one() {
    check(acceptance::criterion_5());
}

#[test]
fn criterion_06_two_solvers() {
    check(acceptance::criterion_6());
}

#[test]
fn criterion_07_conservation() {
    check(acceptance::criterion_7());
}

#[test]
fn criterion_08_distribution_tail() {
    check(acceptance::criterion_8());
}

#[test]
fn criterion_09_lkappa_series() {
    check(acceptance::criterion_9());
}

#[test]
fn criterion_10_monte_carlo() {
    check(acceptance::criterion_10());
}
