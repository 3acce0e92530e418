//! Acceptance suite: runs every numbered criterion at its stated
//! tolerance and time limit, printing one line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use padic_heyde::selftest;

#[test]
fn acceptance_criteria() {
    let reports = selftest::run_all();
    let mut failures = Vec::new();
    for report in &reports {
        println!(
            "criterion {} ({}): {} in {} ms (limit {} ms)",
            report.id,
            report.name,
            if report.passed { "PASS" } else { "FAIL" },
            report.elapsed_ms,
            report.limit_ms
        );
        if !report.passed {
            failures.push(format!("criterion {}: {}", report.id, report.details));
        }
    }
    assert_eq!(reports.len(), 9);
    assert!(failures.is_empty(), "failing criteria:\n{}", failures.join("\n"));
}

/// The countable frozen values, asserted once more outside the runner.
#[test]
fn frozen_enumeration_counts() {
    use padic_heyde::symmetry::{enumerate_grid_solutions, DEFAULT_ENUMERATION_BUDGET};

    let res = enumerate_grid_solutions(5, 1, 2, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
    assert_eq!(res.summary.total, 6);
    assert_eq!(res.summary.degenerate_pairs, 5);
    assert_eq!(res.summary.idempotent_pairs, 1);
    assert_eq!(res.summary.other, 0);

    let res = enumerate_grid_solutions(5, 1, 1, 5, DEFAULT_ENUMERATION_BUDGET, 1).unwrap();
    assert_eq!(res.summary.total, 5);
    assert_eq!(res.summary.degenerate_pairs, 5);
    assert_eq!(res.summary.idempotent_pairs, 0);
    assert_eq!(res.summary.other, 0);
}
