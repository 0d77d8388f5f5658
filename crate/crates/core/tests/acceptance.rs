//! Acceptance criteria A1 to A11, one report line each.

use orbisymp::verify::{self, Options, Status, Suite};

const SEED: u64 = 20240917;

#[test]
fn acceptance() {
    let report = verify::run(Suite::All, SEED, &Options::default());
    for c in report.checks.iter().filter(|c| c.status != Status::Pass) {
        eprintln!("  {:?} {} error {:e} tolerance {:e} {}", c.status, c.name, c.max_error, c.tolerance,
            c.detail.as_deref().unwrap_or(""));
    }
    let lines = report.by_criterion();
    let expected: Vec<String> = (1..=11).map(|k| format!("A{k}")).collect();
    let seen: Vec<&str> = lines.iter().map(|(k, ..)| k.as_str()).collect();
    for k in &expected {
        assert!(seen.contains(&k.as_str()), "criterion {k} has no checks");
    }
    for (k, ok, ratio) in &lines {
        println!("{k:<4} {} (worst error / tolerance = {ratio:.3e})", if *ok { "PASS" } else { "FAIL" });
    }
    let failed: Vec<&str> = lines.iter().filter(|(_, ok, _)| !ok).map(|(k, ..)| k.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn report_is_reproducible() {
    let a = verify::run(Suite::Dims, 5, &Options::default());
    let b = verify::run(Suite::Dims, 5, &Options { threads: Some(1), ..Options::default() });
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
