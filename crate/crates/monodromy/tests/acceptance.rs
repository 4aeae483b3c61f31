//! Acceptance suite: runs every criterion and prints one pass/fail line per
//! criterion with its measured values.

use monodromy::verify::{run_all, VerifyConfig};

#[test]
fn acceptance_criteria() {
    let outcomes = run_all(&VerifyConfig::default());
    let mut all_passed = true;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] criterion {:>2} ({:>6} ms)  {} — {}",
            o.index, o.millis, o.name, o.details
        );
        all_passed &= o.passed;
    }
    assert!(all_passed, "at least one acceptance criterion failed");
}

#[test]
fn tiny_closure_cap_degrades_gracefully() {
    // Group orders fall back to the stabilizer chain when the closure cap
    // is absurdly small; the polynomial criteria still pass.
    use monodromy::verify::{criterion_1, criterion_2};
    let vcfg = VerifyConfig {
        closure_cap: 10,
        ..VerifyConfig::default()
    };
    let one = criterion_1(&vcfg);
    assert!(one.passed, "{}", one.details);
    let two = criterion_2(&vcfg);
    assert!(two.passed, "{}", two.details);
}
