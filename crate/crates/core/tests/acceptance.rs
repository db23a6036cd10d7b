//! End-to-end acceptance suite: one check per headline claim, full scale.
//! Prints one pass/fail line per criterion (visible with --nocapture or on
//! failure).

use markov_psd::verify::{run_all, Scale};

#[test]
fn acceptance_criteria() {
    let results = run_all(Scale::Full);
    for r in &results {
        println!(
            "[{}] {:2} {} - {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.detail
        );
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    assert!(
        failed.is_empty(),
        "{} acceptance criteria failed: {}",
        failed.len(),
        failed
            .iter()
            .map(|r| format!("{} {} ({})", r.id, r.name, r.detail))
            .collect::<Vec<_>>()
            .join("; ")
    );
}
