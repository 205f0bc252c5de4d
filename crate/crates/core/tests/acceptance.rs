//! End-to-end acceptance checks: one line per criterion, nonzero exit if any
//! fails. Simulation-backed criteria share one cached sweep.

use couette_core::validation::{Suite, Validator, SWEEP_N, SWEEP_REYNOLDS, SWEEP_SEEDS};
use std::time::Instant;

fn main() {
    let v = Validator::default();
    let start = Instant::now();
    let mut failed = 0;
    for (i, suite) in Suite::ALL.into_iter().enumerate() {
        let t0 = Instant::now();
        let r = v.run(suite);
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "[{:>2}] {:<21} {verdict} ({:.0}s) {}",
            i + 1,
            suite.name(),
            t0.elapsed().as_secs_f64(),
            r.summary
        );
        if !r.passed {
            failed += 1;
        }
    }
    let cells = SWEEP_N.len() * SWEEP_REYNOLDS.len() * SWEEP_SEEDS.len();
    println!(
        "acceptance: {} of {} criteria passed ({cells}-run sweep, {:.0}s total)",
        Suite::ALL.len() - failed,
        Suite::ALL.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
