//! One line per acceptance criterion; exits nonzero if any fails or the
//! suite overruns its time budget.

use std::process::ExitCode;
use std::time::Instant;

use cqrrpt_cli::verify::{run_one, VerifyOptions, CRITERIA, SUITE_BUDGET};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let start = Instant::now();
    let mut failed = 0;
    for c in &CRITERIA {
        let rep = run_one(c, &opts);
        println!("{rep}");
        failed += usize::from(!rep.outcome.pass);
    }
    let total = start.elapsed();
    let in_budget = total <= SUITE_BUDGET;
    println!(
        "{} suite: {}/{} criteria passed in {:.2}s (budget {}s)",
        if failed == 0 && in_budget { "PASS" } else { "FAIL" },
        CRITERIA.len() - failed,
        CRITERIA.len(),
        total.as_secs_f64(),
        SUITE_BUDGET.as_secs()
    );
    if failed == 0 && in_budget {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
