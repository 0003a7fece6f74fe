//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when a criterion fails
//! other than the known-false literal reversal identity (criterion 10), which must fail only
//! for that reason.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use refraction_billiards::selftest::{
    free_fall_oddness, reversal_residuals, run_criterion, tol, CRITERIA,
};

const BIFURCATION_BUDGET: Duration = Duration::from_secs(1);
const JACOBIAN_BUDGET: Duration = Duration::from_secs(30);

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let start = Instant::now();
        let mut result = run_criterion(id).expect("known criterion");
        let elapsed = start.elapsed();
        let budget = match id {
            1 => Some(BIFURCATION_BUDGET),
            3 => Some(JACOBIAN_BUDGET),
            _ => None,
        };
        if let Some(b) = budget {
            if elapsed >= b {
                result.passed = false;
            }
            result.detail = format!(
                "{}; runtime {:.3} s (budget {} s)",
                result.detail,
                elapsed.as_secs_f64(),
                b.as_secs()
            );
        }
        println!("{}", result.line());
        if !result.passed {
            if id == 10 && criterion_10_fails_as_documented() {
                println!("  known: literal F(xi1,-alpha1) differs from (xi0,-alpha0); the reversed cycle and delta oddness hold");
            } else {
                unexpected.push(id);
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

fn criterion_10_fails_as_documented() -> bool {
    let Ok((literal, reversed)) = reversal_residuals(100) else {
        return false;
    };
    let Ok(odd) = free_fall_oddness() else {
        return false;
    };
    literal >= tol::REVERSAL && reversed < tol::REVERSAL && odd < tol::ODDNESS
}
