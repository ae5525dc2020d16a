//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails.

#[path = "../common/mod.rs"]
mod common;

mod classifier;
mod extraction;
mod lm;
mod realtime;
mod retrieval;
mod session;
mod wfsa;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

/// `Ok` carries a short summary of what was measured.
pub type Outcome = Result<String, String>;

/// Returns `Err` from the enclosing check unless `cond` holds.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 8] = [
        ("wfsa oracle suite", wfsa::check),
        ("language model suite", lm::check),
        ("extraction oracle", extraction::check),
        ("retrieval", retrieval::check),
        ("classifier", classifier::check),
        ("session replay and determinism", session::check),
        ("real-time append latency", realtime::check),
        ("offline extraction byte-determinism", offline::check),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|panic| {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(summary) => println!("PASS  {name}  [{secs:.2} s]  {summary}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}  [{secs:.2} s]  {reason}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", checks.len());
        ExitCode::FAILURE
    }
}
