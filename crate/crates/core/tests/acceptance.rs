//! Runs every reproduction criterion and prints one PASS/FAIL line each.

use grc::selftest::{run, CRITERIA};
use grc::Execution;

fn main() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let out = run(c, Execution::default());
        println!("{}", out.line());
        if !out.passed {
            failed.push(out.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", CRITERIA.len(), CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
