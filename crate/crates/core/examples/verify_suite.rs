//! Runs the built-in invariant and oracle checks, as `seqbell verify` does.

use seqbell::verify::{all_passed, verify_report, Fault};

fn main() {
    for fault in [None, Some(Fault::R1Normalization)] {
        println!("fault injected: {fault:?}");
        let report = verify_report(fault);
        for r in &report {
            println!(
                "  {:<4} {:<24} {:>12.3e}  {}",
                if r.passed { "pass" } else { "FAIL" },
                r.check,
                r.observed,
                r.tolerance
            );
        }
        println!("  all passed: {}\n", all_passed(&report));
    }
}
