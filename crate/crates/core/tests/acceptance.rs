//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 3 5 6`.

use pump_core::acceptance::{run_suite, SuiteConfig};

fn main() {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let reports = run_suite(&ids, &SuiteConfig::default()).expect("criterion ids are valid");
    let mut failed = 0;
    for r in &reports {
        println!("{}", r.line());
        failed += usize::from(!r.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        reports.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
