//! The built-in identity checks behind `pgap verify`.

use perspective_gap::cli::run_identity_suite;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let checks = run_identity_suite(seed);
    for c in &checks {
        println!(
            "{:<36} {} cases {:>3} max error {:.2e} (tol {:.0e})",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.cases,
            c.max_error,
            c.tolerance
        );
    }
    if checks.iter().any(|c| !c.passed) {
        std::process::exit(3);
    }
}
