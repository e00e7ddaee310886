//! Reproduce the critical-power, boundary-angle and sweep scenarios.

use gridstrength::cli::{validate_suite, RunConfig};

fn main() {
    let report = validate_suite(&RunConfig::default());
    for r in &report.rows {
        println!(
            "{:<5} {:<6} {:<48} expected {:>9.4} computed {:>9} ({})",
            if r.pass { "PASS" } else { "FAIL" },
            r.scenario,
            r.quantity,
            r.expected,
            r.computed.map_or("-".to_string(), |c| format!("{c:.4}")),
            r.source
        );
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
}
