//! Zero-tolerance verification on enumerable instances.
//!
//! For a small class, a short horizon, and finite alphabets, the entire
//! interaction law fits in memory: every branch of (query?, action,
//! observation) is walked once, so expectations and event probabilities are
//! exact sums rather than sample means. On these instances the bound catalog
//! (expected cubed query mass T1, plausibility of the truth T2, conditional
//! predictive error T3, conditional divergence T4, rare-event distortion T5)
//! can be checked to numerical slack instead of statistical error.
//!
//! Run with `cargo run --example exact_bounds`.

use understudy::bounds::exact::{run_exact_checks, standard_exact_configs, DEFAULT_EXACT_SLACK};

fn main() -> understudy::Result<()> {
    println!(
        "{:<18} {:<10} {:>13} {:>13}  verdict",
        "instance", "check", "lhs", "rhs"
    );
    let mut all_hold = true;
    for cfg in standard_exact_configs()? {
        for report in run_exact_checks(&cfg, DEFAULT_EXACT_SLACK)? {
            all_hold &= report.holds;
            println!(
                "{:<18} {:<10} {:>13.4e} {:>13.4e}  {}",
                report.note.split(';').next().unwrap_or(&report.note),
                report.check,
                report.lhs,
                report.rhs,
                if report.holds { "holds" } else { "VIOLATED" }
            );
        }
    }
    println!(
        "\n{}",
        if all_hold {
            "every bound holds exactly"
        } else {
            "a bound failed -- this is a bug"
        }
    );
    Ok(())
}
