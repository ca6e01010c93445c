//! The travel-agency world, end to end.
//!
//! Three clients with geometric arrival rates each want restaurant
//! recommendations matching a personal propensity for four binary features.
//! The demonstrator knows every propensity; the imitator faces 3^12 = 531441
//! candidate tuples and a hair-trigger clientele: any client who can name a
//! rival tuple that explains their recommendations a hundred times better
//! than the one they asked for walks out.
//!
//! The class factors over the twelve propensities, so the posterior lives in
//! twelve small tables instead of half a million weights, and the top set is
//! scanned block-by-block rather than model-by-model.
//!
//! Run with `cargo run --release --example toy_travel_agency`.

use understudy::toyworld::{run_toy, ToyRunConfig, TruthSpec, SHOWCASE_TRUTH};

fn main() -> understudy::Result<()> {
    let config = ToyRunConfig {
        clients: 3,
        steps: 4096,
        alpha: 1e-14,
        truth: TruthSpec::Fixed(SHOWCASE_TRUTH.to_vec()),
    };
    let summary = run_toy(&config, 0)?;

    println!(
        "{} steps, {} queries, truth posterior {:.4}",
        summary.steps, summary.queries, summary.truth_posterior
    );
    println!(
        "clients seen: {:?}; quits: {:?}",
        summary.client_visits, summary.quits
    );
    println!(
        "truth stayed plausible: {}; conservatism violations: {}",
        summary.event_held, summary.conservatism_violations
    );

    // Queries thin out as evidence accumulates.
    let flags = &summary.query_flags;
    for (label, window) in [
        ("steps    0..1024", &flags[..1024]),
        ("steps 1024..2048", &flags[1024..2048]),
        ("steps 2048..3072", &flags[2048..3072]),
        ("steps 3072..4096", &flags[3072..]),
    ] {
        println!(
            "{label}: {:>4} queries",
            window.iter().filter(|q| **q).count()
        );
    }

    println!("\nper-propensity posterior (log2):");
    print!("{}", summary.posterior_csv);
    Ok(())
}
