//! First contact with the conservative imitation loop.
//!
//! A demonstrator plays one of four fixed action distributions; the imitator
//! holds a uniform prior over all four and must discover which one it is
//! watching. Early on, no action is safe to take alone — the minimum
//! probability over plausible models is small — so the imitator pays for
//! queries. After enough demonstrated actions the posterior concentrates,
//! the minima grow, and the query rate collapses.
//!
//! The truth staying plausible is itself only guaranteed with probability
//! `1 - alpha/w` (here 0.8), so some seeds do watch it fall out of the top
//! set; this one holds.
//!
//! Run with `cargo run --example imitation_basics`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use understudy::policy::{FixedActionPolicy, IidEnvironment};
use understudy::{run_episode, ContextSignature, EpisodeOptions, PolicyModel, WeightedModelClass};

fn main() -> understudy::Result<()> {
    // Four candidate models over three actions. The third row is the truth.
    let rows = [
        vec![0.80, 0.15, 0.05],
        vec![0.10, 0.80, 0.10],
        vec![0.30, 0.30, 0.40],
        vec![0.05, 0.15, 0.80],
    ];
    let truth_index = 2;

    let models: Vec<Arc<dyn PolicyModel>> = rows
        .iter()
        .map(|row| {
            FixedActionPolicy::new(row.clone()).map(|p| Arc::new(p) as Arc<dyn PolicyModel>)
        })
        .collect::<understudy::Result<_>>()?;
    let mut class = WeightedModelClass::dense(models, None, ContextSignature::Free)?;
    let demonstrator = FixedActionPolicy::new(rows[truth_index].clone())?;
    let environment = IidEnvironment::new(vec![1.0])?;

    let opts = EpisodeOptions {
        steps: 400,
        alpha: 0.05,
        truth_index: Some(truth_index),
    };
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let record = run_episode(&mut class, &demonstrator, &environment, &opts, &mut rng)?;

    println!("{} steps, {} queries", opts.steps, record.queries);
    let halves = record.query_record();
    let (early, late) = halves.split_at(opts.steps / 2);
    println!(
        "first half: {} queries, second half: {}",
        early.iter().filter(|q| **q).count(),
        late.iter().filter(|q| **q).count(),
    );

    // The query probability theta decays as the posterior concentrates.
    for t in [0, 1, 3, 7, 15, 63, 255, 399] {
        println!("theta at step {t:>3}: {:.4}", record.theta_trace[t]);
    }

    let truth = record.truth.expect("truth tracking was requested");
    println!(
        "truth stayed plausible: {}; conservatism violations: {}",
        truth.event_held, truth.conservatism_violations,
    );
    for i in 0..class.len() {
        println!("posterior on model {i}: {:.6}", class.posterior_of(i)?);
    }
    Ok(())
}
