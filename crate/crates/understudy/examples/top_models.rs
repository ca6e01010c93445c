//! Watch the plausible set shrink.
//!
//! The top set keeps every model whose posterior weight is at least an
//! `alpha` share of the combined weight of all models at least as heavy.
//! The rule is threshold-monotone: walking models in descending posterior
//! order, membership holds on a prefix and then fails forever, so the set
//! is always a posterior-descending prefix.
//!
//! Here six models explain a stream of demonstrated actions; the heaviest
//! survive, the rest fall out one by one, and the membership cutoff moves
//! exactly when the posterior version does.
//!
//! Run with `cargo run --example top_models`.

use std::sync::Arc;

use understudy::policy::FixedActionPolicy;
use understudy::{ContextSignature, History, HistoryStep, PolicyModel, WeightedModelClass};

fn main() -> understudy::Result<()> {
    // Six biased coins; model 0 is the most head-heavy.
    let biases = [0.95, 0.8, 0.65, 0.5, 0.35, 0.2];
    let models: Vec<Arc<dyn PolicyModel>> = biases
        .iter()
        .map(|&b| {
            FixedActionPolicy::new(vec![b, 1.0 - b]).map(|p| Arc::new(p) as Arc<dyn PolicyModel>)
        })
        .collect::<understudy::Result<_>>()?;
    let mut class = WeightedModelClass::dense(models, None, ContextSignature::Free)?;

    let alpha = 0.1;
    let mut history = History::new(2, 1)?;

    println!("alpha = {alpha}; demonstrating action 0 (heads) repeatedly\n");
    println!("{:>5} {:>9} {:<18} top-set weights", "step", "included", "members");
    for t in 0..24 {
        let top = class.top_set(alpha)?;
        let members: Vec<u32> = top.included().to_vec();
        let weights: Vec<String> = top.log_weights()[..top.cutoff()]
            .iter()
            .map(|lw| format!("{:.3}", lw.exp()))
            .collect();
        println!(
            "{t:>5} {:>9} {:<18} {}",
            members.len(),
            format!("{members:?}"),
            weights.join(" ")
        );

        // One more demonstrated head: update, then extend the history.
        class.bayes_update(history.stripped(), 0)?;
        history.push(HistoryStep {
            queried: true,
            action: 0,
            observation: 0,
        })?;
    }

    let top = class.top_set(alpha)?;
    println!("\nafter 24 heads the top set is {:?}", top.included());
    println!(
        "heaviest model's posterior: {:.4}",
        class.posterior_of(top.included()[0] as usize)?
    );
    Ok(())
}
