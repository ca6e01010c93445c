//! Sequence prediction from the top of the posterior.
//!
//! Given a class of measures, the full Bayes mixture `xi` is the gold
//! standard but mixes in every crackpot hypothesis forever. The `rho_n`
//! family instead trusts only the `n` currently best-weighted measures:
//! `rho_n` itself is a non-normalized maximum over n-subsets, `rho_norm`
//! normalizes it into a proper predictor, and `rho_stat` just mixes the
//! current top n. All three sit above the floors `w(mu) * mu` and below
//! `xi` in prefix mass, which is what their regret guarantees lean on.
//!
//! This example streams symbols from a hidden Markov-ish truth and tracks
//! cumulative log loss of each predictor against the truth's own loss.
//!
//! Run with `cargo run --example smap_estimators`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use understudy::policy::sample_categorical;
use understudy::smap::{IidCategorical, MarkovChain, Measure, MeasureClass};

fn main() -> understudy::Result<()> {
    let measures: Vec<Arc<dyn Measure>> = vec![
        Arc::new(MarkovChain::new(
            vec![0.5, 0.5],
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )?),
        Arc::new(IidCategorical::new(vec![0.7, 0.3])?),
        Arc::new(IidCategorical::new(vec![0.5, 0.5])?),
        Arc::new(IidCategorical::new(vec![0.1, 0.9])?),
    ];
    let truth = 0; // the Markov chain
    let mut class = MeasureClass::new(measures, None)?;
    let rank = 2;

    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let mut losses = [0.0f64; 4]; // mu, xi, rho_norm, rho_stat
    let steps = 600;

    for _ in 0..steps {
        let conditional = class.measure_conditional(truth)?;
        let symbol = sample_categorical(&mut rng, &conditional);
        let preds = [
            conditional[symbol],
            class.xi_next(symbol)?,
            class.rho_norm_next(rank, symbol)?,
            class.rho_stat_next(rank, symbol)?,
        ];
        for (loss, p) in losses.iter_mut().zip(preds) {
            *loss -= p.max(f64::MIN_POSITIVE).ln();
        }
        class.push(symbol)?;
    }

    println!("{steps} symbols from the Markov truth\n");
    for (name, loss) in ["truth", "xi", "rho_norm", "rho_stat"].iter().zip(losses) {
        println!(
            "{name:>8}: log loss {loss:>8.3}  (regret {:+.3})",
            loss - losses[0]
        );
    }

    println!("\nfinal posterior: {:?}", class.posterior());
    println!(
        "phi shares: {:?}",
        (1..=class.measure_count())
            .map(|n| class.phi(n).map(|v| format!("{v:.4}")))
            .collect::<understudy::Result<Vec<_>>>()?
    );
    println!(
        "top set at alpha 0.2 keeps {} measures; missing mass {:.4}",
        class.top_count(0.2)?,
        class.missing_mass(0.2)?
    );
    Ok(())
}
