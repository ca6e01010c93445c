//! Statistical verification at scales enumeration cannot reach.
//!
//! Longer horizons make the exact law astronomically large, but every bound
//! is a statement about an expectation or a probability, so sample means
//! over independent seeded episodes estimate the left-hand sides. A check
//! passes when the estimate stays below the bound by at least three standard
//! errors of margin (and for the high-probability statement T2, above it).
//!
//! Two suites run here: the imitation bounds (T1-T3) on a synthetic
//! class/demonstrator pair, and the sequence-prediction bounds (T6i, T6ii,
//! T7, L1) on a class of iid measures.
//!
//! Run with `cargo run --release --example monte_carlo_bounds`.

use std::sync::Arc;

use understudy::bounds::mc::{
    mc_imitation_checks, mc_sequence_checks, McConfig, McScenario,
};
use understudy::policy::{FixedActionPolicy, IidEnvironment};
use understudy::smap::{IidCategorical, Measure, MeasureClass, SequenceMcConfig};
use understudy::{ContextSignature, PolicyModel, WeightedModelClass};

fn main() -> understudy::Result<()> {
    // --- imitation bounds on a three-model class ---------------------------
    let rows = [
        vec![0.6, 0.3, 0.1],
        vec![0.2, 0.5, 0.3],
        vec![0.1, 0.2, 0.7],
    ];
    let models: Vec<Arc<dyn PolicyModel>> = rows
        .iter()
        .map(|row| {
            FixedActionPolicy::new(row.clone()).map(|p| Arc::new(p) as Arc<dyn PolicyModel>)
        })
        .collect::<understudy::Result<_>>()?;
    let class = WeightedModelClass::dense(models, None, ContextSignature::Free)?;
    let demonstrator = FixedActionPolicy::new(rows[0].clone())?;
    let environment = IidEnvironment::new(vec![0.5, 0.5])?;

    let scenario = McScenario {
        label: "three-fixed-rows",
        class: &class,
        demonstrator: &demonstrator,
        environment: &environment,
        truth_index: 0,
    };
    let config = McConfig {
        runs: 800,
        steps: 64,
        alpha: 0.05,
        base_seed: 42,
    };

    println!("imitation bounds ({} runs of {} steps):", config.runs, config.steps);
    for report in mc_imitation_checks(&scenario, &config)? {
        print_report(&report);
    }

    // --- sequence bounds on an iid class ------------------------------------
    let measures: Vec<Arc<dyn Measure>> = vec![
        Arc::new(IidCategorical::new(vec![0.6, 0.3, 0.1])?),
        Arc::new(IidCategorical::new(vec![0.3, 0.4, 0.3])?),
        Arc::new(IidCategorical::new(vec![0.1, 0.3, 0.6])?),
    ];
    let class = MeasureClass::new(measures, None)?;
    let config = SequenceMcConfig {
        runs: 800,
        steps: 64,
        base_seed: 43,
    };

    println!("\nsequence bounds ({} streams of {} symbols):", config.runs, config.steps);
    for report in mc_sequence_checks(&class, 0, 0.3, 2, &config, "three-iid")? {
        print_report(&report);
    }
    Ok(())
}

fn print_report(report: &understudy::bounds::BoundReport) {
    println!(
        "  {:<10} lhs={:>11.4e} (stderr {:>9.3e}) rhs={:>11.4e}  {}",
        report.check,
        report.lhs,
        report.stderr.unwrap_or(0.0),
        report.rhs,
        if report.holds { "holds" } else { "VIOLATED" }
    );
}
