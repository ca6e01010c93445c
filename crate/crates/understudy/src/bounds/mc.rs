//! Monte Carlo estimates of the catalog's left-hand sides.
//!
//! Each check simulates many independent episodes (or sequences), computes
//! the per-run statistic the bound constrains, and tests the inequality with
//! a three-standard-error margin — an upper bound passes when
//! `mean - 3se <= rhs`, a probability lower bound passes when the Wilson
//! interval at `z = 3` cannot rule the bound's value in.
//!
//! Runs are reproducible: run `r` draws from a fixed-seed generator on its
//! own stream, so results are independent of scheduling and rerun-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::imitator::{run_episode, EpisodeOptions, TruthTrack};
use crate::math::{ratio_stats, sample_stats, wilson_interval};
use crate::policy::{Environment, PolicyModel};
use crate::posterior::WeightedModelClass;
use crate::smap::{
    mc_missing_mass_sq, mc_norm_gap, mc_stat_sq_error, mc_top_min_sq_error, MeasureClass,
    SequenceMcConfig,
};
use crate::{Error, Result};

use super::{l1_rhs, t1_rhs, t2_rhs, t3_rhs, t6i_rhs, t6ii_rhs, t7_rhs, BoundReport, CheckMode};

/// Margin multiplier for every statistical verdict.
pub const MARGIN_Z: f64 = 3.0;

/// Shared knobs for the episode-based checks.
#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub runs: usize,
    pub steps: usize,
    pub alpha: f64,
    pub base_seed: u64,
}

/// One imitation scenario to simulate.
pub struct McScenario<'a> {
    pub label: &'a str,
    pub class: &'a WeightedModelClass,
    pub demonstrator: &'a dyn PolicyModel,
    pub environment: &'a dyn Environment,
    pub truth_index: usize,
}

fn episode_tracks(scenario: &McScenario<'_>, cfg: &McConfig) -> Result<Vec<TruthTrack>> {
    if cfg.runs < 2 {
        return Err(Error::config("statistical checks need at least two runs"));
    }
    let opts = EpisodeOptions {
        steps: cfg.steps,
        alpha: cfg.alpha,
        truth_index: Some(scenario.truth_index),
    };
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.base_seed);
            rng.set_stream(run as u64);
            let mut class = scenario.class.clone();
            let record = run_episode(
                &mut class,
                scenario.demonstrator,
                scenario.environment,
                &opts,
                &mut rng,
            )?;
            Ok(record.truth.expect("truth tracking was requested"))
        })
        .collect()
}

/// Simulate one scenario and report the T1, T2, and T3 checks from the same
/// batch of episodes.
pub fn mc_imitation_checks(
    scenario: &McScenario<'_>,
    cfg: &McConfig,
) -> Result<Vec<BoundReport>> {
    let w = scenario.class.prior_of(scenario.truth_index)?;
    let actions = scenario.class.action_count();
    let tracks = episode_tracks(scenario, cfg)?;
    let note = format!("{}; {} runs x {} steps", scenario.label, cfg.runs, cfg.steps);

    let theta: Vec<f64> = tracks.iter().map(|t| t.sum_theta_cubed).collect();
    let (mean, _, se) = sample_stats(&theta);
    let rhs = t1_rhs(actions, cfg.alpha, w);
    let mut reports = vec![BoundReport {
        check: "theorem1".into(),
        mode: CheckMode::Statistical,
        lhs: mean,
        stderr: Some(se),
        rhs,
        holds: mean - MARGIN_Z * se <= rhs,
        note: note.clone(),
    }];

    let held = tracks.iter().filter(|t| t.event_held).count() as u64;
    let (_, wilson_hi) = wilson_interval(held, cfg.runs as u64, MARGIN_Z);
    let p_hat = held as f64 / cfg.runs as f64;
    let rhs = t2_rhs(cfg.alpha, w);
    reports.push(BoundReport {
        check: "theorem2".into(),
        mode: CheckMode::Statistical,
        lhs: p_hat,
        stderr: Some((p_hat * (1.0 - p_hat) / cfg.runs as f64).sqrt()),
        rhs,
        holds: wilson_hi >= rhs,
        note: note.clone(),
    });

    let gated: Vec<f64> = tracks
        .iter()
        .map(|t| if t.event_held { t.sum_l1_cubed } else { 0.0 })
        .collect();
    let indicators: Vec<f64> = tracks
        .iter()
        .map(|t| if t.event_held { 1.0 } else { 0.0 })
        .collect();
    let (ratio, se) = ratio_stats(&gated, &indicators)
        .ok_or_else(|| Error::config("conditioning event never occurred in simulation"))?;
    let rhs = t3_rhs(actions, cfg.alpha, w);
    reports.push(BoundReport {
        check: "theorem3".into(),
        mode: CheckMode::Statistical,
        lhs: ratio,
        stderr: Some(se),
        rhs,
        holds: ratio - MARGIN_Z * se <= rhs,
        note,
    });

    Ok(reports)
}

/// Simulate one sequence-prediction scenario and report the T6(i), T6(ii),
/// T7, and L1 checks.
pub fn mc_sequence_checks(
    class: &MeasureClass,
    truth: usize,
    alpha: f64,
    rank: usize,
    cfg: &SequenceMcConfig,
    label: &str,
) -> Result<Vec<BoundReport>> {
    let w = class.prior_of(truth)?;
    let note = format!("{label}; {} runs x {} steps", cfg.runs, cfg.steps);
    let mut reports = Vec::new();

    let stats = mc_top_min_sq_error(class, truth, alpha, cfg)?;
    let rhs = t6i_rhs(alpha, w);
    reports.push(BoundReport {
        check: "theorem6i".into(),
        mode: CheckMode::Statistical,
        lhs: stats.mean,
        stderr: Some(stats.stderr),
        rhs,
        holds: stats.mean - MARGIN_Z * stats.stderr <= rhs,
        note: note.clone(),
    });

    let stats = mc_missing_mass_sq(class, truth, alpha, cfg)?;
    let rhs = t6ii_rhs(class.alphabet_size(), alpha, w);
    reports.push(BoundReport {
        check: "theorem6ii".into(),
        mode: CheckMode::Statistical,
        lhs: stats.mean,
        stderr: Some(stats.stderr),
        rhs,
        holds: stats.mean - MARGIN_Z * stats.stderr <= rhs,
        note: note.clone(),
    });

    let stats = mc_stat_sq_error(class, truth, rank, cfg)?;
    let rhs = t7_rhs(w);
    reports.push(BoundReport {
        check: "theorem7".into(),
        mode: CheckMode::Statistical,
        lhs: stats.mean,
        stderr: Some(stats.stderr),
        rhs,
        holds: stats.mean - MARGIN_Z * stats.stderr <= rhs,
        note: note.clone(),
    });

    let stats = mc_norm_gap(class, truth, rank, cfg)?;
    let rhs = l1_rhs(w);
    let above_zero = stats.mean + MARGIN_Z * stats.stderr >= -1e-12;
    let below_cap = stats.mean - MARGIN_Z * stats.stderr <= rhs;
    reports.push(BoundReport {
        check: "lemma1".into(),
        mode: CheckMode::Statistical,
        lhs: stats.mean,
        stderr: Some(stats.stderr),
        rhs,
        holds: above_zero && below_cap,
        note: format!("{note}; two-sided with lower end 0"),
    });

    Ok(reports)
}
