//! Exhaustive verification of bounds T1–T5 on tiny instances.
//!
//! For a small action/observation alphabet and a short horizon, every
//! length-`t` history can be enumerated together with its exact probability,
//! evolving the posterior along each branch. That turns the catalog's
//! expectation bounds into finite arithmetic identities: no sampling error,
//! no asymptotics — `holds` is decided up to 1e-9 slack.
//!
//! Two action laws are enumerated. Under [`ActionLaw::Imitator`] the learner
//! splits each step between its own conservative action mass and a query;
//! the posterior moves only on queried steps. Under [`ActionLaw::Demonstrator`]
//! the true model picks every action (every step counts as queried, so the
//! posterior moves each step). T4 and T5 compare the two laws after
//! stripping the query flags; both laws score the event `E` — truth among
//! the top models at every prefix — along their own branches.

use std::collections::HashMap;
use std::sync::Arc;

use crate::history::{History, HistoryStep};
use crate::imitator::imitator_distribution;
use crate::policy::{
    ActionCoupledEnvironment, Environment, FixedActionPolicy, IidEnvironment,
    LastObservationPolicy, PolicyModel,
};
use crate::posterior::{ContextSignature, WeightedModelClass};
use crate::{Error, Result};

use super::{s_alpha, t1_rhs, t2_rhs, t3_rhs, t4_rhs, t5_rhs, BoundReport, CheckMode};

/// Hard cap on enumerated histories.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Who picks actions during enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionLaw {
    /// Conservative self-action mass plus query fallback; posterior moves on
    /// queried steps only.
    Imitator,
    /// The true model picks every action; every step updates the posterior.
    Demonstrator,
}

/// A tiny instance the oracle can enumerate.
#[derive(Clone)]
pub struct ExactConfig {
    pub label: String,
    pub class: WeightedModelClass,
    pub demonstrator: Arc<dyn PolicyModel>,
    pub environment: Arc<dyn Environment>,
    /// Index of the demonstrator inside the class.
    pub truth_index: usize,
    pub alpha: f64,
    pub horizon: usize,
    /// Whether to run the T4 comparison. Requires the two `E`-conditioned
    /// stripped laws to share support: whenever sparse queries can keep the
    /// truth in the top set on a history whose all-queried twin drops it,
    /// the KL is undefined and the config must opt out.
    pub include_kl: bool,
}

/// One enumerated history.
#[derive(Clone, Debug)]
pub struct ExactEntry {
    /// Query-stripped history: one `(action, observation)` pair per step.
    pub stripped: Vec<(usize, usize)>,
    pub probability: f64,
    /// Truth among the top models at every prefix, final one included.
    pub in_event: bool,
    /// `sum_t theta_q^3` along this history (imitator law only).
    pub sum_theta_cubed: f64,
    /// Summed cubed L1 distance between self-action probabilities and the
    /// truth (imitator law only).
    pub sum_l1_cubed: f64,
}

/// The full probability table of a law over length-`horizon` histories.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub law: ActionLaw,
    pub horizon: usize,
    pub entries: Vec<ExactEntry>,
}

impl ExactDistribution {
    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// `P(E)`.
    pub fn event_probability(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.in_event)
            .map(|e| e.probability)
            .sum()
    }

    /// `E[sum_t theta_q^3]`, unconditional.
    pub fn expected_theta_cubed(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.probability * e.sum_theta_cubed)
            .sum()
    }

    /// `E[sum_t (L1 gap)^3 | E]`.
    pub fn expected_l1_cubed_given_event(&self) -> Result<f64> {
        let p_event = self.event_probability();
        if p_event <= 0.0 {
            return Err(Error::config("conditioning event has zero probability"));
        }
        let mass: f64 = self
            .entries
            .iter()
            .filter(|e| e.in_event)
            .map(|e| e.probability * e.sum_l1_cubed)
            .sum();
        Ok(mass / p_event)
    }

    /// The law of the stripped history, optionally conditioned on `E`.
    pub fn stripped_marginal(
        &self,
        condition_on_event: bool,
    ) -> Result<HashMap<Vec<(usize, usize)>, f64>> {
        let denom = if condition_on_event {
            let p = self.event_probability();
            if p <= 0.0 {
                return Err(Error::config("conditioning event has zero probability"));
            }
            p
        } else {
            1.0
        };
        let mut marginal: HashMap<Vec<(usize, usize)>, f64> = HashMap::new();
        for entry in &self.entries {
            if condition_on_event && !entry.in_event {
                continue;
            }
            *marginal.entry(entry.stripped.clone()).or_insert(0.0) += entry.probability / denom;
        }
        Ok(marginal)
    }

    /// Probability of a stripped-history event, optionally intersected with
    /// `E`.
    pub fn probability_where<F>(&self, require_event: bool, pred: F) -> f64
    where
        F: Fn(&[(usize, usize)]) -> bool,
    {
        let total: f64 = self
            .entries
            .iter()
            .filter(|e| (!require_event || e.in_event) && pred(&e.stripped))
            .map(|e| e.probability)
            .sum();
        total + 0.0 // normalize -0.0 from zero-probability branches
    }
}

fn branching(cfg: &ExactConfig, law: ActionLaw) -> u128 {
    let per_step = (cfg.class.action_count() * cfg.environment.observation_count()) as u128;
    match law {
        ActionLaw::Imitator => 2 * per_step,
        ActionLaw::Demonstrator => per_step,
    }
}

/// Enumerate every positive-probability history of `cfg` under `law`.
pub fn enumerate_distribution(cfg: &ExactConfig, law: ActionLaw) -> Result<ExactDistribution> {
    if cfg.truth_index >= cfg.class.len() {
        return Err(Error::ModelIndexOutOfRange {
            index: cfg.truth_index,
            count: cfg.class.len(),
        });
    }
    let histories = branching(cfg, law).pow(cfg.horizon as u32);
    if histories > ENUMERATION_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            histories,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut history = History::new(
        cfg.class.action_count(),
        cfg.environment.observation_count(),
    )?;
    let mut entries = Vec::new();
    let class = cfg.class.clone();
    dfs(cfg, law, class, &mut history, 1.0, true, 0.0, 0.0, &mut entries)?;
    let distribution = ExactDistribution {
        law,
        horizon: cfg.horizon,
        entries,
    };
    let total = distribution.total_probability();
    assert!(
        (total - 1.0).abs() < 1e-9,
        "enumerated branches must account for all probability, got {total}"
    );
    Ok(distribution)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    cfg: &ExactConfig,
    law: ActionLaw,
    class: WeightedModelClass,
    history: &mut History,
    probability: f64,
    event: bool,
    theta_cubed: f64,
    l1_cubed: f64,
    out: &mut Vec<ExactEntry>,
) -> Result<()> {
    let top = class.top_set(cfg.alpha)?;
    let event = event && top.contains(cfg.truth_index);
    if history.len() == cfg.horizon {
        out.push(ExactEntry {
            stripped: history.strip(),
            probability,
            in_event: event,
            sum_theta_cubed: theta_cubed,
            sum_l1_cubed: l1_cubed,
        });
        return Ok(());
    }

    let demo = cfg.demonstrator.action_distribution(history.stripped());
    match law {
        ActionLaw::Imitator => {
            let dist = imitator_distribution(&class, &top, history.stripped())?;
            let l1: f64 = dist
                .self_probs
                .iter()
                .zip(&demo)
                .map(|(s, d)| (s - d).abs())
                .sum();
            let theta_cubed = theta_cubed + dist.theta_q.powi(3);
            let l1_cubed = l1_cubed + l1.powi(3);
            for (action, &p_action) in dist.self_probs.iter().enumerate() {
                if p_action <= 0.0 {
                    continue;
                }
                descend(
                    cfg, law, &class, history, false, action,
                    probability * p_action, event, theta_cubed, l1_cubed, out,
                )?;
            }
            if dist.theta_q > 0.0 {
                for (action, &p_action) in demo.iter().enumerate() {
                    if p_action <= 0.0 {
                        continue;
                    }
                    let mut updated = class.clone();
                    updated.bayes_update(history.stripped(), action)?;
                    descend(
                        cfg, law, &updated, history, true, action,
                        probability * dist.theta_q * p_action, event, theta_cubed, l1_cubed, out,
                    )?;
                }
            }
        }
        ActionLaw::Demonstrator => {
            for (action, &p_action) in demo.iter().enumerate() {
                if p_action <= 0.0 {
                    continue;
                }
                let mut updated = class.clone();
                updated.bayes_update(history.stripped(), action)?;
                descend(
                    cfg, law, &updated, history, true, action,
                    probability * p_action, event, 0.0, 0.0, out,
                )?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn descend(
    cfg: &ExactConfig,
    law: ActionLaw,
    class: &WeightedModelClass,
    history: &mut History,
    queried: bool,
    action: usize,
    probability: f64,
    event: bool,
    theta_cubed: f64,
    l1_cubed: f64,
    out: &mut Vec<ExactEntry>,
) -> Result<()> {
    let observations = cfg
        .environment
        .observation_distribution(history.stripped(), action);
    let depth = history.len();
    for (observation, &p_obs) in observations.iter().enumerate() {
        if p_obs <= 0.0 {
            continue;
        }
        history.push(HistoryStep {
            queried,
            action,
            observation,
        })?;
        dfs(
            cfg, law, class.clone(), history,
            probability * p_obs, event, theta_cubed, l1_cubed, out,
        )?;
        history.truncate(depth);
    }
    Ok(())
}

/// KL divergence between two stripped-history laws (maps from stripped
/// history to probability), in nats. Errs when the reference law `q` misses
/// mass that `p` carries.
pub fn exact_kl(
    p: &HashMap<Vec<(usize, usize)>, f64>,
    q: &HashMap<Vec<(usize, usize)>, f64>,
) -> Result<f64> {
    let mut kl = 0.0;
    for (history, &pv) in p {
        if pv <= 0.0 {
            continue;
        }
        match q.get(history) {
            Some(&qv) if qv > 0.0 => kl += pv * (pv / qv).ln(),
            _ => return Err(Error::AbsoluteContinuityViolation),
        }
    }
    Ok(kl)
}

/// Numerical slack the exact suite allows on either side of a bound.
pub const DEFAULT_EXACT_SLACK: f64 = 1e-9;

/// Run the exact T1–T5 suite on one config, allowing `slack` of floating
/// point error on each comparison. T4 is emitted only when the config opts
/// in (see [`ExactConfig::include_kl`]); T5 sweeps every singleton stripped
/// history plus two cylinder events and reports the worst-slack case.
pub fn run_exact_checks(cfg: &ExactConfig, slack: f64) -> Result<Vec<BoundReport>> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::config(format!(
            "exact-suite slack must be a finite nonnegative number, got {slack}"
        )));
    }
    let w = cfg.class.prior_of(cfg.truth_index)?;
    let actions = cfg.class.action_count();
    let s = s_alpha(actions, cfg.alpha, w);
    let im = enumerate_distribution(cfg, ActionLaw::Imitator)?;
    let de = enumerate_distribution(cfg, ActionLaw::Demonstrator)?;
    let mut reports = Vec::new();

    let lhs = im.expected_theta_cubed();
    let rhs = t1_rhs(actions, cfg.alpha, w);
    reports.push(BoundReport {
        check: "theorem1".into(),
        mode: CheckMode::Exact,
        lhs,
        stderr: None,
        rhs,
        holds: lhs <= rhs + slack,
        note: cfg.label.clone(),
    });

    let lhs = im.event_probability();
    let rhs = t2_rhs(cfg.alpha, w);
    reports.push(BoundReport {
        check: "theorem2".into(),
        mode: CheckMode::Exact,
        lhs,
        stderr: None,
        rhs,
        holds: lhs >= rhs - slack,
        note: cfg.label.clone(),
    });

    let lhs = im.expected_l1_cubed_given_event()?;
    let rhs = t3_rhs(actions, cfg.alpha, w);
    reports.push(BoundReport {
        check: "theorem3".into(),
        mode: CheckMode::Exact,
        lhs,
        stderr: None,
        rhs,
        holds: lhs <= rhs + slack,
        note: cfg.label.clone(),
    });

    if cfg.include_kl {
        let p = im.stripped_marginal(true)?;
        let q = de.stripped_marginal(true)?;
        let lhs = exact_kl(&p, &q)?;
        let rhs = t4_rhs(actions, cfg.alpha, w, cfg.horizon);
        reports.push(BoundReport {
            check: "theorem4".into(),
            mode: CheckMode::Exact,
            lhs,
            stderr: None,
            rhs,
            holds: lhs <= rhs + slack,
            note: cfg.label.clone(),
        });
    }

    // T5: bad events are concrete stripped-history sets. Sweep all
    // singletons in the demonstrator law's support, plus "action 0 on every
    // step" and "action 0 on some step", and keep the tightest case.
    let demo_marginal = de.stripped_marginal(false)?;
    let mut checked = 0usize;
    let mut worst: Option<(f64, f64, f64)> = None; // (lhs - rhs, lhs, rhs)
    let mut all_hold = true;
    {
        let mut consider = |lhs: f64, p_b: f64| {
            let (rhs, _) = t5_rhs(s, cfg.horizon, p_b);
            checked += 1;
            if lhs > rhs + slack {
                all_hold = false;
            }
            let gap = lhs - rhs;
            if worst.map_or(true, |(g, _, _)| gap > g) {
                worst = Some((gap, lhs, rhs));
            }
        };
        for (stripped, &p_b) in &demo_marginal {
            let lhs = im.probability_where(true, |h| h == stripped.as_slice());
            consider(lhs, p_b);
        }
        let all_zero = |h: &[(usize, usize)]| h.iter().all(|&(a, _)| a == 0);
        let some_zero = |h: &[(usize, usize)]| h.iter().any(|&(a, _)| a == 0);
        consider(
            im.probability_where(true, all_zero),
            de.probability_where(false, all_zero),
        );
        consider(
            im.probability_where(true, some_zero),
            de.probability_where(false, some_zero),
        );
        // Histories the truth cannot produce must carry no event mass at
        // all: p_B = 0 forces the bound to 0.
        consider(
            im.probability_where(true, |h| !demo_marginal.contains_key(h)),
            0.0,
        );
    }
    let (_, lhs, rhs) = worst.expect("at least one bad event is always checked");
    reports.push(BoundReport {
        check: "theorem5".into(),
        mode: CheckMode::Exact,
        lhs,
        stderr: None,
        rhs,
        holds: all_hold,
        note: format!("{}; worst of {checked} bad events", cfg.label),
    });

    Ok(reports)
}

/// The standard tiny-instance suite.
///
/// Three configs support the full T1–T5 set: their `alpha` sits below the
/// worst-case posterior share the truth can reach within the horizon, so the
/// truth never leaves the top set under either action law and the T4
/// support precondition holds by construction. The other two make the event
/// nontrivial — one pins the exact `P(E) >= 0.9` margin, one makes T5 sharp
/// (an event of demonstrator-law probability 1e-120 whose bound is about
/// 0.37) — and opt out of T4, where sparse querying could keep alive
/// histories whose all-queried twins leave the event.
pub fn standard_exact_configs() -> Result<Vec<ExactConfig>> {
    let mut configs = Vec::new();

    // Two models, one observation, sure event: worst-case truth share after
    // 8 steps is (3/7)^8 / (1 + (3/7)^8), about 1.1e-3, far above alpha.
    configs.push(ExactConfig {
        label: "pair-sure".into(),
        class: WeightedModelClass::dense(
            vec![
                Arc::new(FixedActionPolicy::new(vec![0.7, 0.3])?),
                Arc::new(FixedActionPolicy::new(vec![0.3, 0.7])?),
            ],
            None,
            ContextSignature::Free,
        )?,
        demonstrator: Arc::new(FixedActionPolicy::new(vec![0.7, 0.3])?),
        environment: Arc::new(IidEnvironment::new(vec![1.0])?),
        truth_index: 0,
        alpha: 1e-4,
        horizon: 8,
        include_kl: true,
    });

    // Three models, two observations, an action-coupled environment and a
    // context-sensitive model; prior (0.5, 0.25, 0.25) with the truth at
    // index 1. Worst-case share over 6 steps is about 4e-5 > alpha.
    configs.push(ExactConfig {
        label: "trio-context".into(),
        class: WeightedModelClass::dense(
            vec![
                Arc::new(FixedActionPolicy::new(vec![0.8, 0.2])?),
                Arc::new(FixedActionPolicy::new(vec![0.3, 0.7])?),
                Arc::new(LastObservationPolicy::new(
                    vec![0.5, 0.5],
                    vec![vec![0.9, 0.1], vec![0.1, 0.9]],
                )?),
            ],
            Some(vec![0.5, 0.25, 0.25]),
            ContextSignature::LastObservation,
        )?,
        demonstrator: Arc::new(FixedActionPolicy::new(vec![0.3, 0.7])?),
        environment: Arc::new(ActionCoupledEnvironment::new(vec![
            vec![0.7, 0.3],
            vec![0.2, 0.8],
        ])?),
        truth_index: 1,
        alpha: 1e-5,
        horizon: 6,
        include_kl: true,
    });

    // Four models, one observation, longer horizon, sure event: worst-case
    // share over 7 steps is about 5.5e-4 > alpha.
    configs.push(ExactConfig {
        label: "quartet-sure".into(),
        class: WeightedModelClass::dense(
            vec![
                Arc::new(FixedActionPolicy::new(vec![0.7, 0.3])?),
                Arc::new(FixedActionPolicy::new(vec![0.5, 0.5])?),
                Arc::new(FixedActionPolicy::new(vec![0.4, 0.6])?),
                Arc::new(FixedActionPolicy::new(vec![0.25, 0.75])?),
            ],
            None,
            ContextSignature::Free,
        )?,
        demonstrator: Arc::new(FixedActionPolicy::new(vec![0.7, 0.3])?),
        environment: Arc::new(IidEnvironment::new(vec![1.0])?),
        truth_index: 0,
        alpha: 1e-4,
        horizon: 7,
        include_kl: true,
    });

    // Four models, nontrivial event: alpha/w = 0.1, so P(E) >= 0.9 with the
    // event genuinely below 1 (four straight queried high-likelihood-ratio
    // actions push the truth's share under alpha).
    configs.push(ExactConfig {
        label: "quartet-margin".into(),
        class: WeightedModelClass::dense(
            vec![
                Arc::new(FixedActionPolicy::new(vec![0.6, 0.4])?),
                Arc::new(FixedActionPolicy::new(vec![0.05, 0.95])?),
                Arc::new(FixedActionPolicy::new(vec![0.5, 0.5])?),
                Arc::new(FixedActionPolicy::new(vec![0.3, 0.7])?),
            ],
            None,
            ContextSignature::Free,
        )?,
        demonstrator: Arc::new(FixedActionPolicy::new(vec![0.6, 0.4])?),
        environment: Arc::new(IidEnvironment::new(vec![0.5, 0.5])?),
        truth_index: 0,
        alpha: 0.025,
        horizon: 6,
        include_kl: false,
    });

    // Pair with an almost-forbidden action: the all-action-0 cylinder has
    // demonstrator-law probability 1e-120, making T5's bound sharp.
    configs.push(ExactConfig {
        label: "pair-rare-event".into(),
        class: WeightedModelClass::dense(
            vec![
                Arc::new(FixedActionPolicy::new(vec![1e-15, 1.0 - 1e-15])?),
                Arc::new(FixedActionPolicy::new(vec![0.5, 0.5])?),
            ],
            None,
            ContextSignature::Free,
        )?,
        demonstrator: Arc::new(FixedActionPolicy::new(vec![1e-15, 1.0 - 1e-15])?),
        environment: Arc::new(IidEnvironment::new(vec![1.0])?),
        truth_index: 0,
        alpha: 0.1,
        horizon: 8,
        include_kl: false,
    });

    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton_config() -> ExactConfig {
        ExactConfig {
            label: "singleton".into(),
            class: WeightedModelClass::dense(
                vec![Arc::new(FixedActionPolicy::new(vec![0.4, 0.6]).unwrap())],
                None,
                ContextSignature::Free,
            )
            .unwrap(),
            demonstrator: Arc::new(FixedActionPolicy::new(vec![0.4, 0.6]).unwrap()),
            environment: Arc::new(IidEnvironment::new(vec![0.5, 0.5]).unwrap()),
            truth_index: 0,
            alpha: 0.5,
            horizon: 3,
            include_kl: true,
        }
    }

    #[test]
    fn singleton_class_never_queries_and_matches_the_demonstrator() {
        let cfg = singleton_config();
        let im = enumerate_distribution(&cfg, ActionLaw::Imitator).unwrap();
        let de = enumerate_distribution(&cfg, ActionLaw::Demonstrator).unwrap();
        assert!((im.total_probability() - 1.0).abs() < 1e-12);
        assert!((im.event_probability() - 1.0).abs() < 1e-12);
        assert!(im.expected_theta_cubed().abs() < 1e-12);
        // The two laws agree exactly, so the KL vanishes.
        let p = im.stripped_marginal(true).unwrap();
        let q = de.stripped_marginal(true).unwrap();
        assert!(exact_kl(&p, &q).unwrap().abs() < 1e-12);
        // And the whole suite holds.
        for report in run_exact_checks(&cfg, DEFAULT_EXACT_SLACK).unwrap() {
            assert!(report.holds, "{} failed: {}", report.check, report.csv_row());
        }
    }

    #[test]
    fn enumeration_probabilities_match_hand_chain_rule() {
        // Two models (0.7,0.3) / (0.3,0.7), uniform prior, one observation,
        // horizon 1, alpha = 0.2: mins are (0.3, 0.3), theta = 0.4. The
        // stripped law of the first action is 0.3 + 0.4*0.7 = 0.58 on action
        // 0 and 0.3 + 0.4*0.3 = 0.42 on action 1.
        let mut cfg = standard_exact_configs().unwrap().remove(0);
        cfg.alpha = 0.2;
        cfg.horizon = 1;
        let im = enumerate_distribution(&cfg, ActionLaw::Imitator).unwrap();
        let marginal = im.stripped_marginal(false).unwrap();
        assert!((marginal[&vec![(0, 0)]] - 0.58).abs() < 1e-12);
        assert!((marginal[&vec![(1, 0)]] - 0.42).abs() < 1e-12);
        // Demonstrator law is just the truth's action distribution.
        let de = enumerate_distribution(&cfg, ActionLaw::Demonstrator).unwrap();
        let marginal = de.stripped_marginal(false).unwrap();
        assert!((marginal[&vec![(0, 0)]] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn kl_matches_closed_form_and_detects_missing_support() {
        let p: HashMap<_, _> = vec![(vec![(0, 0)], 0.5), (vec![(1, 0)], 0.5)]
            .into_iter()
            .collect();
        let q: HashMap<_, _> = vec![(vec![(0, 0)], 0.25), (vec![(1, 0)], 0.75)]
            .into_iter()
            .collect();
        // 0.5 ln 2 + 0.5 ln(2/3) = 0.143841...
        let kl = exact_kl(&p, &q).unwrap();
        assert!((kl - 0.143841).abs() < 1e-6);
        let narrow: HashMap<_, _> = vec![(vec![(0, 0)], 1.0)].into_iter().collect();
        assert!(matches!(
            exact_kl(&p, &narrow),
            Err(Error::AbsoluteContinuityViolation)
        ));
    }

    #[test]
    fn oversized_horizons_are_rejected_up_front() {
        let mut cfg = singleton_config();
        cfg.horizon = 40;
        assert!(matches!(
            enumerate_distribution(&cfg, ActionLaw::Imitator),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn event_conditioning_requires_positive_mass() {
        let dist = ExactDistribution {
            law: ActionLaw::Imitator,
            horizon: 1,
            entries: vec![ExactEntry {
                stripped: vec![(0, 0)],
                probability: 1.0,
                in_event: false,
                sum_theta_cubed: 0.0,
                sum_l1_cubed: 0.0,
            }],
        };
        assert!(dist.stripped_marginal(true).is_err());
        assert!(dist.expected_l1_cubed_given_event().is_err());
    }
}
