//! The conservative imitation rule and the interaction loop.
//!
//! Given the current top set, the imitator's own (unqueried) probability for
//! action `a` is the minimum probability any included model assigns to it:
//!
//! ```text
//! pi(0, a | h) = min_{model in top set} model(a | h)
//! ```
//!
//! Whatever mass is left over becomes the query probability
//! `theta_q = 1 - sum_a pi(0, a | h)`; on a query the demonstrator picks the
//! action. Acting on minima is what makes the imitator conservative: as long
//! as the demonstrator's model is in the top set, the imitator never gives
//! any action more self-probability than the demonstrator would.

use std::collections::HashMap;

use rand::Rng;

use crate::history::{History, HistoryStep, Stripped};
use crate::policy::{sample_categorical, validate_distribution, Environment, PolicyModel};
use crate::posterior::{TopSet, WeightedModelClass};
use crate::{Error, Result};

/// Slightly negative leftover mass (from summing minima of normalized
/// distributions) is clamped to zero up to this tolerance; anything more
/// negative is reported as an invalid distribution.
pub const THETA_CLAMP_TOLERANCE: f64 = 1e-15;

/// The imitator's split of one step's probability mass: per-action
/// self-probabilities plus the query mass.
#[derive(Clone, Debug)]
pub struct ActionDistribution {
    /// `pi(0, a | h)`: probability of acting `a` without help.
    pub self_probs: Vec<f64>,
    /// `theta_q`: probability of querying the demonstrator.
    pub theta_q: f64,
}

impl ActionDistribution {
    /// Build from per-action minima over the top set.
    pub fn from_minima(minima: Vec<f64>) -> Result<Self> {
        let mass: f64 = minima.iter().sum();
        let theta = 1.0 - mass;
        if theta < -THETA_CLAMP_TOLERANCE {
            return Err(Error::NotADistribution { sum: mass });
        }
        Ok(ActionDistribution {
            self_probs: minima,
            theta_q: theta.max(0.0),
        })
    }

    /// Self mass plus query mass; 1 up to the clamp tolerance.
    pub fn total_mass(&self) -> f64 {
        self.self_probs.iter().sum::<f64>() + self.theta_q
    }
}

/// The imitator's action distribution in the current context.
///
/// `top` must have been built from `class` at its current version.
pub fn imitator_distribution(
    class: &WeightedModelClass,
    top: &TopSet,
    history: Stripped<'_>,
) -> Result<ActionDistribution> {
    ActionDistribution::from_minima(class.min_over_top(top, history)?)
}

/// What one sampled step decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub queried: bool,
    pub action: usize,
}

/// Sample one step: a single uniform draw walks the cumulative vector
/// `[self_probs ..., theta_q]`; if it lands in the query bucket, a second
/// draw picks the demonstrator's action from `demonstrator_probs`.
pub fn sample_step<R: Rng + ?Sized>(
    dist: &ActionDistribution,
    demonstrator_probs: &[f64],
    rng: &mut R,
) -> Result<StepOutcome> {
    validate_distribution(demonstrator_probs)?;
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = None;
    for (action, &p) in dist.self_probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = Some(action);
            cum += p;
            if u < cum {
                return Ok(StepOutcome { queried: false, action });
            }
        }
    }
    if dist.theta_q > 0.0 {
        return Ok(StepOutcome {
            queried: true,
            action: sample_categorical(rng, demonstrator_probs),
        });
    }
    // theta_q = 0 and u fell into the floating-point tail beyond the
    // cumulative self mass: attribute it to the last possible action.
    match last_positive {
        Some(action) => Ok(StepOutcome { queried: false, action }),
        None => Err(Error::NotADistribution { sum: 0.0 }),
    }
}

/// Controls for [`run_episode`].
#[derive(Clone, Debug)]
pub struct EpisodeOptions {
    pub steps: usize,
    /// Top-set confidence (the query/act trade-off knob).
    pub alpha: f64,
    /// Index of the demonstrator's model inside the class, when known.
    /// Enables truth tracking: top-set membership, predictive distance, and
    /// the conservatism audit.
    pub truth_index: Option<usize>,
}

/// Statistics accumulated against the known true model.
#[derive(Clone, Debug, Default)]
pub struct TruthTrack {
    /// True iff the truth's index was in the top set after every prefix,
    /// including the final posterior.
    pub event_held: bool,
    /// Sum over steps of `theta_q^3`.
    pub sum_theta_cubed: f64,
    /// Sum over steps of the cubed L1 distance between the imitator's
    /// self-probabilities and the demonstrator's distribution.
    pub sum_l1_cubed: f64,
    /// Steps where the truth was in the top set yet some self-probability
    /// exceeded the truth's probability. Must be zero; counted, not assumed.
    pub conservatism_violations: u64,
}

/// Everything an interaction run produces.
#[derive(Clone, Debug)]
pub struct EpisodeRecord {
    pub history: History,
    /// `theta_q` for every step, in order.
    pub theta_trace: Vec<f64>,
    pub queries: u64,
    /// Present when [`EpisodeOptions::truth_index`] was set.
    pub truth: Option<TruthTrack>,
}

impl EpisodeRecord {
    /// Query flags as a bit row (the "query record" artifact).
    pub fn query_record(&self) -> Vec<bool> {
        self.history.steps().iter().map(|s| s.queried).collect()
    }
}

/// Per-version cache: the top set plus memoized action distributions keyed by
/// the class's context key. Rebuilt whenever the posterior version moves.
struct StepCache {
    version: Option<u64>,
    top: Option<TopSet>,
    truth_included: bool,
    memo: HashMap<u64, ActionDistribution>,
}

impl StepCache {
    fn new() -> Self {
        StepCache {
            version: None,
            top: None,
            truth_included: true,
            memo: HashMap::new(),
        }
    }

    fn refresh(
        &mut self,
        class: &WeightedModelClass,
        alpha: f64,
        truth_index: Option<usize>,
    ) -> Result<()> {
        if self.version == Some(class.version()) {
            return Ok(());
        }
        let top = class.top_set(alpha)?;
        self.truth_included = truth_index.map_or(true, |i| top.contains(i));
        self.top = Some(top);
        self.version = Some(class.version());
        self.memo.clear();
        Ok(())
    }

    fn distribution(
        &mut self,
        class: &WeightedModelClass,
        history: Stripped<'_>,
    ) -> Result<ActionDistribution> {
        let top = self.top.as_ref().expect("refresh precedes distribution");
        match class.context_key(history) {
            Some(key) => {
                if let Some(dist) = self.memo.get(&key) {
                    return Ok(dist.clone());
                }
                let dist = imitator_distribution(class, top, history)?;
                self.memo.insert(key, dist.clone());
                Ok(dist)
            }
            None => imitator_distribution(class, top, history),
        }
    }
}

/// Run the full interaction loop for `opts.steps` steps.
///
/// Per step: refresh the top set if the posterior moved, look up or compute
/// the imitator's distribution, sample act-vs-query, update the posterior on
/// queried steps (with the history *before* the step), then sample the
/// observation and extend the history.
pub fn run_episode<R: Rng + ?Sized>(
    class: &mut WeightedModelClass,
    demonstrator: &dyn PolicyModel,
    environment: &dyn Environment,
    opts: &EpisodeOptions,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    if demonstrator.action_count() != class.action_count() {
        return Err(Error::config(
            "demonstrator and class must share one action alphabet",
        ));
    }
    if let Some(truth) = opts.truth_index {
        if truth >= class.len() {
            return Err(Error::ModelIndexOutOfRange {
                index: truth,
                count: class.len(),
            });
        }
    }

    let mut history = History::new(class.action_count(), environment.observation_count())?;
    let mut cache = StepCache::new();
    let mut theta_trace = Vec::with_capacity(opts.steps);
    let mut queries = 0u64;
    let mut truth_track = opts.truth_index.map(|_| TruthTrack {
        event_held: true,
        ..TruthTrack::default()
    });

    for _ in 0..opts.steps {
        cache.refresh(class, opts.alpha, opts.truth_index)?;

        let (outcome, theta) = {
            let stripped = history.stripped();
            let dist = cache.distribution(class, stripped)?;
            let demo_probs = demonstrator.action_distribution(stripped);

            if let Some(track) = truth_track.as_mut() {
                track.event_held &= cache.truth_included;
                track.sum_theta_cubed += dist.theta_q.powi(3);
                let l1: f64 = dist
                    .self_probs
                    .iter()
                    .zip(&demo_probs)
                    .map(|(s, d)| (s - d).abs())
                    .sum();
                track.sum_l1_cubed += l1.powi(3);
                if cache.truth_included
                    && dist.self_probs.iter().zip(&demo_probs).any(|(s, d)| s > d)
                {
                    track.conservatism_violations += 1;
                }
            }

            let outcome = sample_step(&dist, &demo_probs, rng)?;
            if outcome.queried {
                class.bayes_update(stripped, outcome.action)?;
                queries += 1;
            }
            (outcome, dist.theta_q)
        };

        let obs_probs = {
            let stripped = history.stripped();
            environment.observation_distribution(stripped, outcome.action)
        };
        validate_distribution(&obs_probs)?;
        let observation = sample_categorical(rng, &obs_probs);

        theta_trace.push(theta);
        history.push(HistoryStep {
            queried: outcome.queried,
            action: outcome.action,
            observation,
        })?;
    }

    // The event also covers the posterior left behind by the final step.
    if let Some(track) = truth_track.as_mut() {
        cache.refresh(class, opts.alpha, opts.truth_index)?;
        track.event_held &= cache.truth_included;
    }

    Ok(EpisodeRecord {
        history,
        theta_trace,
        queries,
        truth: truth_track,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{FixedActionPolicy, IidEnvironment};
    use crate::posterior::ContextSignature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn two_model_class() -> WeightedModelClass {
        let models: Vec<Arc<dyn PolicyModel>> = vec![
            Arc::new(FixedActionPolicy::new(vec![0.7, 0.3]).unwrap()),
            Arc::new(FixedActionPolicy::new(vec![0.6, 0.4]).unwrap()),
        ];
        WeightedModelClass::dense(models, None, ContextSignature::Free).unwrap()
    }

    #[test]
    fn distribution_is_minimum_plus_leftover() {
        // Frozen oracle: minima of (0.7, 0.3) and (0.6, 0.4) are (0.6, 0.3),
        // so the query mass is 0.1.
        let class = two_model_class();
        let h = History::new(2, 1).unwrap();
        let top = class.top_set(0.4).unwrap();
        let dist = imitator_distribution(&class, &top, h.stripped()).unwrap();
        assert!((dist.self_probs[0] - 0.6).abs() < 1e-15);
        assert!((dist.self_probs[1] - 0.3).abs() < 1e-15);
        assert!((dist.theta_q - 0.1).abs() < 1e-15);
        assert!((dist.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_top_set_mimics_the_leader() {
        let class = two_model_class();
        let h = History::new(2, 1).unwrap();
        let top = class.top_set(1.0).unwrap();
        assert_eq!(top.included().len(), 1);
        let dist = imitator_distribution(&class, &top, h.stripped()).unwrap();
        assert_eq!(dist.self_probs, vec![0.7, 0.3]);
        assert_eq!(dist.theta_q, 0.0);
    }

    #[test]
    fn from_minima_clamps_tiny_negatives_and_rejects_real_ones() {
        let d = ActionDistribution::from_minima(vec![0.5, 0.5 + 2e-16]).unwrap();
        assert_eq!(d.theta_q, 0.0);
        assert!(matches!(
            ActionDistribution::from_minima(vec![0.6, 0.6]),
            Err(Error::NotADistribution { .. })
        ));
    }

    #[test]
    fn sample_step_marginals_match_composition() {
        // Frozen oracle: with self = (0.6, 0.3), theta = 0.1 and demonstrator
        // (0.7, 0.3), the marginal of action 0 is 0.6 + 0.1*0.7 = 0.67 and
        // the query rate is 0.1. One million draws, 3-sigma tolerances.
        let dist = ActionDistribution {
            self_probs: vec![0.6, 0.3],
            theta_q: 0.1,
        };
        let demo = [0.7, 0.3];
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 1_000_000u32;
        let (mut zeros, mut queries) = (0u32, 0u32);
        for _ in 0..n {
            let s = sample_step(&dist, &demo, &mut rng).unwrap();
            if s.action == 0 {
                zeros += 1;
            }
            if s.queried {
                queries += 1;
            }
        }
        let nf = n as f64;
        let action0 = zeros as f64 / nf;
        let query_rate = queries as f64 / nf;
        assert!((action0 - 0.67).abs() < 3.0 * (0.67 * 0.33 / nf).sqrt());
        assert!((query_rate - 0.1).abs() < 3.0 * (0.1 * 0.9 / nf).sqrt());
    }

    #[test]
    fn sample_step_rejects_unnormalized_demonstrator() {
        let dist = ActionDistribution {
            self_probs: vec![0.5, 0.4],
            theta_q: 0.1,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            sample_step(&dist, &[0.5, 0.4], &mut rng),
            Err(Error::NotADistribution { .. })
        ));
    }

    fn episode_setup() -> (WeightedModelClass, FixedActionPolicy, IidEnvironment) {
        let models: Vec<Arc<dyn PolicyModel>> = vec![
            Arc::new(FixedActionPolicy::new(vec![0.7, 0.3]).unwrap()),
            Arc::new(FixedActionPolicy::new(vec![0.2, 0.8]).unwrap()),
            Arc::new(FixedActionPolicy::new(vec![0.5, 0.5]).unwrap()),
        ];
        let class = WeightedModelClass::dense(models, None, ContextSignature::Free).unwrap();
        let demonstrator = FixedActionPolicy::new(vec![0.7, 0.3]).unwrap();
        let environment = IidEnvironment::new(vec![1.0]).unwrap();
        (class, demonstrator, environment)
    }

    #[test]
    fn episodes_are_deterministic_given_a_seed() {
        let opts = EpisodeOptions {
            steps: 300,
            alpha: 0.05,
            truth_index: Some(0),
        };
        let run = |seed: u64| {
            let (mut class, demo, env) = episode_setup();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            run_episode(&mut class, &demo, &env, &opts, &mut rng).unwrap()
        };
        let (a, b) = (run(11), run(11));
        assert_eq!(a.history, b.history);
        assert_eq!(a.theta_trace, b.theta_trace);
        assert_eq!(a.queries, b.queries);
        let c = run(12);
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn realizable_episode_never_violates_conservatism() {
        let opts = EpisodeOptions {
            steps: 500,
            alpha: 0.05,
            truth_index: Some(0),
        };
        let (mut class, demo, env) = episode_setup();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let record = run_episode(&mut class, &demo, &env, &opts, &mut rng).unwrap();
        let truth = record.truth.as_ref().unwrap();
        assert_eq!(truth.conservatism_violations, 0);
        assert_eq!(record.theta_trace.len(), 500);
        assert_eq!(record.query_record().len(), 500);
        assert_eq!(
            record.query_record().iter().filter(|q| **q).count() as u64,
            record.queries
        );
        // Cross-check the theta accumulator against the trace.
        let direct: f64 = record.theta_trace.iter().map(|t| t.powi(3)).sum();
        assert!((truth.sum_theta_cubed - direct).abs() < 1e-12);
    }

    /// Memoizing distributions by context key must not change behavior: the
    /// same models run with and without memoization (context signature Free
    /// vs Full) from the same seed must produce identical runs.
    #[test]
    fn memoization_is_behavior_preserving() {
        let rows: [&[f64]; 3] = [&[0.7, 0.3], &[0.2, 0.8], &[0.5, 0.5]];
        let build = |ctx: ContextSignature| {
            let models: Vec<Arc<dyn PolicyModel>> = rows
                .iter()
                .map(|r| {
                    Arc::new(FixedActionPolicy::new(r.to_vec()).unwrap()) as Arc<dyn PolicyModel>
                })
                .collect();
            WeightedModelClass::dense(models, None, ctx).unwrap()
        };
        let opts = EpisodeOptions {
            steps: 400,
            alpha: 0.05,
            truth_index: Some(0),
        };
        let demo = FixedActionPolicy::new(vec![0.7, 0.3]).unwrap();
        let env = IidEnvironment::new(vec![0.5, 0.5]).unwrap();

        let mut memoized = build(ContextSignature::Free);
        let mut plain = build(ContextSignature::Full);
        let mut rng_a = ChaCha12Rng::seed_from_u64(9);
        let mut rng_b = ChaCha12Rng::seed_from_u64(9);
        let a = run_episode(&mut memoized, &demo, &env, &opts, &mut rng_a).unwrap();
        let b = run_episode(&mut plain, &demo, &env, &opts, &mut rng_b).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.theta_trace, b.theta_trace);
    }

    #[test]
    fn mismatched_demonstrator_is_rejected() {
        let (mut class, _, env) = episode_setup();
        let wide = FixedActionPolicy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let opts = EpisodeOptions {
            steps: 1,
            alpha: 0.5,
            truth_index: None,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(run_episode(&mut class, &wide, &env, &opts, &mut rng).is_err());
    }
}
