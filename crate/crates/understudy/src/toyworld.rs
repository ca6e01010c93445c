//! A travel-agency world small enough to watch the imitator think.
//!
//! The agent fields restaurant requests from up to three regular clients.
//! At each step either nobody shows up or client `c` arrives, independently
//! of everything else, with probability `4^-c`. The action is either the
//! null action (nothing to recommend to nobody) or one of the `2^4 = 16`
//! recommendation patterns over four binary features of a restaurant:
//! vegetarian-friendly, Michelin-starred, locally owned, instagrammable.
//!
//! A demonstrator is a tuple of `4 * clients` feature propensities, each
//! drawn from `{1/3, 2/3, 1}`: when client `c` arrives, the demonstrator
//! samples each feature bit independently with its propensity, and when
//! nobody arrives it plays the null action with certainty. The model class
//! is the full grid of `3^(4 * clients)` such tuples — `531441` models at
//! three clients — which factorizes over features, so the posterior is
//! maintained as `4 * clients` independent ternary factors and the joint is
//! only materialized where an interface needs it.
//!
//! Clients are impatient statisticians. Each keeps a likelihood ledger over
//! the `81` candidate propensity tuples for their own recommendations and
//! quits as soon as some rival tuple explains the stream a hundred times
//! better than the tuple they asked for; a recommendation the desired tuple
//! rules out entirely (a feature promised with certainty that fails to
//! appear) is immediate grounds to quit. A cautious enough imitator keeps
//! every client: it queries the demonstrator while rival tuples are still
//! plausible and only acts alone once acting alone is safe.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::history::{Alphabet, Stripped};
use crate::imitator::{run_episode, EpisodeOptions};
use crate::policy::{IidEnvironment, PolicyModel};
use crate::posterior::{FactoredModel, WeightedModelClass};
use crate::{Error, Result};

/// The propensity grid each feature ranges over.
pub const FEATURE_VALUES: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Display labels aligned with [`FEATURE_VALUES`].
pub const VALUE_LABELS: [&str; 3] = ["1/3", "2/3", "1"];

/// The four restaurant features, in bit order.
pub const FEATURE_LABELS: [&str; 4] = ["veg", "michelin", "local", "instagram"];

/// Likelihood ratio at which a client fires the agency.
pub const QUIT_RATIO: f64 = 100.0;

pub const DEFAULT_CLIENTS: usize = 3;
pub const DEFAULT_STEPS: usize = 1 << 15;
/// Default top-set confidence; cautious enough that no client ever quits.
pub const DEFAULT_ALPHA: f64 = 1e-14;

/// The fixed three-client truth used by the walkthrough example and docs:
/// `(1/3, 2/3, 1/3, 2/3, 2/3, 1, 1/3, 1, 1/3, 1/3, 1/3, 1)` as indices
/// into [`FEATURE_VALUES`].
pub const SHOWCASE_TRUTH: [usize; 12] = [0, 1, 0, 1, 1, 2, 0, 2, 0, 0, 0, 2];

/// Number of recommendation patterns (excluding the null action).
pub const PATTERN_COUNT: usize = 16;

/// Actions in the world: the null action plus every feature pattern.
pub const ACTION_COUNT: usize = PATTERN_COUNT + 1;

/// Feature bits of pattern action `action` (in `1..=16`), bit 0 first.
pub fn pattern_bits(action: usize) -> [bool; 4] {
    debug_assert!((1..=PATTERN_COUNT).contains(&action));
    let mask = action - 1;
    [
        mask & 0b1000 != 0,
        mask & 0b0100 != 0,
        mask & 0b0010 != 0,
        mask & 0b0001 != 0,
    ]
}

/// The pattern action carrying these feature bits.
pub fn pattern_action(bits: [bool; 4]) -> usize {
    let mut mask = 0usize;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            mask |= 1 << (3 - i);
        }
    }
    mask + 1
}

/// Probability that a 4-feature propensity block (indices into
/// [`FEATURE_VALUES`]) produces pattern `action`.
pub fn pattern_probability(block: &[usize], action: usize) -> f64 {
    debug_assert_eq!(block.len(), 4);
    let bits = pattern_bits(action);
    let mut p = 1.0;
    for (i, &v) in block.iter().enumerate() {
        let q = FEATURE_VALUES[v];
        p *= if bits[i] { q } else { 1.0 - q };
    }
    p
}

/// Static facts about the world at a given client count.
#[derive(Clone, Debug)]
pub struct ToyWorld {
    clients: usize,
}

impl ToyWorld {
    pub fn new(clients: usize) -> Result<Self> {
        if !(1..=3).contains(&clients) {
            return Err(Error::config(format!(
                "the agency serves between 1 and 3 clients, got {clients}"
            )));
        }
        Ok(ToyWorld { clients })
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    pub fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    /// Observations: id 0 is "nobody", id `c` is client `c`.
    pub fn observation_count(&self) -> usize {
        self.clients + 1
    }

    pub fn feature_count(&self) -> usize {
        4 * self.clients
    }

    pub fn model_count(&self) -> usize {
        3usize.pow(self.feature_count() as u32)
    }

    /// Arrival distribution: client `c` with probability `4^-c`, nobody
    /// otherwise. At three clients that is `43/64, 16/64, 4/64, 1/64`.
    pub fn arrival_probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.clients + 1];
        let mut rest = 1.0;
        for c in 1..=self.clients {
            let p = 0.25f64.powi(c as i32);
            probs[c] = p;
            rest -= p;
        }
        probs[0] = rest;
        probs
    }

    pub fn environment(&self) -> IidEnvironment {
        IidEnvironment::new(self.arrival_probabilities())
            .expect("arrival probabilities form a distribution")
    }

    pub fn action_alphabet(&self) -> Alphabet {
        let mut labels = vec!["null".to_string()];
        for action in 1..=PATTERN_COUNT {
            let bits = pattern_bits(action);
            labels.push(bits.iter().map(|&b| if b { 'T' } else { 'F' }).collect());
        }
        Alphabet::new(labels)
    }

    pub fn observation_alphabet(&self) -> Alphabet {
        let mut labels = vec!["nobody".to_string()];
        for c in 1..=self.clients {
            labels.push(format!("client{c}"));
        }
        Alphabet::new(labels)
    }
}

/// Client (1-based) arriving in this context, if any: the latest
/// observation, with the start of time counting as nobody.
fn arriving_client(history: Stripped<'_>) -> Option<usize> {
    match history.last_observation() {
        None | Some(0) => None,
        Some(c) => Some(c),
    }
}

/// One concrete propensity tuple acting as the demonstrator.
#[derive(Clone, Debug)]
pub struct ToyDemonstrator {
    clients: usize,
    values: Vec<usize>,
}

impl ToyDemonstrator {
    pub fn new(clients: usize, values: Vec<usize>) -> Result<Self> {
        let world = ToyWorld::new(clients)?;
        if values.len() != world.feature_count() {
            return Err(Error::config(format!(
                "expected {} propensity indices, got {}",
                world.feature_count(),
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= FEATURE_VALUES.len()) {
            return Err(Error::config(format!(
                "propensity index {bad} is outside the value grid"
            )));
        }
        Ok(ToyDemonstrator { clients, values })
    }

    /// Draw every propensity uniformly from the grid.
    pub fn random<R: Rng + ?Sized>(clients: usize, rng: &mut R) -> Result<Self> {
        let count = ToyWorld::new(clients)?.feature_count();
        let values = (0..count).map(|_| rng.random_range(0..3)).collect();
        ToyDemonstrator::new(clients, values)
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// This tuple's canonical index in the factored class (feature 0 is the
    /// most significant ternary digit).
    pub fn model_index(&self) -> usize {
        self.values.iter().fold(0, |acc, &v| acc * 3 + v)
    }

    fn block(&self, client: usize) -> &[usize] {
        &self.values[4 * (client - 1)..4 * client]
    }
}

impl PolicyModel for ToyDemonstrator {
    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn action_distribution(&self, history: Stripped<'_>) -> Vec<f64> {
        let mut probs = vec![0.0; ACTION_COUNT];
        match arriving_client(history) {
            None => probs[0] = 1.0,
            Some(c) => {
                debug_assert!(c <= self.clients);
                for action in 1..=PATTERN_COUNT {
                    probs[action] = pattern_probability(self.block(c), action);
                }
            }
        }
        probs
    }
}

/// The factored representation of the full tuple grid: one ternary factor
/// per (client, feature) pair, active only in that client's contexts.
#[derive(Clone, Debug)]
pub struct ToyFactorModel {
    clients: usize,
}

impl ToyFactorModel {
    pub fn new(clients: usize) -> Result<Self> {
        ToyWorld::new(clients)?;
        Ok(ToyFactorModel { clients })
    }

    fn block_of(&self, factor: usize) -> usize {
        factor / 4 + 1
    }
}

impl FactoredModel for ToyFactorModel {
    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn factor_arities(&self) -> Vec<usize> {
        vec![FEATURE_VALUES.len(); 4 * self.clients]
    }

    fn factor_label(&self, factor: usize) -> String {
        format!("client{}.{}", self.block_of(factor), FEATURE_LABELS[factor % 4])
    }

    fn factor_value_label(&self, _factor: usize, value: usize) -> String {
        VALUE_LABELS[value].to_string()
    }

    fn factor_log_likelihood(
        &self,
        factor: usize,
        value: usize,
        history: Stripped<'_>,
        action: usize,
    ) -> f64 {
        match arriving_client(history) {
            None => {
                // Every tuple plays null for nobody, so the step carries no
                // evidence — unless the action contradicts all of them.
                if action == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Some(c) => {
                if self.block_of(factor) != c {
                    return 0.0;
                }
                if action == 0 {
                    return f64::NEG_INFINITY;
                }
                let bit = pattern_bits(action)[factor % 4];
                let q = FEATURE_VALUES[value];
                if bit {
                    q.ln()
                } else {
                    (1.0 - q).ln()
                }
            }
        }
    }

    fn relevant_factors(&self, history: Stripped<'_>) -> Vec<usize> {
        match arriving_client(history) {
            None => Vec::new(),
            Some(c) => (4 * (c - 1)..4 * c).collect(),
        }
    }

    fn distribution_given(&self, values: &[usize], history: Stripped<'_>) -> Vec<f64> {
        let mut probs = vec![0.0; ACTION_COUNT];
        match arriving_client(history) {
            None => probs[0] = 1.0,
            Some(_) => {
                for action in 1..=PATTERN_COUNT {
                    probs[action] = pattern_probability(values, action);
                }
            }
        }
        probs
    }

    fn context_key(&self, history: Stripped<'_>) -> Option<u64> {
        Some(history.last_observation().unwrap_or(0) as u64)
    }
}

/// The uniform-prior class over every propensity tuple.
pub fn toy_class(clients: usize) -> Result<WeightedModelClass> {
    WeightedModelClass::factored(Arc::new(ToyFactorModel::new(clients)?), None)
}

/// One client's running hypothesis test against the agency.
///
/// The ledger tracks the log likelihood of all `81` candidate propensity
/// tuples on the recommendations this client has received. The client
/// weighs the desired tuple against the *composite* alternative — the other
/// 80 tuples mixed uniformly — and quits when that Bayes factor exceeds
/// [`QUIT_RATIO`], including the degenerate case where the desired tuple
/// has likelihood zero (a broken certainty). Quitting is sticky; the ledger
/// keeps updating so the margin stays reportable.
#[derive(Clone, Debug)]
pub struct ClientMonitor {
    desired: usize,
    log_likelihood: Vec<f64>,
    quit: bool,
    observations: u64,
}

impl ClientMonitor {
    /// `desired_block`: the four propensity indices this client asked for.
    pub fn new(desired_block: &[usize]) -> Result<Self> {
        if desired_block.len() != 4 || desired_block.iter().any(|&v| v >= 3) {
            return Err(Error::config(
                "a client's desired block is four indices into the value grid",
            ));
        }
        let desired = desired_block.iter().fold(0, |acc, &v| acc * 3 + v);
        Ok(ClientMonitor {
            desired,
            log_likelihood: vec![0.0; 81],
            quit: false,
            observations: 0,
        })
    }

    /// Fold one received recommendation into the ledger.
    pub fn record(&mut self, action: usize) -> Result<()> {
        if !(1..=PATTERN_COUNT).contains(&action) {
            return Err(Error::ActionOutOfRange {
                action,
                count: ACTION_COUNT,
            });
        }
        let bits = pattern_bits(action);
        for (cand, ll) in self.log_likelihood.iter_mut().enumerate() {
            let mut rest = cand;
            // Ternary digits decode least significant first, which is the
            // last feature; pair each with its own feature's bit.
            for feature in (0..4).rev() {
                let q = FEATURE_VALUES[rest % 3];
                rest /= 3;
                *ll += if bits[feature] { q.ln() } else { (1.0 - q).ln() };
            }
        }
        self.observations += 1;
        if self.log_likelihood_gap() > QUIT_RATIO.ln() {
            self.quit = true;
        }
        Ok(())
    }

    /// Log Bayes factor of the composite alternative: the mean likelihood
    /// of the 80 rival tuples over the desired tuple's likelihood. Positive
    /// infinity when the desired tuple has been ruled out.
    pub fn log_likelihood_gap(&self) -> f64 {
        let desired_ll = self.log_likelihood[self.desired];
        if desired_ll == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        let rivals = || {
            self.log_likelihood
                .iter()
                .enumerate()
                .filter(|&(cand, _)| cand != self.desired)
                .map(|(_, &ll)| ll)
        };
        let peak = rivals().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = rivals().map(|ll| (ll - peak).exp()).sum();
        let rival_count = (self.log_likelihood.len() - 1) as f64;
        peak + sum.ln() - rival_count.ln() - desired_ll
    }

    pub fn quit(&self) -> bool {
        self.quit
    }

    pub fn observations(&self) -> u64 {
        self.observations
    }
}

/// How the demonstrator's tuple is chosen for a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TruthSpec {
    /// Drawn uniformly from the grid, deterministically from the run seed.
    RandomPerSeed,
    /// A fixed tuple of propensity indices (length `4 * clients`).
    Fixed(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct ToyRunConfig {
    pub clients: usize,
    pub steps: usize,
    pub alpha: f64,
    pub truth: TruthSpec,
}

impl Default for ToyRunConfig {
    fn default() -> Self {
        ToyRunConfig {
            clients: DEFAULT_CLIENTS,
            steps: DEFAULT_STEPS,
            alpha: DEFAULT_ALPHA,
            truth: TruthSpec::RandomPerSeed,
        }
    }
}

/// Everything one seeded run produces.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub seed: u64,
    pub clients: usize,
    pub steps: usize,
    pub queries: u64,
    /// The demonstrator's propensity indices.
    pub truth_values: Vec<usize>,
    pub truth_model_index: usize,
    /// Final posterior mass on the demonstrator's tuple.
    pub truth_posterior: f64,
    /// True iff the truth stayed in the top set after every prefix.
    pub event_held: bool,
    /// Steps where some self-action probability exceeded the truth's.
    pub conservatism_violations: u64,
    /// Whether each client (1-based order) had quit by the end.
    pub quits: Vec<bool>,
    /// Arrivals per client.
    pub client_visits: Vec<u64>,
    /// `theta_q` at every step.
    pub theta_trace: Vec<f64>,
    /// Query flag at every step.
    pub query_flags: Vec<bool>,
    /// Final per-factor posterior table (CSV).
    pub posterior_csv: String,
    /// Wall-clock seconds spent in the interaction loop.
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn quit_count(&self) -> usize {
        self.quits.iter().filter(|&&q| q).count()
    }
}

fn validate_config(config: &ToyRunConfig) -> Result<()> {
    ToyWorld::new(config.clients)?;
    if !(config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(Error::config(format!(
            "top-set confidence must lie in (0, 1], got {}",
            config.alpha
        )));
    }
    Ok(())
}

/// Run one seeded episode of the agency world.
///
/// The seed fully determines the run: the demonstrator's tuple (when
/// [`TruthSpec::RandomPerSeed`]) is drawn first, then the interaction
/// stream, all from one deterministic generator.
pub fn run_toy(config: &ToyRunConfig, seed: u64) -> Result<RunSummary> {
    validate_config(config)?;
    let world = ToyWorld::new(config.clients)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let demonstrator = match &config.truth {
        TruthSpec::RandomPerSeed => ToyDemonstrator::random(config.clients, &mut rng)?,
        TruthSpec::Fixed(values) => ToyDemonstrator::new(config.clients, values.clone())?,
    };
    let truth_model_index = demonstrator.model_index();

    let environment = world.environment();
    let mut class = toy_class(config.clients)?;
    let opts = EpisodeOptions {
        steps: config.steps,
        alpha: config.alpha,
        truth_index: Some(truth_model_index),
    };

    let started = Instant::now();
    let record = run_episode(&mut class, &demonstrator, &environment, &opts, &mut rng)?;
    let wall_seconds = started.elapsed().as_secs_f64();

    // Replay the stream through each client's eyes. The recommendation at
    // step t answers the arrival observed at step t-1.
    let mut monitors: Vec<ClientMonitor> = (1..=config.clients)
        .map(|c| ClientMonitor::new(&demonstrator.values()[4 * (c - 1)..4 * c]))
        .collect::<Result<_>>()?;
    let mut client_visits = vec![0u64; config.clients];
    let steps = record.history.steps();
    for t in 0..steps.len() {
        let context = if t == 0 { 0 } else { steps[t - 1].observation };
        if context >= 1 {
            client_visits[context - 1] += 1;
            monitors[context - 1].record(steps[t].action)?;
        }
    }

    let truth = record
        .truth
        .as_ref()
        .expect("run_toy always tracks the truth");
    let truth_posterior = class.posterior_of(truth_model_index)?;

    Ok(RunSummary {
        seed,
        clients: config.clients,
        steps: config.steps,
        queries: record.queries,
        truth_values: demonstrator.values().to_vec(),
        truth_model_index,
        truth_posterior,
        event_held: truth.event_held,
        conservatism_violations: truth.conservatism_violations,
        quits: monitors.iter().map(ClientMonitor::quit).collect(),
        client_visits,
        theta_trace: record.theta_trace.clone(),
        query_flags: record.query_record(),
        posterior_csv: class.posterior_table_csv(),
        wall_seconds,
    })
}

/// Run an independent episode per seed (in parallel), in the given order.
pub fn run_many(config: &ToyRunConfig, seeds: &[u64]) -> Result<Vec<RunSummary>> {
    seeds
        .par_iter()
        .map(|&seed| run_toy(config, seed))
        .collect()
}
