//! Policy and environment traits plus small reference implementations.
//!
//! Both traits take a [`Stripped`] history view: they can condition on past
//! actions and observations but are structurally blind to query flags. Any
//! implementation of these traits is therefore fair by construction.

use rand::Rng;

use crate::history::Stripped;
use crate::{Error, Result};

/// Tolerance used when validating that probabilities sum to one.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// A candidate policy: a conditional distribution over actions given the
/// stripped history.
pub trait PolicyModel: Send + Sync {
    fn action_count(&self) -> usize;

    /// `pi(a | history)` for every action. Must have length
    /// [`action_count`](Self::action_count) and sum to 1 within
    /// [`DISTRIBUTION_TOLERANCE`].
    fn action_distribution(&self, history: Stripped<'_>) -> Vec<f64>;

    /// `ln pi(a | history)`. The default goes through
    /// [`action_distribution`](Self::action_distribution); implementations
    /// with sparse support may override it.
    fn log_prob(&self, history: Stripped<'_>, action: usize) -> f64 {
        self.action_distribution(history)[action].ln()
    }
}

/// An environment: a conditional distribution over observations given the
/// stripped history and the action just taken.
pub trait Environment: Send + Sync {
    fn observation_count(&self) -> usize;

    /// `mu(o | history, action)` for every observation.
    fn observation_distribution(&self, history: Stripped<'_>, action: usize) -> Vec<f64>;
}

/// Checks that `probs` is a probability vector: nonempty, entries in
/// `[0, 1]` (up to tolerance), total within [`DISTRIBUTION_TOLERANCE`] of 1.
pub fn validate_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::config("empty probability vector"));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < -DISTRIBUTION_TOLERANCE) {
        return Err(Error::config(format!(
            "probability vector has a negative or non-finite entry: {probs:?}"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::NotADistribution { sum });
    }
    Ok(())
}

/// Draws an index from an (approximately normalized) probability vector using
/// a single uniform variate. Numeric tail mass beyond the final cumulative
/// sum falls back to the last positive entry, so the draw is total.
pub fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            cum += p;
            if u < cum {
                return i;
            }
        }
    }
    last_positive
}

/// A policy that ignores history entirely: one fixed action distribution.
#[derive(Clone, Debug)]
pub struct FixedActionPolicy {
    probs: Vec<f64>,
}

impl FixedActionPolicy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_distribution(&probs)?;
        Ok(FixedActionPolicy { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl PolicyModel for FixedActionPolicy {
    fn action_count(&self) -> usize {
        self.probs.len()
    }

    fn action_distribution(&self, _history: Stripped<'_>) -> Vec<f64> {
        self.probs.clone()
    }

    fn log_prob(&self, _history: Stripped<'_>, action: usize) -> f64 {
        self.probs[action].ln()
    }
}

/// A policy that conditions on the most recent observation: row `o` of
/// `by_observation` after seeing observation `o`, `initial` on an empty
/// history.
#[derive(Clone, Debug)]
pub struct LastObservationPolicy {
    initial: Vec<f64>,
    by_observation: Vec<Vec<f64>>,
}

impl LastObservationPolicy {
    pub fn new(initial: Vec<f64>, by_observation: Vec<Vec<f64>>) -> Result<Self> {
        validate_distribution(&initial)?;
        if by_observation.is_empty() {
            return Err(Error::config("last-observation policy needs at least one row"));
        }
        for row in &by_observation {
            validate_distribution(row)?;
            if row.len() != initial.len() {
                return Err(Error::config(
                    "last-observation policy rows must share the action alphabet",
                ));
            }
        }
        Ok(LastObservationPolicy {
            initial,
            by_observation,
        })
    }
}

impl PolicyModel for LastObservationPolicy {
    fn action_count(&self) -> usize {
        self.initial.len()
    }

    fn action_distribution(&self, history: Stripped<'_>) -> Vec<f64> {
        match history.last_observation() {
            None => self.initial.clone(),
            Some(o) => self.by_observation[o].clone(),
        }
    }
}

/// An environment whose observations are i.i.d. draws from a fixed
/// distribution, regardless of history or action.
#[derive(Clone, Debug)]
pub struct IidEnvironment {
    probs: Vec<f64>,
}

impl IidEnvironment {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_distribution(&probs)?;
        Ok(IidEnvironment { probs })
    }
}

impl Environment for IidEnvironment {
    fn observation_count(&self) -> usize {
        self.probs.len()
    }

    fn observation_distribution(&self, _history: Stripped<'_>, _action: usize) -> Vec<f64> {
        self.probs.clone()
    }
}

/// An environment whose observation distribution depends on the action just
/// taken: row `a` of `by_action`.
#[derive(Clone, Debug)]
pub struct ActionCoupledEnvironment {
    by_action: Vec<Vec<f64>>,
}

impl ActionCoupledEnvironment {
    pub fn new(by_action: Vec<Vec<f64>>) -> Result<Self> {
        if by_action.is_empty() {
            return Err(Error::config("action-coupled environment needs at least one row"));
        }
        let width = by_action[0].len();
        for row in &by_action {
            validate_distribution(row)?;
            if row.len() != width {
                return Err(Error::config(
                    "action-coupled environment rows must share the observation alphabet",
                ));
            }
        }
        Ok(ActionCoupledEnvironment { by_action })
    }
}

impl Environment for ActionCoupledEnvironment {
    fn observation_count(&self) -> usize {
        self.by_action[0].len()
    }

    fn observation_distribution(&self, _history: Stripped<'_>, action: usize) -> Vec<f64> {
        self.by_action[action].clone()
    }
}
