//! Conservative Bayesian imitation with on-demand expert queries.
//!
//! An imitator watches a demonstrator act in an environment and keeps a
//! Bayesian posterior over a class of candidate policies. At every step it
//! either acts on its own or pays for a query, in which case the demonstrator
//! picks the action. The decision rule is deliberately conservative: the
//! imitator's own probability for an action is the *minimum* probability that
//! any currently-plausible model assigns to it, and all leftover mass becomes
//! the query probability. Acting this way never makes a rare action more
//! likely than the demonstrator would have, which is what lets the library
//! certify bounds on query counts, predictive error, and the distortion of
//! unlikely events.
//!
//! The crate has three layers:
//!
//! * **Core machinery** — [`history`], [`policy`], [`posterior`], and
//!   [`imitator`]: interaction histories with a query-blind view for models,
//!   log-space Bayesian updating (dense or factored classes), the
//!   posterior-descending top set, and the conservative action rule.
//! * **Sequence prediction** — [`smap`]: top-posterior predictors over a
//!   class of measures (`xi`, `rho_n`, `rho_norm`, `rho_stat`, `phi`) and the
//!   minimum-over-plausible-measures predictor, with the inequalities that
//!   relate them.
//! * **Certification** — [`bounds`]: closed-form right-hand sides for the
//!   crate's numbered bound catalog (T1..T7, L1), Monte Carlo estimators of
//!   the corresponding left-hand sides, and exact small-instance enumeration
//!   of the full interaction law for zero-tolerance checks.
//!
//! [`toyworld`] instantiates everything on a small travel-agency world (three
//! clients with sparse arrival rates, sixteen restaurant bit-patterns, a
//! half-million-model factored class) and [`cli`] drives the `understudy`
//! binary's `toy-run`, `bounds-check`, and `smap-demo` subcommands.
//!
//! Every run is deterministic given its configuration: all randomness flows
//! through seeded ChaCha12 generators, and parallel runs use one stream per
//! seed.

use thiserror::Error;

pub mod bounds;
pub mod cli;
pub mod history;
pub mod imitator;
pub(crate) mod math;
pub mod policy;
pub mod posterior;
pub mod smap;
pub mod toyworld;

pub use history::{Alphabet, History, HistoryStep, Stripped};
pub use imitator::{run_episode, ActionDistribution, EpisodeOptions, EpisodeRecord, StepOutcome};
pub use policy::{Environment, PolicyModel};
pub use posterior::{ContextSignature, FactoredModel, TopSet, WeightedModelClass};

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action id {action} out of range for alphabet of size {count}")]
    ActionOutOfRange { action: usize, count: usize },

    #[error("observation id {observation} out of range for alphabet of size {count}")]
    ObservationOutOfRange { observation: usize, count: usize },

    #[error("model index {index} out of range for class of {count} models")]
    ModelIndexOutOfRange { index: usize, count: usize },

    #[error("not a probability distribution: sum = {sum}")]
    NotADistribution { sum: f64 },

    #[error("every model assigns zero probability to demonstrated action {action}")]
    RealizabilityViolation { action: usize },

    #[error("prefix has zero probability under every measure in the class")]
    ImpossiblePrefix,

    #[error("top set was built for posterior version {top}, class is at version {class}")]
    StaleTopSet { top: u64, class: u64 },

    #[error("exact enumeration would visit {histories} histories (limit {limit})")]
    StateSpaceTooLarge { histories: u128, limit: u128 },

    #[error("divergence is infinite: reference law assigns zero mass where the subject law does not")]
    AbsoluteContinuityViolation,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for configuration errors carrying a formatted message.
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
