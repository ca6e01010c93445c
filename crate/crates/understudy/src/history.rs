//! Interaction histories and the query-blind view handed to models.
//!
//! A history is a sequence of steps `(q_t, a_t, o_t)`: whether the step was
//! queried, the action taken, and the observation that followed. Candidate
//! models and environments must be *fair*: their output may depend on actions
//! and observations but never on who chose the action. That firewall is
//! enforced by the type system — models receive a [`Stripped`] view, which
//! simply has no accessor for query flags.

use crate::{Error, Result};

/// A dense id space with human-readable labels, used for actions and
/// observations. Ids are `0..len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Alphabet {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// One step of interaction: query flag, action id, observation id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HistoryStep {
    /// True when the demonstrator chose the action (a query was paid for).
    pub queried: bool,
    pub action: usize,
    pub observation: usize,
}

/// A full interaction history over fixed action/observation alphabets.
///
/// Steps are validated against the alphabet sizes on insertion; the sizes are
/// fixed at construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct History {
    steps: Vec<HistoryStep>,
    action_count: usize,
    observation_count: usize,
}

impl History {
    /// An empty history over `action_count` actions and `observation_count`
    /// observations. Both alphabets must be nonempty.
    pub fn new(action_count: usize, observation_count: usize) -> Result<Self> {
        if action_count == 0 || observation_count == 0 {
            return Err(Error::config(
                "history requires nonempty action and observation alphabets",
            ));
        }
        Ok(History {
            steps: Vec::new(),
            action_count,
            observation_count,
        })
    }

    pub fn action_count(&self) -> usize {
        self.action_count
    }

    pub fn observation_count(&self) -> usize {
        self.observation_count
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[HistoryStep] {
        &self.steps
    }

    pub fn step(&self, t: usize) -> HistoryStep {
        self.steps[t]
    }

    /// Append in place. Fails if the step's ids are out of range.
    pub fn push(&mut self, step: HistoryStep) -> Result<()> {
        if step.action >= self.action_count {
            return Err(Error::ActionOutOfRange {
                action: step.action,
                count: self.action_count,
            });
        }
        if step.observation >= self.observation_count {
            return Err(Error::ObservationOutOfRange {
                observation: step.observation,
                count: self.observation_count,
            });
        }
        self.steps.push(step);
        Ok(())
    }

    /// Value-style append: returns the extended history, leaving `self`
    /// untouched.
    pub fn append(&self, step: HistoryStep) -> Result<Self> {
        let mut next = self.clone();
        next.push(step)?;
        Ok(next)
    }

    /// Drop steps beyond `len`. Used by enumeration to backtrack.
    pub(crate) fn truncate(&mut self, len: usize) {
        self.steps.truncate(len);
    }

    /// The query-blind view models and environments are allowed to see.
    pub fn stripped(&self) -> Stripped<'_> {
        Stripped { steps: &self.steps }
    }

    /// Owned projection to `(action, observation)` pairs.
    pub fn strip(&self) -> Vec<(usize, usize)> {
        self.stripped().to_pairs()
    }

    /// Iterator over the queried steps together with their indices.
    pub fn queried_steps(&self) -> impl Iterator<Item = (usize, HistoryStep)> + '_ {
        self.steps
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, s)| s.queried)
    }
}

/// Borrowed view of a history exposing only actions and observations.
///
/// There is deliberately no way to recover query flags through this type;
/// passing it by value is the fairness contract for [`crate::PolicyModel`]
/// and [`crate::Environment`] implementations.
#[derive(Clone, Copy, Debug)]
pub struct Stripped<'a> {
    steps: &'a [HistoryStep],
}

impl<'a> Stripped<'a> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(action, observation)` of step `t`.
    pub fn step(&self, t: usize) -> (usize, usize) {
        let s = self.steps[t];
        (s.action, s.observation)
    }

    /// Observation of the most recent step, if any.
    pub fn last_observation(&self) -> Option<usize> {
        self.steps.last().map(|s| s.observation)
    }

    /// View of the first `len` steps.
    pub fn prefix(&self, len: usize) -> Stripped<'a> {
        Stripped {
            steps: &self.steps[..len],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + 'a {
        self.steps.iter().map(|s| (s.action, s.observation))
    }

    pub fn to_pairs(&self) -> Vec<(usize, usize)> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(queried: bool, action: usize, observation: usize) -> HistoryStep {
        HistoryStep {
            queried,
            action,
            observation,
        }
    }

    #[test]
    fn push_validates_alphabets() {
        let mut h = History::new(2, 3).unwrap();
        h.push(step(true, 1, 2)).unwrap();
        assert!(matches!(
            h.push(step(false, 2, 0)),
            Err(Error::ActionOutOfRange { action: 2, count: 2 })
        ));
        assert!(matches!(
            h.push(step(false, 0, 3)),
            Err(Error::ObservationOutOfRange {
                observation: 3,
                count: 3
            })
        ));
        // Failed pushes must not grow the history.
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn empty_alphabets_are_rejected() {
        assert!(History::new(0, 1).is_err());
        assert!(History::new(1, 0).is_err());
    }

    #[test]
    fn strip_commutes_with_append() {
        let mut h = History::new(3, 2).unwrap();
        h.push(step(true, 2, 1)).unwrap();
        let extra = step(false, 0, 0);

        let strip_then_append = {
            let mut v = h.strip();
            v.push((extra.action, extra.observation));
            v
        };
        let append_then_strip = h.append(extra).unwrap().strip();
        assert_eq!(strip_then_append, append_then_strip);
    }

    #[test]
    fn append_leaves_prefix_unchanged() {
        let mut h = History::new(2, 2).unwrap();
        h.push(step(false, 1, 0)).unwrap();
        let extended = h.append(step(true, 0, 1)).unwrap();
        assert_eq!(extended.len(), 2);
        assert_eq!(h.len(), 1);
        assert_eq!(extended.steps()[..1], h.steps()[..]);
    }

    #[test]
    fn stripped_view_reports_pairs_only() {
        let mut h = History::new(2, 2).unwrap();
        h.push(step(true, 1, 0)).unwrap();
        h.push(step(false, 0, 1)).unwrap();
        let s = h.stripped();
        assert_eq!(s.len(), 2);
        assert_eq!(s.step(0), (1, 0));
        assert_eq!(s.last_observation(), Some(1));
        assert_eq!(s.prefix(1).to_pairs(), vec![(1, 0)]);
    }

    #[test]
    fn queried_steps_filters_by_flag() {
        let mut h = History::new(2, 2).unwrap();
        h.push(step(true, 1, 0)).unwrap();
        h.push(step(false, 0, 1)).unwrap();
        h.push(step(true, 0, 0)).unwrap();
        let queried: Vec<usize> = h.queried_steps().map(|(t, _)| t).collect();
        assert_eq!(queried, vec![0, 2]);
    }
}
