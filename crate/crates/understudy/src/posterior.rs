//! Log-space Bayesian posteriors over policy classes and the top set.
//!
//! The posterior after a history `h` weights each model by its prior times
//! the probability it assigns to every *demonstrated* (queried) action:
//!
//! ```text
//! w(pi | h)  ∝  w(pi) * prod_{k: q_k = 1} pi(a_k | h_{<k})
//! ```
//!
//! Unqueried steps carry no information about the demonstrator and do not
//! touch the posterior. All weights are kept as natural logs and normalized
//! with a max-shifted log-sum-exp after every update.
//!
//! The *top set* at confidence `alpha` keeps the largest-posterior models:
//! sort models by nonincreasing posterior (ties by ascending index) and keep
//! model `n` while
//!
//! ```text
//! w_n  >=  alpha * sum_{m <= n} w_m .
//! ```
//!
//! The predicate is monotone along the sorted order (weights nonincreasing,
//! cumulative sums nondecreasing — this survives floating point verbatim), so
//! the set is always a prefix; construction asserts it.
//!
//! Classes come in two shapes. A *dense* class stores one [`PolicyModel`] per
//! index. A *factored* class represents a product space — model index =
//! mixed-radix digits over independent factors, posterior maintained per
//! factor — and materializes joint weights only to build the top set. Models
//! whose posterior is exactly zero can never enter the top set
//! (`0 >= alpha * positive` fails), so materialization skips factor values
//! with zero posterior; this keeps the sort small once impossible values
//! accumulate.

use std::sync::Arc;

use crate::history::Stripped;
use crate::math::log_sum_exp;
use crate::policy::PolicyModel;
use crate::{Error, Result};

/// How much of the stripped history a class's models actually condition on.
/// Used only to build memoization keys for cached action distributions; it
/// never changes results, only how often they can be reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextSignature {
    /// Models ignore history entirely.
    Free,
    /// Models look at the most recent observation only.
    LastObservation,
    /// Models may use the whole history; nothing can be memoized.
    Full,
}

/// A model class whose likelihood factorizes over independent factors.
///
/// A model is one choice of value per factor; its index packs the values in
/// mixed radix with factor 0 most significant. Implementations must satisfy
/// two structural promises:
///
/// * the likelihood of any `(history, action)` step is the product over
///   factors of `exp(factor_log_likelihood(f, v_f, ...))`, and
/// * the action distribution depends only on the factors named by
///   [`relevant_factors`](Self::relevant_factors) for that history.
pub trait FactoredModel: Send + Sync {
    fn action_count(&self) -> usize;

    fn factor_arities(&self) -> Vec<usize>;

    fn factor_label(&self, factor: usize) -> String;

    fn factor_value_label(&self, factor: usize, value: usize) -> String;

    /// Log-likelihood contribution of the step `(history, action)` to
    /// `factor = value`. Factors untouched by the step must return 0.
    fn factor_log_likelihood(
        &self,
        factor: usize,
        value: usize,
        history: Stripped<'_>,
        action: usize,
    ) -> f64;

    /// The factors the action distribution depends on in this context.
    fn relevant_factors(&self, history: Stripped<'_>) -> Vec<usize>;

    /// Action distribution of any model whose relevant factors take `values`
    /// (parallel to [`relevant_factors`](Self::relevant_factors)).
    fn distribution_given(&self, values: &[usize], history: Stripped<'_>) -> Vec<f64>;

    /// Memoization key for this context, or `None` to disable caching.
    fn context_key(&self, history: Stripped<'_>) -> Option<u64>;
}

#[derive(Clone)]
struct DenseClass {
    models: Vec<Arc<dyn PolicyModel>>,
    log_prior: Vec<f64>,
    log_posterior: Vec<f64>,
    context: ContextSignature,
}

#[derive(Clone)]
struct FactoredClass {
    model: Arc<dyn FactoredModel>,
    arities: Vec<usize>,
    /// `strides[f]` = product of arities of factors after `f`; model index =
    /// `sum_f value_f * strides[f]`.
    strides: Vec<usize>,
    log_prior: Vec<Vec<f64>>,
    log_posterior: Vec<Vec<f64>>,
}

#[derive(Clone)]
enum ClassKind {
    Dense(DenseClass),
    Factored(FactoredClass),
}

/// A Bayesian posterior over an indexed class of policies.
#[derive(Clone)]
pub struct WeightedModelClass {
    kind: ClassKind,
    version: u64,
}

fn normalized_log_prior(prior: Option<Vec<f64>>, count: usize) -> Result<Vec<f64>> {
    match prior {
        None => Ok(vec![-(count as f64).ln(); count]),
        Some(p) => {
            if p.len() != count {
                return Err(Error::config(format!(
                    "prior has {} entries for {} models",
                    p.len(),
                    count
                )));
            }
            crate::policy::validate_distribution(&p)?;
            Ok(p.iter().map(|w| w.ln()).collect())
        }
    }
}

impl WeightedModelClass {
    /// A dense class over explicit models. `prior` defaults to uniform.
    pub fn dense(
        models: Vec<Arc<dyn PolicyModel>>,
        prior: Option<Vec<f64>>,
        context: ContextSignature,
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::config("model class must be nonempty"));
        }
        let action_count = models[0].action_count();
        if models.iter().any(|m| m.action_count() != action_count) {
            return Err(Error::config("models must share one action alphabet"));
        }
        let log_prior = normalized_log_prior(prior, models.len())?;
        Ok(WeightedModelClass {
            kind: ClassKind::Dense(DenseClass {
                log_posterior: log_prior.clone(),
                log_prior,
                models,
                context,
            }),
            version: 0,
        })
    }

    /// A factored class. `prior` gives one distribution per factor and
    /// defaults to uniform; the joint prior is their product.
    pub fn factored(model: Arc<dyn FactoredModel>, prior: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let arities = model.factor_arities();
        if arities.is_empty() || arities.iter().any(|&a| a == 0) {
            return Err(Error::config("factored class needs nonempty factors"));
        }
        let mut log_prior = Vec::with_capacity(arities.len());
        match prior {
            None => {
                for &a in &arities {
                    log_prior.push(vec![-(a as f64).ln(); a]);
                }
            }
            Some(rows) => {
                if rows.len() != arities.len() {
                    return Err(Error::config("one prior row per factor required"));
                }
                for (row, &a) in rows.iter().zip(&arities) {
                    if row.len() != a {
                        return Err(Error::config("prior row length must match factor arity"));
                    }
                    crate::policy::validate_distribution(row)?;
                    log_prior.push(row.iter().map(|w| w.ln()).collect());
                }
            }
        }
        let mut strides = vec![1usize; arities.len()];
        for f in (0..arities.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1]
                .checked_mul(arities[f + 1])
                .ok_or_else(|| Error::config("factored class is too large to index"))?;
        }
        Ok(WeightedModelClass {
            kind: ClassKind::Factored(FactoredClass {
                log_posterior: log_prior.clone(),
                log_prior,
                model,
                arities,
                strides,
            }),
            version: 0,
        })
    }

    /// Number of models in the class (the full product for factored classes).
    pub fn len(&self) -> usize {
        match &self.kind {
            ClassKind::Dense(d) => d.models.len(),
            ClassKind::Factored(f) => f.arities.iter().product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty classes
    }

    pub fn action_count(&self) -> usize {
        match &self.kind {
            ClassKind::Dense(d) => d.models[0].action_count(),
            ClassKind::Factored(f) => f.model.action_count(),
        }
    }

    /// Bumped on every successful [`bayes_update`](Self::bayes_update); lets
    /// callers invalidate cached top sets and distributions.
    pub fn version(&self) -> u64 {
        self.version
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::ModelIndexOutOfRange {
                index,
                count: self.len(),
            });
        }
        Ok(())
    }

    /// Mixed-radix digits of a factored model index (factor 0 first).
    pub fn factor_values_of(&self, index: usize) -> Result<Vec<usize>> {
        self.check_index(index)?;
        match &self.kind {
            ClassKind::Dense(_) => Err(Error::config("dense classes have no factor structure")),
            ClassKind::Factored(f) => Ok(f
                .strides
                .iter()
                .zip(&f.arities)
                .map(|(&s, &a)| (index / s) % a)
                .collect()),
        }
    }

    pub fn log_posterior_of(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(match &self.kind {
            ClassKind::Dense(d) => d.log_posterior[index],
            ClassKind::Factored(f) => f
                .strides
                .iter()
                .zip(&f.arities)
                .zip(&f.log_posterior)
                .map(|((&s, &a), row)| row[(index / s) % a])
                .sum(),
        })
    }

    pub fn posterior_of(&self, index: usize) -> Result<f64> {
        Ok(self.log_posterior_of(index)?.exp())
    }

    pub fn log_prior_of(&self, index: usize) -> Result<f64> {
        self.check_index(index)?;
        Ok(match &self.kind {
            ClassKind::Dense(d) => d.log_prior[index],
            ClassKind::Factored(f) => f
                .strides
                .iter()
                .zip(&f.arities)
                .zip(&f.log_prior)
                .map(|((&s, &a), row)| row[(index / s) % a])
                .sum(),
        })
    }

    pub fn prior_of(&self, index: usize) -> Result<f64> {
        Ok(self.log_prior_of(index)?.exp())
    }

    /// Condition the posterior on one demonstrated action.
    ///
    /// `history` is the stripped history *before* the step; call this only
    /// for steps the demonstrator actually chose. Fails without changing any
    /// state when every model assigns the action zero probability.
    pub fn bayes_update(&mut self, history: Stripped<'_>, action: usize) -> Result<()> {
        if action >= self.action_count() {
            return Err(Error::ActionOutOfRange {
                action,
                count: self.action_count(),
            });
        }
        match &mut self.kind {
            ClassKind::Dense(d) => {
                let mut updated: Vec<f64> = d
                    .log_posterior
                    .iter()
                    .zip(&d.models)
                    .map(|(lw, m)| lw + m.log_prob(history, action))
                    .collect();
                let total = log_sum_exp(&updated);
                if !total.is_finite() {
                    return Err(Error::RealizabilityViolation { action });
                }
                for lw in &mut updated {
                    *lw -= total;
                }
                d.log_posterior = updated;
            }
            ClassKind::Factored(f) => {
                let mut updated = Vec::with_capacity(f.arities.len());
                for (factor, row) in f.log_posterior.iter().enumerate() {
                    let new_row: Vec<f64> = row
                        .iter()
                        .enumerate()
                        .map(|(v, lw)| {
                            lw + f.model.factor_log_likelihood(factor, v, history, action)
                        })
                        .collect();
                    let total = log_sum_exp(&new_row);
                    if !total.is_finite() {
                        return Err(Error::RealizabilityViolation { action });
                    }
                    updated.push(new_row.iter().map(|lw| lw - total).collect());
                }
                f.log_posterior = updated;
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Positive-posterior models as `(index, log posterior)`, ascending index.
    fn weight_entries(&self) -> Vec<(u32, f64)> {
        match &self.kind {
            ClassKind::Dense(d) => d
                .log_posterior
                .iter()
                .enumerate()
                .filter(|(_, lw)| lw.is_finite())
                .map(|(i, &lw)| (i as u32, lw))
                .collect(),
            ClassKind::Factored(f) => {
                // Odometer over the finite-posterior values of each factor;
                // ascending canonical index because supports are ascending.
                let supports: Vec<Vec<(usize, f64)>> = f
                    .log_posterior
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(_, lw)| lw.is_finite())
                            .map(|(v, &lw)| (v, lw))
                            .collect()
                    })
                    .collect();
                let count: usize = supports.iter().map(Vec::len).product();
                let mut entries = Vec::with_capacity(count);
                let mut digits = vec![0usize; supports.len()];
                loop {
                    let mut index = 0usize;
                    let mut lw = 0.0f64;
                    for (fi, &d) in digits.iter().enumerate() {
                        let (v, flw) = supports[fi][d];
                        index += v * f.strides[fi];
                        lw += flw;
                    }
                    entries.push((index as u32, lw));
                    // Increment the odometer (last factor fastest).
                    let mut fi = supports.len();
                    loop {
                        if fi == 0 {
                            return entries;
                        }
                        fi -= 1;
                        digits[fi] += 1;
                        if digits[fi] < supports[fi].len() {
                            break;
                        }
                        digits[fi] = 0;
                    }
                }
            }
        }
    }

    /// Build the top set at confidence `alpha` (in `(0, 1]`).
    pub fn top_set(&self, alpha: f64) -> Result<TopSet> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config(format!(
                "top-set confidence must lie in (0, 1], got {alpha}"
            )));
        }
        let mut entries = self.weight_entries();
        // Stable sort keeps ascending-index order within posterior ties.
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite log weights"));
        assert!(
            !entries.is_empty(),
            "a normalized posterior has at least one positive weight"
        );

        let max_lw = entries[0].1;
        let mut cumulative = 0.0f64;
        let mut cutoff = 0usize;
        let mut failed = false;
        for (rank, &(_, lw)) in entries.iter().enumerate() {
            let weight = (lw - max_lw).exp();
            cumulative += weight;
            let included = weight >= alpha * cumulative;
            if included {
                assert!(
                    !failed,
                    "top-set membership must be a prefix of the posterior-sorted order"
                );
                cutoff = rank + 1;
            } else {
                failed = true;
            }
        }

        let (order, log_weights) = entries.into_iter().unzip();
        Ok(TopSet {
            order,
            log_weights,
            cutoff,
            version: self.version,
            alpha,
        })
    }

    /// Memoization key for cached action distributions in this context.
    pub fn context_key(&self, history: Stripped<'_>) -> Option<u64> {
        match &self.kind {
            ClassKind::Dense(d) => match d.context {
                ContextSignature::Free => Some(0),
                ContextSignature::LastObservation => {
                    Some(history.last_observation().map_or(0, |o| o as u64 + 1))
                }
                ContextSignature::Full => None,
            },
            ClassKind::Factored(f) => f.model.context_key(history),
        }
    }

    /// Action distribution of one model in this context.
    pub fn model_distribution(&self, index: usize, history: Stripped<'_>) -> Result<Vec<f64>> {
        self.check_index(index)?;
        Ok(match &self.kind {
            ClassKind::Dense(d) => d.models[index].action_distribution(history),
            ClassKind::Factored(f) => {
                let digits = self.factor_values_of(index)?;
                let relevant = f.model.relevant_factors(history);
                let values: Vec<usize> = relevant.iter().map(|&fi| digits[fi]).collect();
                f.model.distribution_given(&values, history)
            }
        })
    }

    /// Pointwise minimum, over the models included in `top`, of their action
    /// distributions in this context. The conservative imitator acts from
    /// exactly this vector.
    ///
    /// For factored classes the minimum only depends on which *projections*
    /// onto the context's relevant factors are represented in the top set.
    /// Because membership is downward closed in posterior weight, a
    /// projection is represented exactly when its heaviest completion (ties
    /// broken toward the smallest model index, matching the global order) is
    /// a member, and that needs one key comparison against the first
    /// excluded model rather than a scan. The cost is therefore proportional
    /// to the projection space, not the class.
    pub fn min_over_top(&self, top: &TopSet, history: Stripped<'_>) -> Result<Vec<f64>> {
        if top.version != self.version {
            return Err(Error::StaleTopSet {
                top: top.version,
                class: self.version,
            });
        }
        let mut mins = vec![f64::INFINITY; self.action_count()];
        match &self.kind {
            ClassKind::Dense(d) => {
                for &index in top.included() {
                    let dist = d.models[index as usize].action_distribution(history);
                    for (m, p) in mins.iter_mut().zip(dist) {
                        *m = m.min(p);
                    }
                }
            }
            ClassKind::Factored(f) => {
                let relevant = f.model.relevant_factors(history);
                // Sort key of the first excluded model; `None` means every
                // positive-posterior model is a member.
                let boundary = if top.cutoff < top.order.len() {
                    Some((top.log_weights[top.cutoff], top.order[top.cutoff]))
                } else {
                    None
                };
                // Heaviest value (smallest index among ties) per factor, for
                // the factors the projection leaves free.
                let best: Vec<usize> = f
                    .log_posterior
                    .iter()
                    .map(|row| {
                        let mut best_v = 0usize;
                        let mut best_lw = f64::NEG_INFINITY;
                        for (v, &lw) in row.iter().enumerate() {
                            if lw > best_lw {
                                best_lw = lw;
                                best_v = v;
                            }
                        }
                        best_v
                    })
                    .collect();
                let mut slot = vec![usize::MAX; f.arities.len()];
                for (pos, &fi) in relevant.iter().enumerate() {
                    slot[fi] = pos;
                }
                let arities: Vec<usize> = relevant.iter().map(|&fi| f.arities[fi]).collect();
                let blocks: usize = arities.iter().product::<usize>().max(1);
                let mut values = vec![0usize; relevant.len()];
                let mut any = false;
                for key in 0..blocks {
                    let mut rest = key;
                    for pos in (0..relevant.len()).rev() {
                        values[pos] = rest % arities[pos];
                        rest /= arities[pos];
                    }
                    // Champion completion of this projection. The log weight
                    // accumulates in ascending factor order so it is bit for
                    // bit the value `weight_entries` would have produced.
                    let mut lw = 0.0f64;
                    let mut index = 0usize;
                    for fi in 0..f.arities.len() {
                        let v = if slot[fi] != usize::MAX {
                            values[slot[fi]]
                        } else {
                            best[fi]
                        };
                        lw += f.log_posterior[fi][v];
                        index += v * f.strides[fi];
                    }
                    if lw == f64::NEG_INFINITY {
                        continue;
                    }
                    let included = match boundary {
                        None => true,
                        Some((cut_lw, cut_index)) => {
                            lw > cut_lw || (lw == cut_lw && (index as u32) < cut_index)
                        }
                    };
                    if !included {
                        continue;
                    }
                    any = true;
                    let dist = f.model.distribution_given(&values, history);
                    for (m, p) in mins.iter_mut().zip(dist) {
                        *m = m.min(p);
                    }
                }
                assert!(any, "the top set always represents at least one projection");
            }
        }
        debug_assert!(mins.iter().all(|m| m.is_finite()));
        Ok(mins)
    }

    /// CSV table of log2 posteriors: one row per factor for factored classes
    /// (columns are the factor's value labels), one row per model otherwise.
    pub fn posterior_table_csv(&self) -> String {
        fn log2_cell(ln_w: f64) -> String {
            if ln_w == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{:.4}", ln_w / std::f64::consts::LN_2)
            }
        }
        let mut out = String::new();
        match &self.kind {
            ClassKind::Dense(d) => {
                out.push_str("model,log2_posterior\n");
                for (i, lw) in d.log_posterior.iter().enumerate() {
                    out.push_str(&format!("{},{}\n", i, log2_cell(*lw)));
                }
            }
            ClassKind::Factored(f) => {
                let arity = f.arities[0];
                debug_assert!(
                    f.arities.iter().all(|&a| a == arity),
                    "posterior table assumes uniform factor arity"
                );
                out.push_str("factor");
                for v in 0..arity {
                    out.push(',');
                    out.push_str(&f.model.factor_value_label(0, v));
                }
                out.push('\n');
                for (factor, row) in f.log_posterior.iter().enumerate() {
                    out.push_str(&f.model.factor_label(factor));
                    for lw in row {
                        out.push(',');
                        out.push_str(&log2_cell(*lw));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Models ordered by nonincreasing posterior with the membership cutoff.
///
/// `order` lists every positive-posterior model; the first
/// [`cutoff`](Self::cutoff) of them form the top set. Zero-posterior models
/// are omitted: they can never satisfy the membership predicate.
#[derive(Clone, Debug)]
pub struct TopSet {
    order: Vec<u32>,
    log_weights: Vec<f64>,
    cutoff: usize,
    version: u64,
    alpha: f64,
}

impl TopSet {
    /// Model indices in the top set, best first.
    pub fn included(&self) -> &[u32] {
        &self.order[..self.cutoff]
    }

    /// All positive-posterior models, posterior-descending.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// Log posteriors aligned with [`order`](Self::order).
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn contains(&self, model_index: usize) -> bool {
        self.included().iter().any(|&i| i as usize == model_index)
    }

    /// Posterior version this set was built from.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::History;
    use crate::policy::FixedActionPolicy;
    use proptest::prelude::*;

    fn dense_from_probs(rows: &[&[f64]], prior: Option<Vec<f64>>) -> WeightedModelClass {
        let models: Vec<Arc<dyn PolicyModel>> = rows
            .iter()
            .map(|r| Arc::new(FixedActionPolicy::new(r.to_vec()).unwrap()) as Arc<dyn PolicyModel>)
            .collect();
        WeightedModelClass::dense(models, prior, ContextSignature::Free).unwrap()
    }

    /// Independent evaluation of the membership rule, straight from its
    /// definition, in plain linear space.
    fn brute_force_top_set(weights: &[f64], alpha: f64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..weights.len()).collect();
        idx.sort_by(|&a, &b| {
            weights[b]
                .partial_cmp(&weights[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut included = Vec::new();
        let mut cumsum = 0.0;
        for &i in &idx {
            cumsum += weights[i];
            if weights[i] >= alpha * cumsum {
                included.push(i);
            } else {
                break;
            }
        }
        included
    }

    #[test]
    fn bayes_update_two_models_frozen_oracle() {
        // Hand Bayes: uniform prior over pi(a=1) = 0.5 and 1.0, observe a=1:
        // (0.5*0.5, 0.5*1.0) normalized = (1/3, 2/3).
        let mut class = dense_from_probs(&[&[0.5, 0.5], &[0.0, 1.0]], None);
        let h = History::new(2, 1).unwrap();
        class.bayes_update(h.stripped(), 1).unwrap();
        assert!((class.posterior_of(0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((class.posterior_of(1).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(class.version(), 1);
    }

    #[test]
    fn realizability_violation_leaves_state_untouched() {
        let mut class = dense_from_probs(&[&[0.0, 1.0], &[0.0, 1.0]], None);
        let h = History::new(2, 1).unwrap();
        let before: Vec<f64> = (0..2).map(|i| class.posterior_of(i).unwrap()).collect();
        assert!(matches!(
            class.bayes_update(h.stripped(), 0),
            Err(Error::RealizabilityViolation { action: 0 })
        ));
        let after: Vec<f64> = (0..2).map(|i| class.posterior_of(i).unwrap()).collect();
        assert_eq!(before, after);
        assert_eq!(class.version(), 0);
    }

    #[test]
    fn posterior_stays_normalized_through_updates() {
        let mut class = dense_from_probs(&[&[0.5, 0.5], &[0.9, 0.1], &[0.2, 0.8]], None);
        let h = History::new(2, 1).unwrap();
        for action in [1, 0, 1, 1, 0, 1] {
            class.bayes_update(h.stripped(), action).unwrap();
            let total: f64 = (0..3).map(|i| class.posterior_of(i).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-9, "total = {total}");
        }
    }

    #[test]
    fn top_set_frozen_oracles() {
        // alpha = 1 keeps only the best model: 0.4 >= 1.0 * (0.6 + 0.4) fails.
        let class = dense_from_probs(&[&[0.5, 0.5], &[0.9, 0.1]], Some(vec![0.6, 0.4]));
        let top = class.top_set(1.0).unwrap();
        assert_eq!(top.included(), &[0]);

        // Hand scan at alpha = 0.3 over (0.5, 0.3, 0.2):
        //   0.5 >= 0.3*0.5, 0.3 >= 0.3*0.8, but 0.2 < 0.3*1.0.
        let class = dense_from_probs(
            &[&[0.5, 0.5], &[0.9, 0.1], &[0.2, 0.8]],
            Some(vec![0.5, 0.3, 0.2]),
        );
        let top = class.top_set(0.3).unwrap();
        assert_eq!(top.included(), &[0, 1]);
        assert_eq!(top.cutoff(), 2);
        assert!(top.contains(1));
        assert!(!top.contains(2));
    }

    #[test]
    fn top_set_breaks_ties_by_ascending_index() {
        // Four exactly equal weights; alpha = 0.3 admits the first three:
        // 0.25 >= 0.3*0.75 but 0.25 < 0.3*1.0. Dyadic weights keep the
        // arithmetic exact, so the tie order is what is under test.
        let class = dense_from_probs(
            &[&[0.5, 0.5], &[0.9, 0.1], &[0.2, 0.8], &[0.4, 0.6]],
            None,
        );
        let top = class.top_set(0.3).unwrap();
        assert_eq!(top.included(), &[0, 1, 2]);
    }

    #[test]
    fn top_set_rejects_bad_alpha() {
        let class = dense_from_probs(&[&[0.5, 0.5]], None);
        assert!(class.top_set(0.0).is_err());
        assert!(class.top_set(1.5).is_err());
        assert!(class.top_set(-0.1).is_err());
    }

    #[test]
    fn zero_posterior_models_never_appear() {
        let mut class = dense_from_probs(&[&[0.5, 0.5], &[0.0, 1.0]], None);
        let h = History::new(2, 1).unwrap();
        class.bayes_update(h.stripped(), 0).unwrap(); // kills model 1
        assert_eq!(class.posterior_of(1).unwrap(), 0.0);
        let top = class.top_set(1e-9).unwrap();
        assert_eq!(top.order(), &[0]);
        assert_eq!(top.included(), &[0]);
    }

    /// A miniature factored world used to exercise the factored code path:
    /// two binary factors, four actions = bit pairs, and the model (v0, v1)
    /// emits bit f with probability `P[f][v_f]`.
    struct MiniFactored;
    const P: [[f64; 2]; 2] = [[0.2, 0.7], [0.4, 0.9]];

    impl MiniFactored {
        fn bit(action: usize, factor: usize) -> bool {
            (action >> (1 - factor)) & 1 == 1
        }
    }

    impl FactoredModel for MiniFactored {
        fn action_count(&self) -> usize {
            4
        }
        fn factor_arities(&self) -> Vec<usize> {
            vec![2, 2]
        }
        fn factor_label(&self, factor: usize) -> String {
            format!("f{factor}")
        }
        fn factor_value_label(&self, _factor: usize, value: usize) -> String {
            format!("v{value}")
        }
        fn factor_log_likelihood(
            &self,
            factor: usize,
            value: usize,
            _history: Stripped<'_>,
            action: usize,
        ) -> f64 {
            let p = P[factor][value];
            if Self::bit(action, factor) { p.ln() } else { (1.0 - p).ln() }
        }
        fn relevant_factors(&self, _history: Stripped<'_>) -> Vec<usize> {
            vec![0, 1]
        }
        fn distribution_given(&self, values: &[usize], _history: Stripped<'_>) -> Vec<f64> {
            (0..4)
                .map(|a| {
                    (0..2)
                        .map(|f| {
                            let p = P[f][values[f]];
                            if Self::bit(a, f) { p } else { 1.0 - p }
                        })
                        .product()
                })
                .collect()
        }
        fn context_key(&self, _history: Stripped<'_>) -> Option<u64> {
            Some(0)
        }
    }

    fn mini_dense_equivalent() -> WeightedModelClass {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for v0 in 0..2 {
            for v1 in 0..2 {
                rows.push(
                    (0..4)
                        .map(|a| {
                            let p0 = if MiniFactored::bit(a, 0) { P[0][v0] } else { 1.0 - P[0][v0] };
                            let p1 = if MiniFactored::bit(a, 1) { P[1][v1] } else { 1.0 - P[1][v1] };
                            p0 * p1
                        })
                        .collect(),
                );
            }
        }
        let models: Vec<Arc<dyn PolicyModel>> = rows
            .into_iter()
            .map(|r| Arc::new(FixedActionPolicy::new(r).unwrap()) as Arc<dyn PolicyModel>)
            .collect();
        WeightedModelClass::dense(models, None, ContextSignature::Free).unwrap()
    }

    #[test]
    fn factored_class_matches_dense_enumeration() {
        let mut factored =
            WeightedModelClass::factored(Arc::new(MiniFactored), None).unwrap();
        let mut dense = mini_dense_equivalent();
        let h = History::new(4, 1).unwrap();

        for action in [3, 1, 0, 2, 3, 3, 1] {
            factored.bayes_update(h.stripped(), action).unwrap();
            dense.bayes_update(h.stripped(), action).unwrap();
            for index in 0..4 {
                let pf = factored.posterior_of(index).unwrap();
                let pd = dense.posterior_of(index).unwrap();
                assert!((pf - pd).abs() <= 1e-12 * pf.max(pd).max(1e-300));
            }
            for alpha in [0.9, 0.5, 0.1, 1e-3] {
                let tf = factored.top_set(alpha).unwrap();
                let td = dense.top_set(alpha).unwrap();
                assert_eq!(tf.included(), td.included());
                assert_eq!(
                    factored.min_over_top(&tf, h.stripped()).unwrap(),
                    dense.min_over_top(&td, h.stripped()).unwrap()
                );
            }
        }
    }

    /// Three factors, but the action depends on the middle one alone, so the
    /// outer two stay latent: their posteriors never move, yet they spread
    /// the joint weights and (factor 0 being uniform) create exact ties.
    struct MiniLatent;
    const Q: [f64; 3] = [0.25, 0.5, 0.9];

    impl FactoredModel for MiniLatent {
        fn action_count(&self) -> usize {
            2
        }
        fn factor_arities(&self) -> Vec<usize> {
            vec![2, 3, 2]
        }
        fn factor_label(&self, factor: usize) -> String {
            format!("f{factor}")
        }
        fn factor_value_label(&self, _factor: usize, value: usize) -> String {
            format!("v{value}")
        }
        fn factor_log_likelihood(
            &self,
            factor: usize,
            value: usize,
            _history: Stripped<'_>,
            action: usize,
        ) -> f64 {
            if factor != 1 {
                return 0.0;
            }
            let q = Q[value];
            if action == 1 { q.ln() } else { (1.0 - q).ln() }
        }
        fn relevant_factors(&self, _history: Stripped<'_>) -> Vec<usize> {
            vec![1]
        }
        fn distribution_given(&self, values: &[usize], _history: Stripped<'_>) -> Vec<f64> {
            let q = Q[values[0]];
            vec![1.0 - q, q]
        }
        fn context_key(&self, _history: Stripped<'_>) -> Option<u64> {
            Some(0)
        }
    }

    #[test]
    fn projected_minimum_matches_member_scan() {
        let prior = Some(vec![
            vec![0.5, 0.5],
            vec![0.5, 0.3, 0.2],
            vec![0.7, 0.3],
        ]);
        let mut class = WeightedModelClass::factored(Arc::new(MiniLatent), prior).unwrap();
        let h = History::new(2, 1).unwrap();
        for action in [1, 1, 0, 1, 1, 0, 1] {
            class.bayes_update(h.stripped(), action).unwrap();
            for alpha in [1.0, 0.6, 0.3, 0.12, 1e-3] {
                let top = class.top_set(alpha).unwrap();
                let fast = class.min_over_top(&top, h.stripped()).unwrap();
                let mut slow = vec![f64::INFINITY; 2];
                for &index in top.included() {
                    let dist = class.model_distribution(index as usize, h.stripped()).unwrap();
                    for (m, p) in slow.iter_mut().zip(dist) {
                        *m = m.min(p);
                    }
                }
                assert_eq!(fast, slow, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn factored_index_round_trip() {
        let class = WeightedModelClass::factored(Arc::new(MiniFactored), None).unwrap();
        assert_eq!(class.len(), 4);
        assert_eq!(class.factor_values_of(0).unwrap(), vec![0, 0]);
        assert_eq!(class.factor_values_of(1).unwrap(), vec![0, 1]);
        assert_eq!(class.factor_values_of(2).unwrap(), vec![1, 0]);
        assert_eq!(class.factor_values_of(3).unwrap(), vec![1, 1]);
    }

    #[test]
    fn factored_prior_rows_multiply() {
        let class = WeightedModelClass::factored(
            Arc::new(MiniFactored),
            Some(vec![vec![0.25, 0.75], vec![0.5, 0.5]]),
        )
        .unwrap();
        assert!((class.prior_of(1).unwrap() - 0.25 * 0.5).abs() < 1e-15);
        assert!((class.posterior_of(3).unwrap() - 0.75 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn stale_top_set_is_rejected() {
        let mut class = dense_from_probs(&[&[0.5, 0.5], &[0.9, 0.1]], None);
        let h = History::new(2, 1).unwrap();
        let top = class.top_set(0.5).unwrap();
        class.bayes_update(h.stripped(), 0).unwrap();
        assert!(matches!(
            class.min_over_top(&top, h.stripped()),
            Err(Error::StaleTopSet { .. })
        ));
    }

    #[test]
    fn min_over_top_takes_pointwise_minimum() {
        let class = dense_from_probs(&[&[0.7, 0.3], &[0.6, 0.4]], None);
        let h = History::new(2, 1).unwrap();
        let top = class.top_set(0.4).unwrap();
        assert_eq!(top.included().len(), 2);
        let mins = class.min_over_top(&top, h.stripped()).unwrap();
        assert!((mins[0] - 0.6).abs() < 1e-15);
        assert!((mins[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn posterior_table_lists_factor_rows() {
        let class = WeightedModelClass::factored(Arc::new(MiniFactored), None).unwrap();
        let csv = class.posterior_table_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("factor,v0,v1"));
        assert_eq!(lines.next(), Some("f0,-1.0000,-1.0000"));
        assert_eq!(lines.next(), Some("f1,-1.0000,-1.0000"));
    }

    proptest! {
        /// Random weight vectors: construction must agree exactly with the
        /// brute-force reading of the membership rule.
        #[test]
        fn top_set_matches_brute_force(
            raw in proptest::collection::vec(1e-6..1.0f64, 1..24),
            alpha in 1e-6..1.0f64,
        ) {
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let rows: Vec<Vec<f64>> = weights.iter().map(|_| vec![0.5, 0.5]).collect();
            let models: Vec<Arc<dyn PolicyModel>> = rows
                .into_iter()
                .map(|r| Arc::new(FixedActionPolicy::new(r).unwrap()) as Arc<dyn PolicyModel>)
                .collect();
            let class = WeightedModelClass::dense(
                models,
                Some(weights.clone()),
                ContextSignature::Free,
            ).unwrap();
            let top = class.top_set(alpha).unwrap();
            let included: Vec<usize> = top.included().iter().map(|&i| i as usize).collect();
            prop_assert_eq!(included, brute_force_top_set(&weights, alpha));
        }

        /// Posterior normalization holds after arbitrary update sequences.
        #[test]
        fn updates_preserve_normalization(
            actions in proptest::collection::vec(0usize..2, 1..40),
        ) {
            let mut class = dense_from_probs(&[&[0.5, 0.5], &[0.9, 0.1], &[0.3, 0.7]], None);
            let h = History::new(2, 1).unwrap();
            for a in actions {
                class.bayes_update(h.stripped(), a).unwrap();
            }
            let total: f64 = (0..3).map(|i| class.posterior_of(i).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
