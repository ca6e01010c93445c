//! The crate's certified-bound catalog: closed-form right-hand sides and the
//! harnesses that check them.
//!
//! The imitation policy and the sequence estimators come with a numbered
//! catalog of inequalities, written here with `w = w(truth)` for the prior
//! weight on the true model, `|A|` for the action count, `|X|` for the
//! symbol count, and `s_alpha = |A| alpha^-3 (24 w^-1 + 12)`:
//!
//! * **T1** (query mass): `E[sum_t theta_q(h_<t)^3] <= s_alpha`.
//! * **T2** (truth stays in the top set): the event `E = {for all t, the
//!   truth is a top model}` has `P(E) >= 1 - alpha/w`.
//! * **T3** (predictive convergence, `alpha < w`): the expected sum of cubed
//!   L1 distances between the self-action probabilities and the truth,
//!   conditioned on `E`, is at most `s_alpha / (1 - alpha/w)`.
//! * **T4** (trajectory closeness, fair setting, `alpha < w`): the KL
//!   divergence between the `E`-conditioned laws of the first `t`
//!   query-stripped steps — actions chosen by the learner vs. all actions
//!   chosen by the truth — is at most
//!   `alpha^-1 |A|^(1/3) (24 w^-1 + 12)^(1/3) (1 - alpha/w)^-2 t^(2/3)
//!   - ln(1 - alpha/w)`.
//! * **T5** (unlikely events stay unlikely, fair setting): for any set `B`
//!   of length-`t` stripped histories, with `p_B` its probability when the
//!   truth picks every action, `P(B and E) <= t^2 s_alpha / (ln(t^2 s_alpha
//!   / 27 p_B) - 3 ln ln(1 + t^(2/3) s_alpha^(1/3) / (3 p_B^(1/3))))^3`,
//!   clamped to the trivial bound 1 outside the formula's domain.
//! * **T6** (conservative sequence prediction): see [`crate::smap`];
//!   `(i)` bounds the summed squared gap to the truth by
//!   `alpha^-3 (24 w^-1 + 12)` and `(ii)` the summed squared missing mass by
//!   `|X|` times that.
//! * **T7** (top-set mixture): `rho_stat_n` has summed squared error at most
//!   `6 w^-1 + 3` for every rank `n`.
//! * **L1** (overassignment): the expected total excess next-symbol mass of
//!   `rho_n` lies in `[0, w^-1]`.
//!
//! [`exact`] verifies T1–T5 by exhaustive enumeration on tiny instances;
//! [`mc`] estimates the left-hand sides by simulation. Both produce
//! [`BoundReport`] rows.

pub mod exact;
pub mod mc;
pub mod sweep;

/// How a report's left-hand side was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Statistical,
}

impl std::fmt::Display for CheckMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckMode::Exact => write!(f, "exact"),
            CheckMode::Statistical => write!(f, "statistical"),
        }
    }
}

/// One checked inequality.
#[derive(Clone, Debug)]
pub struct BoundReport {
    /// Catalog id: `theorem1` .. `theorem5`, `theorem6i`, `theorem6ii`,
    /// `theorem7`, `lemma1`, `ineq7` .. `ineq10`, `phi_size`.
    pub check: String,
    pub mode: CheckMode,
    pub lhs: f64,
    /// Standard error of `lhs` for statistical checks.
    pub stderr: Option<f64>,
    pub rhs: f64,
    pub holds: bool,
    pub note: String,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "check,mode,lhs,stderr,rhs,holds,note";

    /// One CSV row; commas in the note are replaced by semicolons so the
    /// file stays a plain comma-separated table.
    pub fn csv_row(&self) -> String {
        let stderr = match self.stderr {
            Some(se) => format!("{se:.6e}"),
            None => String::new(),
        };
        format!(
            "{},{},{:.6e},{},{:.6e},{},{}",
            self.check,
            self.mode,
            self.lhs,
            stderr,
            self.rhs,
            self.holds,
            self.note.replace(',', ";")
        )
    }
}

/// `s_alpha = |A| alpha^-3 (24 w^-1 + 12)`, the master constant the
/// imitation bounds share.
pub fn s_alpha(action_count: usize, alpha: f64, prior_weight: f64) -> f64 {
    action_count as f64 * alpha.powi(-3) * (24.0 / prior_weight + 12.0)
}

/// T1 right-hand side.
pub fn t1_rhs(action_count: usize, alpha: f64, prior_weight: f64) -> f64 {
    s_alpha(action_count, alpha, prior_weight)
}

/// T2 right-hand side, `1 - alpha/w`. May be nonpositive (vacuous) when
/// `alpha >= w`.
pub fn t2_rhs(alpha: f64, prior_weight: f64) -> f64 {
    1.0 - alpha / prior_weight
}

/// T3 right-hand side; infinite (vacuous) unless `alpha < w`.
pub fn t3_rhs(action_count: usize, alpha: f64, prior_weight: f64) -> f64 {
    let margin = t2_rhs(alpha, prior_weight);
    if margin <= 0.0 {
        return f64::INFINITY;
    }
    s_alpha(action_count, alpha, prior_weight) / margin
}

/// T4 right-hand side at horizon `t`; infinite (vacuous) unless `alpha < w`.
pub fn t4_rhs(action_count: usize, alpha: f64, prior_weight: f64, t: usize) -> f64 {
    let margin = t2_rhs(alpha, prior_weight);
    if margin <= 0.0 {
        return f64::INFINITY;
    }
    let scale = (action_count as f64).cbrt() * (24.0 / prior_weight + 12.0).cbrt() / alpha;
    scale / margin.powi(2) * (t as f64).powf(2.0 / 3.0) - margin.ln()
}

/// T5 right-hand side for an event of demonstrator-law probability `p_b` at
/// horizon `t`. Returns `(bound, clamped)`; the bound is clamped to the
/// trivial 1 whenever the formula leaves its domain (log base nonpositive)
/// or exceeds 1, and `p_b = 0` forces the event to be impossible.
pub fn t5_rhs(s_alpha: f64, t: usize, p_b: f64) -> (f64, bool) {
    debug_assert!(p_b >= 0.0 && s_alpha > 0.0 && t > 0);
    if p_b <= 0.0 {
        return (0.0, false);
    }
    let t = t as f64;
    let lead = t.powi(2) * s_alpha;
    let inner = 1.0 + t.powf(2.0 / 3.0) * s_alpha.cbrt() / (3.0 * p_b.cbrt());
    let base = (lead / (27.0 * p_b)).ln() - 3.0 * inner.ln().ln();
    if !(base > 0.0) {
        return (1.0, true);
    }
    let bound = lead / base.powi(3);
    if bound > 1.0 {
        (1.0, true)
    } else {
        (bound, false)
    }
}

/// T6(i) right-hand side.
pub fn t6i_rhs(alpha: f64, prior_weight: f64) -> f64 {
    alpha.powi(-3) * (24.0 / prior_weight + 12.0)
}

/// T6(ii) right-hand side.
pub fn t6ii_rhs(alphabet_size: usize, alpha: f64, prior_weight: f64) -> f64 {
    alphabet_size as f64 * t6i_rhs(alpha, prior_weight)
}

/// T7 right-hand side.
pub fn t7_rhs(prior_weight: f64) -> f64 {
    6.0 / prior_weight + 3.0
}

/// L1's upper end; the lower end is 0.
pub fn l1_rhs(prior_weight: f64) -> f64 {
    1.0 / prior_weight
}
