//! Conditional densities and the complete-data likelihood of one segment.

use super::copula::{conditional_cdf_from_neg_log, log_copula_factor, pair_log_density};
use super::{ModelParams, State, StateSequence};
use crate::{Error, Result};

/// Stationary distribution `(π0, π1)` of the two-state chain.
pub fn stationary_state_distribution(a0: f64, a1: f64) -> (f64, f64) {
    let p1 = a0 / (1.0 + a0 - a1);
    (1.0 - p1, p1)
}

fn ar_log_density(y: f64, y_prev: f64, p: &ModelParams) -> f64 {
    let mean = p.mu + p.phi * (y_prev - p.mu);
    let z = (y - mean) / p.sigma_n2.sqrt();
    -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI * p.sigma_n2).ln()
}

/// Joint log density of `(y1, y2)` for consecutive states `(s1, s2)`.
///
/// The three copula cases use GPD margins for heat-wave days and
/// `N(mu, sigma_n2)` for the other day, with `alpha` when both days are in
/// the heat-wave state and `alpha01` otherwise. For `(Normal, Normal)` this
/// is the stationary AR(1) pair density.
pub fn bivariate_log_density(y1: f64, y2: f64, s1: State, s2: State, p: &ModelParams) -> f64 {
    match (s1, s2) {
        (State::Normal, State::Normal) => {
            p.stationary_normal().log_density(y1) + ar_log_density(y2, y1, p)
        }
        _ => pair_log_density(
            p.margin_point(y1, s1),
            p.margin_point(y2, s2),
            p.copula_alpha(s1, s2),
        ),
    }
}

/// `log f(y_t | y_{t-1}, s_t, s_{t-1})`.
///
/// Copula cases divide the joint density by the margin of `y_prev` that was
/// used to build it: GPD after a heat-wave day, `N(mu, sigma_n2)` otherwise.
pub fn conditional_log_density(
    y: f64,
    y_prev: f64,
    state: State,
    prev: State,
    p: &ModelParams,
) -> f64 {
    match (prev, state) {
        (State::Normal, State::Normal) => ar_log_density(y, y_prev, p),
        _ => {
            let mp = p.margin_point(y_prev, prev);
            let mc = p.margin_point(y, state);
            copula_conditional(mp, mc, p.copula_alpha(prev, state))
        }
    }
}

pub(crate) fn copula_conditional(
    prev: super::MarginPoint,
    cur: super::MarginPoint,
    alpha: f64,
) -> f64 {
    if prev.log_density == f64::NEG_INFINITY || cur.log_density == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    cur.log_density + log_copula_factor(prev.neg_log_cdf, cur.neg_log_cdf, alpha)
}

/// `P(Y_t ≤ y | y_{t-1}, s_t, s_{t-1})`. For the copula cases `y_prev` must
/// lie strictly inside the support of its margin.
pub fn conditional_cdf(y: f64, y_prev: f64, state: State, prev: State, p: &ModelParams) -> f64 {
    match (prev, state) {
        (State::Normal, State::Normal) => {
            let mean = p.mu + p.phi * (y_prev - p.mu);
            super::NormalMargin::new(mean, p.sigma_n2.sqrt()).cdf(y)
        }
        _ => {
            let t_prev = p.margin_point(y_prev, prev).neg_log_cdf;
            let t_cur = p.margin_point(y, state).neg_log_cdf;
            conditional_cdf_from_neg_log(t_prev, t_cur, p.copula_alpha(prev, state)).exp()
        }
    }
}

/// Density of the first day of a segment: GPD in the heat-wave state, the
/// stationary AR(1) marginal otherwise.
pub fn initial_log_density(y: f64, state: State, p: &ModelParams) -> f64 {
    match state {
        State::HeatWave => p.gpd().log_density(y),
        State::Normal => p.stationary_normal().log_density(y),
    }
}

/// Which groups of likelihood terms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermMask {
    pub init_normal: bool,
    pub init_heat: bool,
    pub pair00: bool,
    pub pair11: bool,
    pub pair_mixed: bool,
    pub chain: bool,
}

impl TermMask {
    pub const ALL: TermMask = TermMask {
        init_normal: true,
        init_heat: true,
        pair00: true,
        pair11: true,
        pair_mixed: true,
        chain: true,
    };
    pub const NONE: TermMask = TermMask {
        init_normal: false,
        init_heat: false,
        pair00: false,
        pair11: false,
        pair_mixed: false,
        chain: false,
    };
}

/// Log-likelihood of one segment split by term group, so that a parameter
/// update only re-evaluates the groups it touches.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogLikTerms {
    pub init_normal: f64,
    pub init_heat: f64,
    pub pair00: f64,
    pub pair11: f64,
    pub pair_mixed: f64,
    /// `log π(s_1) + Σ log A[s_{t-1}, s_t]`.
    pub chain: f64,
}

impl LogLikTerms {
    pub fn total(&self) -> f64 {
        self.init_normal + self.init_heat + self.pair00 + self.pair11 + self.pair_mixed + self.chain
    }

    /// Sum of the groups selected by `mask`.
    pub fn masked_total(&self, mask: TermMask) -> f64 {
        let pick = |on: bool, v: f64| if on { v } else { 0.0 };
        pick(mask.init_normal, self.init_normal)
            + pick(mask.init_heat, self.init_heat)
            + pick(mask.pair00, self.pair00)
            + pick(mask.pair11, self.pair11)
            + pick(mask.pair_mixed, self.pair_mixed)
            + pick(mask.chain, self.chain)
    }

    /// Overwrites the groups selected by `mask` with those of `other`.
    pub fn replace(&mut self, other: &LogLikTerms, mask: TermMask) {
        if mask.init_normal {
            self.init_normal = other.init_normal;
        }
        if mask.init_heat {
            self.init_heat = other.init_heat;
        }
        if mask.pair00 {
            self.pair00 = other.pair00;
        }
        if mask.pair11 {
            self.pair11 = other.pair11;
        }
        if mask.pair_mixed {
            self.pair_mixed = other.pair_mixed;
        }
        if mask.chain {
            self.chain = other.chain;
        }
    }
}

/// Evaluates the masked likelihood groups for a complete (imputed) segment.
/// Groups outside the mask are left at zero.
pub fn segment_terms(
    values: &[f64],
    states: &[State],
    p: &ModelParams,
    mask: TermMask,
) -> LogLikTerms {
    debug_assert_eq!(values.len(), states.len());
    let mut out = LogLikTerms::default();
    if values.is_empty() {
        return out;
    }
    match states[0] {
        State::Normal if mask.init_normal => {
            out.init_normal = initial_log_density(values[0], State::Normal, p);
        }
        State::HeatWave if mask.init_heat => {
            out.init_heat = initial_log_density(values[0], State::HeatWave, p);
        }
        _ => {}
    }
    if mask.chain {
        let mut c = p.log_initial_state(states[0]);
        let lt = [
            [p.log_transition(State::Normal, State::Normal), p.log_transition(State::Normal, State::HeatWave)],
            [p.log_transition(State::HeatWave, State::Normal), p.log_transition(State::HeatWave, State::HeatWave)],
        ];
        for w in states.windows(2) {
            c += lt[w[0].index()][w[1].index()];
        }
        out.chain = c;
    }
    let mut prev_margin = None;
    for t in 1..values.len() {
        let (sp, sc) = (states[t - 1], states[t]);
        match (sp, sc) {
            (State::Normal, State::Normal) => {
                if mask.pair00 {
                    out.pair00 += ar_log_density(values[t], values[t - 1], p);
                }
                prev_margin = None;
            }
            _ => {
                let both_hot = sp == State::HeatWave && sc == State::HeatWave;
                let on = if both_hot { mask.pair11 } else { mask.pair_mixed };
                if !on {
                    prev_margin = None;
                    continue;
                }
                let mp = prev_margin.unwrap_or_else(|| p.margin_point(values[t - 1], sp));
                let mc = p.margin_point(values[t], sc);
                let term = copula_conditional(mp, mc, p.copula_alpha(sp, sc));
                if both_hot {
                    out.pair11 += term;
                } else {
                    out.pair_mixed += term;
                }
                prev_margin = Some(mc);
            }
        }
    }
    out
}

/// Complete-data log-likelihood `log p(y, s | θ)` of one segment: first-day
/// density, conditional densities, stationary initial state and transitions.
pub fn segment_log_likelihood(values: &[f64], states: &StateSequence, p: &ModelParams) -> Result<f64> {
    if values.len() != states.len() {
        return Err(Error::InvalidInput(format!(
            "{} values but {} states",
            values.len(),
            states.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidInput(format!(
            "value at day index {i} is missing; impute before evaluating the likelihood"
        )));
    }
    Ok(segment_terms(values, states.as_slice(), p, TermMask::ALL).total())
}
