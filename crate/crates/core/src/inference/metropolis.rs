use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::chain::ChainState;
use super::ffbs::{ffbs_sample_states, log_marginal_likelihood};
use super::prior::PriorSpec;
use crate::model::{segment_terms, ModelParams, TermMask};
use crate::Result;

/// Parameters updated by random-walk Metropolis, in sweep order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    U,
    Sigma,
    Xi,
    Mu,
    SigmaN2,
    Phi,
    Alpha,
    Alpha01,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log p(1 - p)` for `p = sigmoid(x)`, stable for large `|x|`.
fn log_sigmoid_jacobian(x: f64) -> f64 {
    -x.abs() - 2.0 * (-x.abs()).exp().ln_1p()
}

impl Param {
    pub const ALL: [Param; 8] = [
        Param::U,
        Param::Sigma,
        Param::Xi,
        Param::Mu,
        Param::SigmaN2,
        Param::Phi,
        Param::Alpha,
        Param::Alpha01,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::U => "u",
            Param::Sigma => "sigma",
            Param::Xi => "xi",
            Param::Mu => "mu",
            Param::SigmaN2 => "sigma_n2",
            Param::Phi => "phi",
            Param::Alpha => "alpha",
            Param::Alpha01 => "alpha01",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn get(self, p: &ModelParams) -> f64 {
        match self {
            Param::U => p.u,
            Param::Sigma => p.sigma,
            Param::Xi => p.xi,
            Param::Mu => p.mu,
            Param::SigmaN2 => p.sigma_n2,
            Param::Phi => p.phi,
            Param::Alpha => p.alpha,
            Param::Alpha01 => p.alpha01,
        }
    }

    pub fn set(self, p: &mut ModelParams, v: f64) {
        match self {
            Param::U => p.u = v,
            Param::Sigma => p.sigma = v,
            Param::Xi => p.xi = v,
            Param::Mu => p.mu = v,
            Param::SigmaN2 => p.sigma_n2 = v,
            Param::Phi => p.phi = v,
            Param::Alpha => p.alpha = v,
            Param::Alpha01 => p.alpha01 = v,
        }
    }

    /// Maps a parameter value to the unconstrained proposal scale.
    pub fn to_unconstrained(self, v: f64) -> f64 {
        match self {
            Param::U | Param::Mu => v,
            Param::Sigma | Param::SigmaN2 => v.ln(),
            Param::Xi => logit(v + 0.5),
            Param::Phi | Param::Alpha | Param::Alpha01 => logit(v),
        }
    }

    pub fn from_unconstrained(self, x: f64) -> f64 {
        match self {
            Param::U | Param::Mu => x,
            Param::Sigma | Param::SigmaN2 => x.exp(),
            Param::Xi => sigmoid(x) - 0.5,
            Param::Phi | Param::Alpha | Param::Alpha01 => sigmoid(x),
        }
    }

    /// Log Jacobian from the proposal scale to the coordinates in which the
    /// prior density is expressed. Zero for `sigma` and `sigma_n2` because
    /// their priors are already on the log scale.
    pub fn log_jacobian(self, x: f64) -> f64 {
        match self {
            Param::Xi | Param::Phi | Param::Alpha | Param::Alpha01 => log_sigmoid_jacobian(x),
            _ => 0.0,
        }
    }

    /// Likelihood groups that depend on this parameter.
    pub fn mask(self) -> TermMask {
        let mut m = TermMask::NONE;
        match self {
            Param::U | Param::Sigma | Param::Xi => {
                m.init_heat = true;
                m.pair11 = true;
                m.pair_mixed = true;
            }
            Param::Mu | Param::SigmaN2 => {
                m.init_normal = true;
                m.pair00 = true;
                m.pair_mixed = true;
            }
            Param::Phi => {
                m.init_normal = true;
                m.pair00 = true;
            }
            Param::Alpha => m.pair11 = true,
            Param::Alpha01 => m.pair_mixed = true,
        }
        m
    }

    pub fn default_scale(self) -> f64 {
        match self {
            Param::U => 0.1,
            Param::Sigma => 0.1,
            Param::Xi => 0.2,
            Param::Mu => 0.05,
            Param::SigmaN2 => 0.05,
            Param::Phi => 0.1,
            Param::Alpha => 0.2,
            Param::Alpha01 => 0.3,
        }
    }
}

const N_SLOTS: usize = 9;
const BLOCK_SLOT: usize = 8;

/// Per-parameter proposal scales with windowed adaptation, plus one slot for
/// the collapsed threshold move.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalTuner {
    pub scales: [f64; N_SLOTS],
    pub window: usize,
    pub target: f64,
    window_accepts: [u32; N_SLOTS],
    window_tries: [u32; N_SLOTS],
    accepts: [u64; N_SLOTS],
    tries: [u64; N_SLOTS],
}

impl ProposalTuner {
    const MIN_SCALE: f64 = 1e-5;
    const MAX_SCALE: f64 = 20.0;

    pub const DEFAULT_BLOCK_SCALE: f64 = 0.2;

    pub fn new(window: usize, target: f64) -> Self {
        let mut scales = [Self::DEFAULT_BLOCK_SCALE; N_SLOTS];
        for p in Param::ALL {
            scales[p.index()] = p.default_scale();
        }
        Self {
            scales,
            window: window.max(1),
            target,
            window_accepts: [0; N_SLOTS],
            window_tries: [0; N_SLOTS],
            accepts: [0; N_SLOTS],
            tries: [0; N_SLOTS],
        }
    }

    pub fn scale(&self, p: Param) -> f64 {
        self.scales[p.index()]
    }

    pub fn block_scale(&self) -> f64 {
        self.scales[BLOCK_SLOT]
    }

    pub fn record(&mut self, p: Param, accepted: bool) {
        self.record_slot(p.index(), accepted);
    }

    pub fn record_block(&mut self, accepted: bool) {
        self.record_slot(BLOCK_SLOT, accepted);
    }

    fn record_slot(&mut self, i: usize, accepted: bool) {
        self.window_tries[i] += 1;
        self.tries[i] += 1;
        if accepted {
            self.window_accepts[i] += 1;
            self.accepts[i] += 1;
        }
    }

    /// Rescales every proposal whose window is full:
    /// `scale *= exp(2 (rate - target))`.
    pub fn adapt(&mut self) {
        for i in 0..N_SLOTS {
            if self.window_tries[i] as usize >= self.window {
                let rate = f64::from(self.window_accepts[i]) / f64::from(self.window_tries[i]);
                self.scales[i] = (self.scales[i] * (2.0 * (rate - self.target)).exp())
                    .clamp(Self::MIN_SCALE, Self::MAX_SCALE);
                self.window_accepts[i] = 0;
                self.window_tries[i] = 0;
            }
        }
    }

    /// Clears the running acceptance counts, e.g. at the end of burn-in.
    pub fn reset_counts(&mut self) {
        self.accepts = [0; N_SLOTS];
        self.tries = [0; N_SLOTS];
        self.window_accepts = [0; N_SLOTS];
        self.window_tries = [0; N_SLOTS];
    }

    pub fn acceptance_rate(&self, p: Param) -> f64 {
        self.slot_rate(p.index())
    }

    pub fn block_acceptance_rate(&self) -> f64 {
        self.slot_rate(BLOCK_SLOT)
    }

    fn slot_rate(&self, i: usize) -> f64 {
        if self.tries[i] == 0 {
            f64::NAN
        } else {
            self.accepts[i] as f64 / self.tries[i] as f64
        }
    }
}

/// One random-walk Metropolis update of `param` with proposal sd `scale` on
/// the transformed scale. Only the likelihood groups in [`Param::mask`] are
/// re-evaluated. Returns whether the proposal was accepted.
pub fn metropolis_update<R: Rng + ?Sized>(
    param: Param,
    state: &mut ChainState,
    prior: &PriorSpec,
    scale: f64,
    rng: &mut R,
) -> bool {
    let x = param.to_unconstrained(param.get(&state.params));
    let eps: f64 = StandardNormal.sample(rng);
    let x_new = x + scale * eps;
    let mut proposal = state.params;
    param.set(&mut proposal, param.from_unconstrained(x_new));
    if proposal.validate().is_err() {
        return false;
    }
    let log_prior_new = prior.log_density(&proposal);
    if log_prior_new == f64::NEG_INFINITY {
        return false;
    }
    let mask = param.mask();
    let mut delta = log_prior_new - state.log_prior + param.log_jacobian(x_new) - param.log_jacobian(x);
    let mut new_terms = Vec::with_capacity(state.values.len());
    for (k, values) in state.values.iter().enumerate() {
        let t = segment_terms(values, state.states[k].as_slice(), &proposal, mask);
        let d = t.masked_total(mask) - state.terms[k].masked_total(mask);
        if d.is_nan() || d == f64::NEG_INFINITY {
            return false;
        }
        delta += d;
        new_terms.push(t);
    }
    if !(rng.random::<f64>().ln() < delta) {
        return false;
    }
    for (old, new) in state.terms.iter_mut().zip(&new_terms) {
        old.replace(new, mask);
    }
    state.params = proposal;
    state.log_prior = log_prior_new;
    state.refresh_log_posterior();
    true
}

/// Random-walk update of `u` against `p(u | y, θ_{-u})` with the state paths
/// summed out, followed by an exact FFBS redraw of every segment's states
/// at the resulting parameters. A fixed-state `u` move cannot cross days
/// whose current label contradicts the proposal; this one can.
pub fn collapsed_threshold_update<R: Rng + ?Sized>(
    state: &mut ChainState,
    prior: &PriorSpec,
    scale: f64,
    rng: &mut R,
) -> Result<bool> {
    let eps: f64 = StandardNormal.sample(rng);
    let mut proposal = state.params;
    proposal.u += scale * eps;
    let mut accepted = false;
    let log_prior_new = prior.log_density(&proposal);
    if proposal.validate().is_ok() && log_prior_new > f64::NEG_INFINITY {
        let mut delta = log_prior_new - state.log_prior;
        for values in &state.values {
            delta += log_marginal_likelihood(values, &proposal)? - log_marginal_likelihood(values, &state.params)?;
        }
        if rng.random::<f64>().ln() < delta {
            state.params = proposal;
            state.log_prior = log_prior_new;
            accepted = true;
        }
    }
    for k in 0..state.values.len() {
        state.states[k] = ffbs_sample_states(&state.values[k], &state.params, k, rng)?;
        state.refresh_segment(k);
    }
    state.refresh_log_posterior();
    Ok(accepted)
}
