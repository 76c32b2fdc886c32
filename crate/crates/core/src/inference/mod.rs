//! Bayesian fitting by block Gibbs sampling.
//!
//! One sweep, in fixed order:
//!
//! 1. redraw every missing temperature from its full conditional
//! 2. a random-walk move on `u` with the state paths summed out, then an
//!    exact redraw of each segment's state path by forward filtering,
//!    backward sampling
//! 3. redraw `(a0, a1)` from their conjugate Beta posterior, corrected by a
//!    Metropolis–Hastings step for the stationary initial-state probability
//! 4. random-walk Metropolis for `u, sigma, xi, mu, sigma_n2, phi, alpha,
//!    alpha01`, in that order
//!
//! Proposal scales adapt during burn-in only.

mod chain;
mod ffbs;
mod impute;
mod metropolis;
mod prior;
mod transition;

pub use chain::{
    gibbs_sweep, initialize, log_posterior, run_chain, state_inclusion_probabilities, ChainOutput, ChainState,
    MCMCConfig, PosteriorSample, SweepInfo, WIDE_BLOCK_SCALE,
};
pub use ffbs::{ffbs_sample_states, log_marginal_likelihood};
pub use impute::{impute_missing, normal_full_conditional};
pub use metropolis::{collapsed_threshold_update, metropolis_update, Param, ProposalTuner};
pub use prior::{BetaPrior, NormalPrior, PriorSpec};
pub use transition::{count_transitions, transition_mh_step, update_transition_probs, TransitionCounts};
