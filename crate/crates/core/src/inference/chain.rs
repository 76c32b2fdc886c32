use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::impute::impute_missing;
use super::metropolis::{collapsed_threshold_update, metropolis_update, Param, ProposalTuner};
use super::prior::PriorSpec;
use super::transition::transition_mh_step;
use crate::model::{segment_terms, LogLikTerms, ModelParams, State, StateSequence, SummerSegment, TermMask};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCMCConfig {
    pub n_iterations: usize,
    pub n_burnin: usize,
    pub thinning: usize,
    pub seed: u64,
    pub adaptation_window: usize,
    pub target_acceptance: f64,
    /// Metropolis steps per missing day when the full conditional has no
    /// closed form.
    pub impute_mh_steps: usize,
}

impl Default for MCMCConfig {
    fn default() -> Self {
        Self {
            n_iterations: 50_000,
            n_burnin: 10_000,
            thinning: 10,
            seed: 1,
            adaptation_window: 100,
            target_acceptance: 0.3,
            impute_mh_steps: 5,
        }
    }
}

impl MCMCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burnin >= self.n_iterations {
            return Err(Error::InvalidInput(format!(
                "n_burnin ({}) must be smaller than n_iterations ({})",
                self.n_burnin, self.n_iterations
            )));
        }
        if self.thinning == 0 || self.adaptation_window == 0 {
            return Err(Error::InvalidInput("thinning and adaptation_window must be positive".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidInput("target_acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn n_retained(&self) -> usize {
        (self.n_iterations - self.n_burnin).div_ceil(self.thinning)
    }
}

/// Full sampler state: parameters, completed data, states and the cached
/// likelihood terms per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub params: ModelParams,
    /// Per-segment values with missing days filled by the current imputation.
    pub values: Vec<Vec<f64>>,
    pub states: Vec<StateSequence>,
    pub terms: Vec<LogLikTerms>,
    pub log_prior: f64,
    pub log_posterior: f64,
}

impl ChainState {
    /// Builds a state and evaluates every likelihood term from scratch.
    pub fn new(params: ModelParams, values: Vec<Vec<f64>>, states: Vec<StateSequence>, prior: &PriorSpec) -> Self {
        let mut s = Self {
            params,
            terms: vec![LogLikTerms::default(); values.len()],
            values,
            states,
            log_prior: prior.log_density(&params),
            log_posterior: f64::NAN,
        };
        s.recompute_terms();
        s
    }

    pub fn recompute_terms(&mut self) {
        for k in 0..self.values.len() {
            self.terms[k] = segment_terms(&self.values[k], self.states[k].as_slice(), &self.params, TermMask::ALL);
        }
        self.refresh_log_posterior();
    }

    pub(crate) fn refresh_log_posterior(&mut self) {
        // fixed summation order
        self.log_posterior = self.log_prior + self.terms.iter().map(LogLikTerms::total).sum::<f64>();
    }

    pub(crate) fn refresh_segment(&mut self, k: usize) {
        self.terms[k] = segment_terms(&self.values[k], self.states[k].as_slice(), &self.params, TermMask::ALL);
    }

    fn refresh_chain_terms(&mut self) {
        let mask = TermMask { chain: true, ..TermMask::NONE };
        for k in 0..self.values.len() {
            let t = segment_terms(&self.values[k], self.states[k].as_slice(), &self.params, mask);
            self.terms[k].replace(&t, mask);
        }
    }
}

/// One retained posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    pub params: ModelParams,
    pub states: Vec<StateSequence>,
    /// Per segment, the imputed values at that segment's missing days in day
    /// order.
    pub imputed: Vec<Vec<f64>>,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub samples: Vec<PosteriorSample>,
    /// Log posterior after every iteration, burn-in included.
    pub log_posterior_trace: Vec<f64>,
    /// Post-burn-in acceptance rate for each Metropolis parameter.
    pub acceptance: Vec<(&'static str, f64)>,
    /// Post-burn-in acceptance rate of the `(a0, a1)` step.
    pub transition_acceptance: f64,
    /// Post-burn-in acceptance rate of the locally scaled collapsed
    /// threshold move.
    pub threshold_block_acceptance: f64,
    /// Proposal scales after adaptation.
    pub final_scales: Vec<(&'static str, f64)>,
}

fn pooled_observed(segments: &[SummerSegment]) -> Vec<f64> {
    segments.iter().flat_map(|s| s.observed()).collect()
}

/// Hosking–Wallis probability-weighted-moment estimates `(sigma, xi)` for
/// excesses over the threshold.
fn pwm_gpd(excesses: &[f64]) -> Option<(f64, f64)> {
    let n = excesses.len();
    if n < 3 {
        return None;
    }
    let sorted = stats::sorted_finite(excesses);
    let a0 = stats::mean(&sorted);
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| x * (1.0 - (i as f64 + 1.0 - 0.35) / n as f64))
        .sum::<f64>()
        / n as f64;
    let d = a0 - 2.0 * a1;
    if !(d.abs() > 1e-12) {
        return None;
    }
    let k = a0 / d - 2.0;
    let sigma = 2.0 * a0 * a1 / d;
    (sigma > 0.0 && sigma.is_finite()).then_some((sigma, -k))
}

/// Starting point: threshold at the 0.98 empirical quantile, states by
/// thresholding, AR(1) moments on the remaining days, PWM on exceedances,
/// both dependence parameters at 0.7 and smoothed transition frequencies.
pub fn initialize(segments: &[SummerSegment], prior: &PriorSpec) -> Result<ChainState> {
    if segments.is_empty() {
        return Err(Error::InvalidInput("no segments".into()));
    }
    let pooled = pooled_observed(segments);
    if pooled.len() < 10 {
        return Err(Error::InvalidInput(format!("only {} observed values", pooled.len())));
    }
    let u = stats::quantile(&pooled, PriorSpec::U_CENTER_QUANTILE);

    let below: Vec<f64> = pooled.iter().copied().filter(|&y| y <= u).collect();
    let mu = stats::mean(&below);
    let var0 = stats::variance(&below).max(1e-6);
    let (mut num, mut den) = (0.0, 0.0);
    for seg in segments {
        for t in 1..seg.len() {
            if let (Some(a), Some(b)) = (seg.get(t - 1), seg.get(t)) {
                if a <= u && b <= u {
                    num += (a - mu) * (b - mu);
                    den += (a - mu) * (a - mu);
                }
            }
        }
    }
    let phi = if den > 0.0 { (num / den).clamp(0.05, 0.95) } else { 0.5 };
    let sigma_n2 = var0 * (1.0 - phi * phi);

    let excesses: Vec<f64> = pooled.iter().filter(|&&y| y > u).map(|y| y - u).collect();
    let max_excess = excesses.iter().copied().fold(0.0, f64::max);
    let (sigma, mut xi) = pwm_gpd(&excesses).unwrap_or((var0.sqrt(), -0.1));
    xi = xi.clamp(-0.45, 0.45);
    if xi < 0.0 && -sigma / xi <= max_excess {
        // pull the upper endpoint past the largest observed excess
        xi = (-sigma / (1.5 * max_excess + 1e-3)).max(-0.45);
    }

    let mut values = Vec::with_capacity(segments.len());
    let mut states = Vec::with_capacity(segments.len());
    for seg in segments {
        let v: Vec<f64> = (0..seg.len()).map(|t| seg.get(t).unwrap_or(mu)).collect();
        let s: Vec<State> = (0..seg.len())
            .map(|t| if !seg.missing[t] && v[t] > u { State::HeatWave } else { State::Normal })
            .collect();
        values.push(v);
        states.push(StateSequence(s));
    }
    let c = super::transition::count_transitions(&states);
    let a0 = (c.n[0][1] as f64 + 1.0) / ((c.n[0][0] + c.n[0][1]) as f64 + 2.0);
    let a1 = (c.n[1][1] as f64 + 1.0) / ((c.n[1][0] + c.n[1][1]) as f64 + 2.0);

    let params = ModelParams { a0, a1, u, sigma, xi, mu, sigma_n2, phi, alpha: 0.7, alpha01: 0.7 };
    params
        .validate()
        .map_err(|e| Error::Initialization(format!("{e}; check de-seasonalization and units (°C)")))?;
    let state = ChainState::new(params, values, states, prior);
    if !state.log_posterior.is_finite() {
        return Err(Error::Initialization(format!(
            "initial log posterior is {}; check de-seasonalization and units (°C)",
            state.log_posterior
        )));
    }
    Ok(state)
}

/// `log p(θ) + Σ log p(y_k, s_k | θ)` evaluated from scratch.
pub fn log_posterior(
    values: &[Vec<f64>],
    states: &[StateSequence],
    params: &ModelParams,
    prior: &PriorSpec,
) -> f64 {
    let lik: f64 = values
        .iter()
        .zip(states)
        .map(|(v, s)| segment_terms(v, s.as_slice(), params, TermMask::ALL).total())
        .sum();
    prior.log_density(params) + lik
}

/// Proposal sd (°C) of the non-adapted half of the collapsed threshold move.
pub const WIDE_BLOCK_SCALE: f64 = 0.5;

/// Which updates were accepted in one sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepInfo {
    pub transition_accepted: bool,
    pub threshold_block_accepted: bool,
    pub accepted: [bool; 8],
}

/// One Gibbs sweep: impute, states, transitions, then each Metropolis
/// parameter in [`Param::ALL`] order. Acceptances are recorded in `tuner`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    segments: &[SummerSegment],
    prior: &PriorSpec,
    tuner: &mut ProposalTuner,
    impute_mh_steps: usize,
    rng: &mut R,
) -> Result<SweepInfo> {
    let mut info = SweepInfo::default();
    for (k, seg) in segments.iter().enumerate() {
        if seg.n_missing() > 0 {
            impute_missing(seg, &mut state.values[k], &state.states[k], &state.params, impute_mh_steps, rng);
        }
    }
    // half the proposals are wide so the chain keeps crossing between
    // threshold modes after the local scale has shrunk
    let wide = rng.random::<bool>();
    let scale = if wide { WIDE_BLOCK_SCALE } else { tuner.block_scale() };
    info.threshold_block_accepted = collapsed_threshold_update(state, prior, scale, rng)?;
    if !wide {
        tuner.record_block(info.threshold_block_accepted);
    }
    let ((a0, a1), acc) = transition_mh_step(&state.params, &state.states, prior, rng);
    info.transition_accepted = acc;
    state.params.a0 = a0;
    state.params.a1 = a1;
    state.log_prior = prior.log_density(&state.params);
    state.refresh_chain_terms();
    state.refresh_log_posterior();
    for param in Param::ALL {
        let acc = metropolis_update(param, state, prior, tuner.scale(param), rng);
        tuner.record(param, acc);
        info.accepted[param.index()] = acc;
    }
    if !state.log_posterior.is_finite() {
        return Err(Error::Numeric(format!("log posterior became {}", state.log_posterior)));
    }
    Ok(info)
}

fn snapshot(state: &ChainState, segments: &[SummerSegment]) -> PosteriorSample {
    PosteriorSample {
        params: state.params,
        states: state.states.clone(),
        imputed: segments
            .iter()
            .zip(&state.values)
            .map(|(seg, v)| (0..seg.len()).filter(|&t| seg.missing[t]).map(|t| v[t]).collect())
            .collect(),
        log_posterior: state.log_posterior,
    }
}

/// Runs one chain. Proposal scales adapt every `adaptation_window`
/// iterations during burn-in and stay fixed afterwards. Every
/// `thinning`-th post-burn-in iteration is retained.
pub fn run_chain(segments: &[SummerSegment], prior: &PriorSpec, config: &MCMCConfig) -> Result<ChainOutput> {
    config.validate()?;
    prior.validate()?;
    let mut state = initialize(segments, prior)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tuner = ProposalTuner::new(config.adaptation_window, config.target_acceptance);
    let mut samples = Vec::with_capacity(config.n_retained());
    let mut trace = Vec::with_capacity(config.n_iterations);
    let (mut trans_acc, mut trans_n) = (0u64, 0u64);
    for it in 0..config.n_iterations {
        if it == config.n_burnin {
            tuner.reset_counts();
        }
        let info = gibbs_sweep(&mut state, segments, prior, &mut tuner, config.impute_mh_steps, &mut rng)?;
        if it < config.n_burnin {
            if (it + 1) % config.adaptation_window == 0 {
                tuner.adapt();
            }
        } else {
            trans_n += 1;
            trans_acc += u64::from(info.transition_accepted);
            if (it - config.n_burnin).is_multiple_of(config.thinning) {
                samples.push(snapshot(&state, segments));
            }
        }
        trace.push(state.log_posterior);
    }
    Ok(ChainOutput {
        samples,
        log_posterior_trace: trace,
        acceptance: Param::ALL.iter().map(|&p| (p.name(), tuner.acceptance_rate(p))).collect(),
        transition_acceptance: trans_acc as f64 / trans_n.max(1) as f64,
        threshold_block_acceptance: tuner.block_acceptance_rate(),
        final_scales: Param::ALL
            .iter()
            .map(|&p| (p.name(), tuner.scale(p)))
            .chain([("u_block", tuner.block_scale())])
            .collect(),
    })
}

/// Per-segment, per-day fraction of samples with `S_t = 1`.
pub fn state_inclusion_probabilities(samples: &[PosteriorSample]) -> Vec<Vec<f64>> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let mut out: Vec<Vec<f64>> = first.states.iter().map(|s| vec![0.0; s.len()]).collect();
    for sample in samples {
        for (acc, s) in out.iter_mut().zip(&sample.states) {
            for (a, st) in acc.iter_mut().zip(s.as_slice()) {
                *a += f64::from(u8::from(st.is_heat_wave()));
            }
        }
    }
    let n = samples.len() as f64;
    for row in &mut out {
        for a in row.iter_mut() {
            *a /= n;
        }
    }
    out
}
