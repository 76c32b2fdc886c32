use rand::Rng;

use crate::model::{initial_log_density, ModelParams, State, StateSequence};
use crate::model::copula_conditional;
use crate::{stats, Error, Result};

/// Log pairwise potentials `ψ_t(i, j) = log A[i, j] + log f(y_t | y_{t-1}, j, i)`
/// for `t = 1..T-1`, flattened as `[t-1][2*i + j]`.
fn pair_potentials(values: &[f64], p: &ModelParams) -> Vec<[f64; 4]> {
    let lt = [
        [p.log_transition(State::Normal, State::Normal), p.log_transition(State::Normal, State::HeatWave)],
        [p.log_transition(State::HeatWave, State::Normal), p.log_transition(State::HeatWave, State::HeatWave)],
    ];
    let mut margins = [p.margin_point(values[0], State::Normal), p.margin_point(values[0], State::HeatWave)];
    let mut out = Vec::with_capacity(values.len().saturating_sub(1));
    for t in 1..values.len() {
        let cur = [p.margin_point(values[t], State::Normal), p.margin_point(values[t], State::HeatWave)];
        let ar = {
            let mean = p.mu + p.phi * (values[t - 1] - p.mu);
            let z = (values[t] - mean) / p.sigma_n2.sqrt();
            -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI * p.sigma_n2).ln()
        };
        let mut psi = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                let (si, sj) = (State::from_index(i), State::from_index(j));
                let e = if i == 0 && j == 0 {
                    ar
                } else {
                    copula_conditional(margins[i], cur[j], p.copula_alpha(si, sj))
                };
                psi[2 * i + j] = lt[i][j] + e;
            }
        }
        out.push(psi);
        margins = cur;
    }
    out
}

fn sample_log_weights<R: Rng + ?Sized>(w: [f64; 2], rng: &mut R) -> usize {
    let m = w[0].max(w[1]);
    let p1 = (w[1] - m).exp() / ((w[0] - m).exp() + (w[1] - m).exp());
    usize::from(rng.random::<f64>() < p1)
}

struct Filter {
    psi: Vec<[f64; 4]>,
    /// Normalized forward log weights.
    alpha: Vec<[f64; 2]>,
    /// `log p(y_1..y_T | θ)`.
    log_marginal: f64,
}

fn forward(values: &[f64], params: &ModelParams, segment: usize) -> Result<Filter> {
    let n = values.len();
    if let Some(day) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "segment {segment}: value at day index {day} is not finite; impute before sampling states"
        )));
    }
    let psi = pair_potentials(values, params);
    let mut alpha = Vec::with_capacity(n);
    let first = [
        params.log_initial_state(State::Normal) + initial_log_density(values[0], State::Normal, params),
        params.log_initial_state(State::HeatWave) + initial_log_density(values[0], State::HeatWave, params),
    ];
    let mut log_marginal = stats::log_sum_exp(&first);
    if log_marginal == f64::NEG_INFINITY {
        return Err(Error::NoFeasibleState { segment, day: 0 });
    }
    alpha.push([first[0] - log_marginal, first[1] - log_marginal]);
    for t in 1..n {
        let prev = alpha[t - 1];
        let ps = &psi[t - 1];
        let cur = [
            stats::log_sum_exp(&[prev[0] + ps[0], prev[1] + ps[2]]),
            stats::log_sum_exp(&[prev[0] + ps[1], prev[1] + ps[3]]),
        ];
        let c = stats::log_sum_exp(&cur);
        if !c.is_finite() {
            if c.is_nan() || cur.iter().any(|x| x.is_nan()) {
                return Err(Error::Numeric(format!(
                    "segment {segment}: filter produced NaN at day index {t}"
                )));
            }
            return Err(Error::NoFeasibleState { segment, day: t });
        }
        // per-step normalization keeps the recursion bounded
        log_marginal += c;
        alpha.push([cur[0] - c, cur[1] - c]);
    }
    Ok(Filter { psi, alpha, log_marginal })
}

/// Exact draw of the state path from `P(S | y, θ)`.
///
/// The forward pass carries `log P(s_t, y_1..y_t)` over the two values of
/// `s_t`; because the emission at day `t` depends on `(s_{t-1}, s_t)`, each
/// step marginalizes over the previous state through the pairwise
/// potential. `segment` is only used to label errors.
pub fn ffbs_sample_states<R: Rng + ?Sized>(
    values: &[f64],
    params: &ModelParams,
    segment: usize,
    rng: &mut R,
) -> Result<StateSequence> {
    let n = values.len();
    if n == 0 {
        return Ok(StateSequence(Vec::new()));
    }
    let Filter { psi, alpha, .. } = forward(values, params, segment)?;
    let mut states = vec![State::Normal; n];
    let mut next = sample_log_weights(alpha[n - 1], rng);
    states[n - 1] = State::from_index(next);
    for t in (0..n - 1).rev() {
        let ps = &psi[t];
        let w = [alpha[t][0] + ps[next], alpha[t][1] + ps[2 + next]];
        next = sample_log_weights(w, rng);
        states[t] = State::from_index(next);
    }
    Ok(StateSequence(states))
}

/// `log p(y | θ)` with the state path summed out; `-inf` when no path is
/// feasible.
pub fn log_marginal_likelihood(values: &[f64], params: &ModelParams) -> Result<f64> {
    if values.is_empty() {
        return Ok(0.0);
    }
    match forward(values, params, 0) {
        Ok(f) => Ok(f.log_marginal),
        Err(Error::NoFeasibleState { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}
