use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{conditional_log_density, initial_log_density, ModelParams, State, StateSequence, SummerSegment};

/// Closed-form full conditional `(mean, variance)` of day `t` when every
/// density touching it is Gaussian, i.e. the states of `t` and its
/// neighbours are all normal. `None` otherwise.
pub fn normal_full_conditional(values: &[f64], states: &[State], t: usize, p: &ModelParams) -> Option<(f64, f64)> {
    let n = values.len();
    let lo = t.saturating_sub(1);
    let hi = (t + 1).min(n - 1);
    if states[lo..=hi].iter().any(|s| s.is_heat_wave()) {
        return None;
    }
    let (mu, phi, v) = (p.mu, p.phi, p.sigma_n2);
    Some(if t == 0 {
        // stationary start times the AR step to day 2
        (mu + phi * (values[1] - mu), v)
    } else if t == n - 1 {
        (mu + phi * (values[t - 1] - mu), v)
    } else {
        let m = mu + phi * ((values[t - 1] - mu) + (values[t + 1] - mu)) / (1.0 + phi * phi);
        (m, v / (1.0 + phi * phi))
    })
}

/// Log full conditional of `y_t`, up to a constant.
fn log_full_conditional(y: f64, values: &[f64], states: &[State], t: usize, p: &ModelParams) -> f64 {
    let own = if t == 0 {
        initial_log_density(y, states[0], p)
    } else {
        conditional_log_density(y, values[t - 1], states[t], states[t - 1], p)
    };
    if own == f64::NEG_INFINITY || t + 1 == values.len() {
        return own;
    }
    own + conditional_log_density(values[t + 1], y, states[t + 1], states[t], p)
}

/// Redraws every missing day of `segment` in place in `values`, in day
/// order, from its full conditional given the neighbouring values and the
/// fixed states. All-Gaussian neighbourhoods are drawn exactly; otherwise
/// `mh_steps` random-walk Metropolis steps are taken from the current value.
pub fn impute_missing<R: Rng + ?Sized>(
    segment: &SummerSegment,
    values: &mut [f64],
    states: &StateSequence,
    params: &ModelParams,
    mh_steps: usize,
    rng: &mut R,
) {
    let s = states.as_slice();
    for t in (0..values.len()).filter(|&t| segment.missing[t]) {
        if let Some((m, v)) = normal_full_conditional(values, s, t, params) {
            let z: f64 = StandardNormal.sample(rng);
            values[t] = m + v.sqrt() * z;
            continue;
        }
        let step = if s[t].is_heat_wave() {
            0.5 * params.sigma
        } else {
            params.sigma_n2.sqrt()
        };
        let mut cur = log_full_conditional(values[t], values, s, t, params);
        for _ in 0..mh_steps {
            let z: f64 = StandardNormal.sample(rng);
            let y = values[t] + step * z;
            let prop = log_full_conditional(y, values, s, t, params);
            if prop > f64::NEG_INFINITY && rng.random::<f64>().ln() < prop - cur {
                values[t] = y;
                cur = prop;
            }
        }
    }
}
