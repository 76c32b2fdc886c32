use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{conditional_cdf_from_neg_log, ModelParams, State, StateSequence};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSummer {
    pub values: Vec<f64>,
    pub states: StateSequence,
    /// Index of the posterior draw whose parameters generated this summer.
    pub source_draw: usize,
}

const BISECT_LO: f64 = -40.0;
const BISECT_MAX_ITER: usize = 200;
const PROB_TOL: f64 = 1e-10;

fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

/// Draws `t = -log F(y_t)` on the current day's margin given the previous
/// day's `t_prev`, by bisection of the conditional CDF on `ln t`.
///
/// The bracket `[-40, ln 745]` covers every `t` whose margin quantile is
/// representable; the search stops once the CDF is within 1e-10 of the
/// target probability.
pub fn sample_conditional<R: Rng + ?Sized>(t_prev: f64, alpha: f64, rng: &mut R) -> Result<f64> {
    let v = open_uniform(rng);
    if alpha == 1.0 {
        return Ok(-v.ln());
    }
    let mut lo = BISECT_LO;
    let mut hi = 745f64.ln();
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let h = conditional_cdf_from_neg_log(t_prev, mid.exp(), alpha).exp();
        if (h - v).abs() <= PROB_TOL || hi - lo < 1e-13 {
            return Ok(mid.exp());
        }
        // H decreases in t
        if h > v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "conditional CDF inversion did not converge (t_prev = {t_prev}, alpha = {alpha}, v = {v})"
    )))
}

/// Markov chain path of length `n` started from the stationary distribution.
pub fn simulate_states<R: Rng + ?Sized>(params: &ModelParams, n: usize, rng: &mut R) -> StateSequence {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return StateSequence(out);
    }
    let (_, p1) = params.stationary();
    let mut s = if rng.random::<f64>() < p1 { State::HeatWave } else { State::Normal };
    out.push(s);
    for _ in 1..n {
        let p = params.transition_prob(s, State::HeatWave);
        s = if rng.random::<f64>() < p { State::HeatWave } else { State::Normal };
        out.push(s);
    }
    StateSequence(out)
}

fn neg_log_cdf(params: &ModelParams, y: f64, s: State) -> f64 {
    params.margin_point(y, s).neg_log_cdf
}

fn quantile(params: &ModelParams, t: f64, s: State) -> f64 {
    match s {
        State::HeatWave => params.gpd().quantile_from_neg_log_cdf(t),
        State::Normal => params.normal_margin().quantile_from_neg_log_cdf(t),
    }
}

/// Temperatures along a given state path.
pub fn simulate_values<R: Rng + ?Sized>(states: &StateSequence, params: &ModelParams, rng: &mut R) -> Result<Vec<f64>> {
    params.validate()?;
    let s = states.as_slice();
    let mut y = Vec::with_capacity(s.len());
    if s.is_empty() {
        return Ok(y);
    }
    let first = match s[0] {
        State::HeatWave => params.gpd().quantile_from_neg_log_cdf(-open_uniform(rng).ln()),
        State::Normal => {
            let z: f64 = StandardNormal.sample(rng);
            params.stationary_normal().mean + params.stationary_normal().sd * z
        }
    };
    y.push(first);
    let sd = params.sigma_n2.sqrt();
    for t in 1..s.len() {
        let (sp, sc) = (s[t - 1], s[t]);
        let next = if sp == State::Normal && sc == State::Normal {
            let z: f64 = StandardNormal.sample(rng);
            params.mu + params.phi * (y[t - 1] - params.mu) + sd * z
        } else {
            let t_prev = neg_log_cdf(params, y[t - 1], sp);
            let t_cur = sample_conditional(t_prev, params.copula_alpha(sp, sc), rng)?;
            let v = quantile(params, t_cur, sc);
            if sc == State::HeatWave {
                // rounding in the quantile can land a hair below the threshold
                v.max(params.u)
            } else {
                v
            }
        };
        if !next.is_finite() {
            return Err(Error::Numeric(format!("non-finite simulated value at day index {t}")));
        }
        y.push(next);
    }
    Ok(y)
}

/// One summer of `n` days: states from the chain, then temperatures.
pub fn simulate_summer<R: Rng + ?Sized>(params: &ModelParams, n: usize, rng: &mut R) -> Result<SimulatedSummer> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("summer length {n} is below 2")));
    }
    let states = simulate_states(params, n, rng);
    let values = simulate_values(&states, params, rng)?;
    Ok(SimulatedSummer { values, states, source_draw: 0 })
}

/// Independent stream for summer `summer` of draw `draw`: ChaCha8 seeded with
/// `master`, stream number `(draw << 32) | summer`.
pub fn summer_rng(master: u64, draw: usize, summer: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((draw as u64) << 32) | (summer as u64 & 0xffff_ffff));
    rng
}

fn simulate_tagged(p: &ModelParams, d: usize, k: usize, n_days: usize, master: u64) -> Result<SimulatedSummer> {
    let mut rng = summer_rng(master, d, k);
    simulate_summer(p, n_days, &mut rng).map(|mut s| {
        s.source_draw = d;
        s
    })
}

/// Streaming generator over `(draw, summer)` pairs in draw-major order.
#[derive(Debug, Clone)]
pub struct WeatherGenerator<'a> {
    draws: &'a [ModelParams],
    summers_per_draw: usize,
    n_days: usize,
    master_seed: u64,
    next: usize,
}

impl Iterator for WeatherGenerator<'_> {
    type Item = Result<SimulatedSummer>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.summers_per_draw == 0 || self.next >= self.draws.len() * self.summers_per_draw {
            return None;
        }
        let (d, k) = (self.next / self.summers_per_draw, self.next % self.summers_per_draw);
        self.next += 1;
        Some(simulate_tagged(&self.draws[d], d, k, self.n_days, self.master_seed))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.draws.len() * self.summers_per_draw - self.next.min(self.draws.len() * self.summers_per_draw);
        (n, Some(n))
    }
}

/// `summers_per_draw` summers for each parameter draw, as a lazy stream.
/// The output depends only on `master_seed`, not on how the stream is
/// consumed.
pub fn posterior_weather_generator(
    draws: &[ModelParams],
    summers_per_draw: usize,
    n_days: usize,
    master_seed: u64,
) -> WeatherGenerator<'_> {
    WeatherGenerator { draws, summers_per_draw, n_days, master_seed, next: 0 }
}

/// The `summers_per_draw` summers of draw number `draw`, identical to that
/// draw's block of [`posterior_weather_generator`].
pub fn simulate_draw(
    params: &ModelParams,
    draw: usize,
    summers_per_draw: usize,
    n_days: usize,
    master_seed: u64,
) -> Result<Vec<SimulatedSummer>> {
    (0..summers_per_draw).map(|k| simulate_tagged(params, draw, k, n_days, master_seed)).collect()
}

/// Same summers as [`posterior_weather_generator`], in the same order,
/// computed on the rayon pool.
#[cfg(feature = "parallel")]
pub fn simulate_all_parallel(
    draws: &[ModelParams],
    summers_per_draw: usize,
    n_days: usize,
    master_seed: u64,
) -> Result<Vec<SimulatedSummer>> {
    use rayon::prelude::*;
    let blocks: Vec<Vec<SimulatedSummer>> = draws
        .par_iter()
        .enumerate()
        .map(|(d, p)| simulate_draw(p, d, summers_per_draw, n_days, master_seed))
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams {
            a0: 0.03,
            a1: 0.75,
            u: 34.0,
            sigma: 2.0,
            xi: -0.2,
            mu: 24.0,
            sigma_n2: 9.0,
            phi: 0.6,
            alpha: 0.6,
            alpha01: 0.7,
        }
    }

    #[test]
    fn heat_days_are_exceedances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = simulate_summer(&params(), 92, &mut rng).unwrap();
            for (y, st) in s.values.iter().zip(s.states.as_slice()) {
                assert!(!st.is_heat_wave() || *y >= 34.0);
            }
        }
    }

    #[test]
    fn stream_counts_and_tags() {
        let draws = vec![params(); 3];
        let all: Vec<_> = posterior_weather_generator(&draws, 4, 10, 7).map(|s| s.unwrap()).collect();
        assert_eq!(all.len(), 12);
        assert_eq!(all[5].source_draw, 1);
        let again = posterior_weather_generator(&draws, 4, 10, 7).nth(5).unwrap().unwrap();
        assert_eq!(again, all[5]);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_stream() {
        let draws = vec![params(); 3];
        let seq: Vec<_> = posterior_weather_generator(&draws, 5, 20, 9).map(|s| s.unwrap()).collect();
        assert_eq!(simulate_all_parallel(&draws, 5, 20, 9).unwrap(), seq);
    }

    #[test]
    fn independence_inverts_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_conditional(0.3, 1.0, &mut rng).unwrap();
        assert!(t > 0.0);
    }
}
