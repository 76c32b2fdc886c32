//! Model definition: parameter vector, data containers and every density
//! needed to evaluate the likelihood. Nothing here samples or touches files.

mod copula;
mod gpd;
mod likelihood;
mod normal;

pub use copula::{
    conditional_cdf_from_neg_log, log_copula_factor, logistic_bivariate_cdf, MarginPoint,
};
pub use gpd::{frechet_from_gpd, gpd_log_density, Gpd, XI_EPS};
pub use likelihood::{
    bivariate_log_density, conditional_cdf, conditional_log_density, initial_log_density,
    segment_log_likelihood, segment_terms, stationary_state_distribution, LogLikTerms, TermMask,
};
pub(crate) use likelihood::copula_conditional;
pub use normal::{
    frechet_from_normal, std_normal_log_cdf, std_normal_log_pdf, std_normal_quantile,
    NormalMargin,
};

use crate::{Error, Result};

/// Latent state of a single day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Normal,
    HeatWave,
}

impl State {
    pub const ALL: [State; 2] = [State::Normal, State::HeatWave];

    pub fn index(self) -> usize {
        match self {
            State::Normal => 0,
            State::HeatWave => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            State::Normal
        } else {
            State::HeatWave
        }
    }

    pub fn is_heat_wave(self) -> bool {
        self == State::HeatWave
    }
}

/// Per-day latent labels aligned with a [`SummerSegment`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StateSequence(pub Vec<State>);

impl StateSequence {
    pub fn all(state: State, len: usize) -> Self {
        Self(vec![state; len])
    }

    /// Parses a string of `0`/`1` characters; anything else is ignored.
    pub fn from_bits(bits: &str) -> Self {
        Self(
            bits.chars()
                .filter_map(|c| match c {
                    '0' => Some(State::Normal),
                    '1' => Some(State::HeatWave),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[State] {
        &self.0
    }

    pub fn heat_wave_days(&self) -> usize {
        self.0.iter().filter(|s| s.is_heat_wave()).count()
    }
}

impl std::ops::Index<usize> for StateSequence {
    type Output = State;
    fn index(&self, i: usize) -> &State {
        &self.0[i]
    }
}

/// One contiguous summer of daily maxima. The Markov structure of the model
/// never crosses from one segment to the next.
#[derive(Debug, Clone, PartialEq)]
pub struct SummerSegment {
    pub year: i32,
    /// Daily values in °C. Entries flagged in `missing` hold `NaN`.
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
}

impl SummerSegment {
    pub fn new(year: i32, values: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "segment {year} has {} days, need at least 2",
                values.len()
            )));
        }
        if values.len() != missing.len() {
            return Err(Error::InvalidInput(format!(
                "segment {year}: {} values but {} missing flags",
                values.len(),
                missing.len()
            )));
        }
        let values = values
            .into_iter()
            .zip(&missing)
            .map(|(v, &m)| if m { f64::NAN } else { v })
            .collect::<Vec<_>>();
        if let Some(i) = values
            .iter()
            .zip(&missing)
            .position(|(v, &m)| !m && !v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "segment {year}: non-finite value at day index {i}"
            )));
        }
        Ok(Self {
            year,
            values,
            missing,
        })
    }

    /// A segment with every day observed.
    pub fn complete(year: i32, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(year, values, vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_missing(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn observed(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.missing)
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
    }

    /// Values with missing days as `None`.
    pub fn get(&self, i: usize) -> Option<f64> {
        if self.missing[i] {
            None
        } else {
            Some(self.values[i])
        }
    }
}

/// Full parameter vector of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// P(S_t = 1 | S_{t-1} = 0): probability of entering a heat wave.
    pub a0: f64,
    /// P(S_t = 1 | S_{t-1} = 1): probability of remaining in a heat wave.
    pub a1: f64,
    /// GPD threshold (°C).
    pub u: f64,
    /// GPD scale (°C).
    pub sigma: f64,
    /// GPD shape.
    pub xi: f64,
    /// Mean of the non-heat-wave AR(1) process (°C).
    pub mu: f64,
    /// Innovation variance of the non-heat-wave AR(1) process (°C²).
    pub sigma_n2: f64,
    /// AR(1) autocorrelation.
    pub phi: f64,
    /// Logistic dependence between consecutive heat-wave days; 1 is independence.
    pub alpha: f64,
    /// Logistic dependence on days entering or leaving a heat wave.
    pub alpha01: f64,
}

impl ModelParams {
    pub const NAMES: [&'static str; 10] = [
        "a0", "a1", "u", "sigma", "xi", "mu", "sigma_n2", "phi", "alpha", "alpha01",
    ];

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.a0,
            self.a1,
            self.u,
            self.sigma,
            self.xi,
            self.mu,
            self.sigma_n2,
            self.phi,
            self.alpha,
            self.alpha01,
        ]
    }

    pub fn from_array(v: [f64; 10]) -> Self {
        Self {
            a0: v[0],
            a1: v[1],
            u: v[2],
            sigma: v[3],
            xi: v[4],
            mu: v[5],
            sigma_n2: v[6],
            phi: v[7],
            alpha: v[8],
            alpha01: v[9],
        }
    }

    /// Checks the parameter constraints. `alpha`/`alpha01` may equal 1
    /// (independence) and `phi` may equal 0 (no autocorrelation).
    pub fn validate(&self) -> Result<()> {
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        let fail = |what: &str, v: f64| Err(Error::InvalidParams(format!("{what} = {v}")));
        if !open01(self.a0) {
            return fail("a0 must lie in (0,1); a0", self.a0);
        }
        if !open01(self.a1) {
            return fail("a1 must lie in (0,1); a1", self.a1);
        }
        if !self.u.is_finite() {
            return fail("u must be finite; u", self.u);
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return fail("sigma must be positive; sigma", self.sigma);
        }
        if !(self.xi > -0.5 && self.xi < 0.5) {
            return fail("xi must lie in (-0.5,0.5); xi", self.xi);
        }
        if !self.mu.is_finite() {
            return fail("mu must be finite; mu", self.mu);
        }
        if !(self.sigma_n2 > 0.0 && self.sigma_n2.is_finite()) {
            return fail("sigma_n2 must be positive; sigma_n2", self.sigma_n2);
        }
        if !(self.phi >= 0.0 && self.phi < 1.0) {
            return fail("phi must lie in [0,1); phi", self.phi);
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must lie in (0,1]; alpha", self.alpha);
        }
        if !(self.alpha01 > 0.0 && self.alpha01 <= 1.0) {
            return fail("alpha01 must lie in (0,1]; alpha01", self.alpha01);
        }
        Ok(())
    }

    pub fn gpd(&self) -> Gpd {
        Gpd::new(self.u, self.sigma, self.xi)
    }

    /// Gaussian margin used by the copula transform and the conditional
    /// divisor: `N(mu, sigma_n2)`.
    pub fn normal_margin(&self) -> NormalMargin {
        NormalMargin::new(self.mu, self.sigma_n2.sqrt())
    }

    /// Stationary marginal of the AR(1) process, `N(mu, sigma_n2 / (1 - phi²))`.
    pub fn stationary_normal(&self) -> NormalMargin {
        NormalMargin::new(self.mu, (self.sigma_n2 / (1.0 - self.phi * self.phi)).sqrt())
    }

    pub fn transition_prob(&self, from: State, to: State) -> f64 {
        let p_hot = match from {
            State::Normal => self.a0,
            State::HeatWave => self.a1,
        };
        match to {
            State::HeatWave => p_hot,
            State::Normal => 1.0 - p_hot,
        }
    }

    pub fn log_transition(&self, from: State, to: State) -> f64 {
        self.transition_prob(from, to).ln()
    }

    pub fn stationary(&self) -> (f64, f64) {
        stationary_state_distribution(self.a0, self.a1)
    }

    pub fn log_initial_state(&self, s: State) -> f64 {
        let (p0, p1) = self.stationary();
        match s {
            State::Normal => p0.ln(),
            State::HeatWave => p1.ln(),
        }
    }

    /// Logistic dependence parameter for a pair of consecutive states.
    pub fn copula_alpha(&self, prev: State, cur: State) -> f64 {
        match (prev, cur) {
            (State::HeatWave, State::HeatWave) => self.alpha,
            _ => self.alpha01,
        }
    }

    /// Marginal distribution of a day in state `s` for the copula cases.
    pub fn margin_point(&self, y: f64, s: State) -> MarginPoint {
        match s {
            State::HeatWave => self.gpd().margin_point(y),
            State::Normal => self.normal_margin().margin_point(y),
        }
    }
}
