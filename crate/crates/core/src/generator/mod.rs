//! Stochastic weather generator and heat-wave definitions.
//!
//! Summers are simulated state-first: the Markov chain is drawn from its
//! stationary start, then each day's temperature from its conditional
//! distribution given the previous day and both states. Copula days are
//! drawn by inverting the conditional CDF with bisection.

mod detect;
mod sim;

pub use detect::{
    detect_huth, detect_implicit, detect_worst_annual, huth_thresholds, retrospective_summaries,
    DefinitionSummary, HeatWaveEvent, RetrospectiveSummary, Rule, HUTH_T1_QUANTILE, HUTH_T2_QUANTILE,
};
pub use sim::{
    posterior_weather_generator, sample_conditional, simulate_states, simulate_summer,
    simulate_draw, simulate_values, summer_rng, SimulatedSummer, WeatherGenerator,
};
#[cfg(feature = "parallel")]
pub use sim::simulate_all_parallel;
