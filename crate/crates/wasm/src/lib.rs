//! Browser bindings for the heat-wave model.
//!
//! The plain functions in [`demo`] do the work and are tested natively; the
//! `#[wasm_bindgen]` wrappers below only convert arguments and serialize the
//! results to JSON.

pub mod demo;

use heatwave_core::State;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn state(heat_wave: bool) -> State {
    if heat_wave {
        State::HeatWave
    } else {
        State::Normal
    }
}

/// Parameter names in the order the other functions expect them.
#[wasm_bindgen(js_name = parameterNames)]
pub fn parameter_names() -> Vec<String> {
    demo::PARAM_NAMES.iter().map(|s| s.to_string()).collect()
}

/// A reasonable starting parameter vector for the sliders.
#[wasm_bindgen(js_name = defaultParameters)]
pub fn default_parameters() -> Vec<f64> {
    demo::default_params().to_array().to_vec()
}

/// Simulates one summer and runs the three heat-wave definitions on it.
/// Returns a JSON [`demo::SummerView`].
#[wasm_bindgen(js_name = simulateSummer)]
pub fn simulate_summer(params: &[f64], seed: u64, n_days: usize, t1: f64, t2: f64) -> Result<String, JsError> {
    let p = demo::params_from_slice(params).map_err(js_err)?;
    let view = demo::summer(&p, seed, n_days, t1, t2).map_err(js_err)?;
    serde_json::to_string(&view).map_err(js_err)
}

/// Empirical χ(q) at lag `lag` from `n_summers` simulated summers, as a JSON
/// array of `[q, chi]` pairs (`chi` is `null` when undefined).
#[wasm_bindgen(js_name = chiCurve)]
pub fn chi_curve(params: &[f64], seed: u64, n_summers: usize, lag: usize) -> Result<String, JsError> {
    let p = demo::params_from_slice(params).map_err(js_err)?;
    let curve = demo::chi(&p, seed, n_summers, 92, lag, &demo::CHI_GRID).map_err(js_err)?;
    serde_json::to_string(&curve).map_err(js_err)
}

/// Conditional density of today's temperature on an even grid of `n` points
/// over `[lo, hi]`, given yesterday's temperature and both states. Returns
/// interleaved `[y0, f0, y1, f1, ...]`.
#[wasm_bindgen(js_name = conditionalDensity)]
pub fn conditional_density(
    params: &[f64],
    y_prev: f64,
    prev_heat_wave: bool,
    heat_wave: bool,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    let p = demo::params_from_slice(params).map_err(js_err)?;
    let curve = demo::density_curve(&p, y_prev, state(prev_heat_wave), state(heat_wave), lo, hi, n).map_err(js_err)?;
    Ok(curve.into_iter().flat_map(|(y, f)| [y, f]).collect())
}
