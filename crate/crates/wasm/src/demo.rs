use heatwave_core::diagnostics::chi_curve;
use heatwave_core::generator::{
    detect_huth, detect_implicit, detect_worst_annual, simulate_summer, summer_rng, HeatWaveEvent,
};
use heatwave_core::model::conditional_log_density;
use heatwave_core::{Error, ModelParams, Result, State};
use serde::Serialize;

pub const PARAM_NAMES: [&str; 10] = ModelParams::NAMES;

pub const CHI_GRID: [f64; 11] = [0.80, 0.82, 0.84, 0.86, 0.88, 0.90, 0.92, 0.94, 0.96, 0.98, 0.99];

/// Largest request the page may make in one call.
const MAX_DAYS: usize = 10_000;
const MAX_SUMMERS: usize = 5_000;
const MAX_GRID: usize = 2_000;

pub fn default_params() -> ModelParams {
    ModelParams {
        a0: 0.03,
        a1: 0.8,
        u: 34.0,
        sigma: 1.5,
        xi: -0.2,
        mu: 27.0,
        sigma_n2: 4.0,
        phi: 0.6,
        alpha: 0.5,
        alpha01: 0.7,
    }
}

pub fn params_from_slice(v: &[f64]) -> Result<ModelParams> {
    let arr: [f64; 10] = v
        .try_into()
        .map_err(|_| Error::InvalidParams(format!("expected 10 parameters, got {}", v.len())))?;
    let p = ModelParams::from_array(arr);
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventView {
    pub start: usize,
    pub length: usize,
    pub mean_temp: f64,
}

impl From<&HeatWaveEvent> for EventView {
    fn from(e: &HeatWaveEvent) -> Self {
        Self { start: e.start, length: e.length, mean_temp: e.mean_temp() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummerView {
    pub values: Vec<f64>,
    /// 1 on heat-wave days.
    pub states: Vec<u8>,
    pub implicit: Vec<EventView>,
    pub huth: Vec<EventView>,
    pub worst_annual: Option<EventView>,
}

pub fn summer(p: &ModelParams, seed: u64, n_days: usize, t1: f64, t2: f64) -> Result<SummerView> {
    if !(3..=MAX_DAYS).contains(&n_days) {
        return Err(Error::InvalidInput(format!("n_days must lie in [3, {MAX_DAYS}], got {n_days}")));
    }
    if !(t1 >= t2) {
        return Err(Error::InvalidInput(format!("Huth thresholds need T1 >= T2, got {t1} and {t2}")));
    }
    let s = simulate_summer(p, n_days, &mut summer_rng(seed, 0, 0))?;
    let views = |ev: Vec<HeatWaveEvent>| ev.iter().map(EventView::from).collect();
    Ok(SummerView {
        states: s.states.as_slice().iter().map(|x| u8::from(x.is_heat_wave())).collect(),
        implicit: views(detect_implicit(&s.states, &s.values)),
        huth: views(detect_huth(&s.values, t1, t2)),
        worst_annual: detect_worst_annual(&s.values, 3).as_ref().map(EventView::from),
        values: s.values,
    })
}

pub fn chi(p: &ModelParams, seed: u64, n_summers: usize, n_days: usize, lag: usize, grid: &[f64]) -> Result<Vec<(f64, Option<f64>)>> {
    if n_summers == 0 || n_summers > MAX_SUMMERS {
        return Err(Error::InvalidInput(format!("n_summers must lie in [1, {MAX_SUMMERS}], got {n_summers}")));
    }
    if lag == 0 || lag >= n_days {
        return Err(Error::InvalidInput(format!("lag must lie in [1, {}), got {lag}", n_days)));
    }
    let summers = (0..n_summers)
        .map(|k| simulate_summer(p, n_days, &mut summer_rng(seed, 0, k)).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(chi_curve(&summers, grid, lag))
}

pub fn density_curve(p: &ModelParams, y_prev: f64, prev: State, cur: State, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if !(2..=MAX_GRID).contains(&n) {
        return Err(Error::InvalidInput(format!("grid size must lie in [2, {MAX_GRID}], got {n}")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let y = lo + step * i as f64;
            let f = conditional_log_density(y, y_prev, cur, prev, p).exp();
            (y, if f.is_finite() { f } else { 0.0 })
        })
        .collect())
}
