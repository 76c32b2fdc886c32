use std::fmt;

use super::estimators::{chi_hat, extremal_index};
use crate::generator::SimulatedSummer;
use crate::model::SummerSegment;
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// Empirical quantile of all days.
    Quantile(f64),
    /// Extremal index at the fixed threshold of the check.
    ExtremalIndex,
    Chi { lag: usize, threshold: f64 },
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::Quantile(q) => format!("q{q}"),
            Statistic::ExtremalIndex => "theta".to_string(),
            Statistic::Chi { lag, threshold } => format!("chi{lag}({threshold})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpcConfig {
    /// Summers per replicate dataset.
    pub n_summers: usize,
    pub quantiles: Vec<f64>,
    /// The extremal-index threshold is this quantile of the observed data,
    /// held fixed for every replicate.
    pub ei_quantile: f64,
    pub thresholds: Vec<f64>,
    pub lags: Vec<usize>,
}

impl Default for PpcConfig {
    fn default() -> Self {
        Self {
            n_summers: 22,
            quantiles: vec![0.99, 0.999],
            ei_quantile: 0.975,
            thresholds: vec![28.0, 32.0, 36.0],
            lags: vec![1, 5],
        }
    }
}

impl PpcConfig {
    /// Statistics in report order: quantiles, extremal index, then χ̂ by
    /// threshold and lag.
    pub fn statistics(&self) -> Vec<Statistic> {
        let mut out: Vec<Statistic> = self.quantiles.iter().map(|&q| Statistic::Quantile(q)).collect();
        out.push(Statistic::ExtremalIndex);
        for &threshold in &self.thresholds {
            for &lag in &self.lags {
                out.push(Statistic::Chi { lag, threshold });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpcRow {
    pub statistic: Statistic,
    pub name: String,
    pub observed: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
    /// Replicates where the statistic was defined.
    pub n_valid: usize,
    /// Replicates dropped because the statistic was undefined.
    pub n_excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PPCReport {
    pub rows: Vec<PpcRow>,
    pub n_replicates: usize,
    pub ei_threshold: f64,
}

impl PPCReport {
    pub fn all_inside(&self) -> bool {
        self.rows.iter().all(|r| r.inside)
    }

    pub fn n_inside(&self) -> usize {
        self.rows.iter().filter(|r| r.inside).count()
    }
}

fn compute<S: AsRef<[f64]>>(segments: &[S], stats_list: &[Statistic], ei_threshold: f64) -> Vec<Option<f64>> {
    let pooled: Vec<f64> = segments.iter().flat_map(|s| s.as_ref().iter().copied()).collect();
    let sorted = stats::sorted_finite(&pooled);
    stats_list
        .iter()
        .map(|s| match *s {
            Statistic::Quantile(q) => (!sorted.is_empty()).then(|| stats::quantile_sorted(&sorted, q)),
            Statistic::ExtremalIndex => extremal_index(segments, ei_threshold),
            Statistic::Chi { lag, threshold } => chi_hat(segments, threshold, lag),
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.3}"))
}

/// Posterior predictive check over replicate datasets of
/// `config.n_summers` consecutive summers from the same source draw.
/// Leftover summers of a draw that do not fill a replicate are dropped.
pub fn posterior_predictive_check<I>(simulated: I, observed: &[SummerSegment], config: &PpcConfig) -> Result<PPCReport>
where
    I: IntoIterator<Item = Result<SimulatedSummer>>,
{
    if config.n_summers == 0 {
        return Err(Error::InvalidInput("replicate size must be positive".into()));
    }
    let obs_values: Vec<&[f64]> = observed.iter().map(|s| s.values.as_slice()).collect();
    let pooled: Vec<f64> = obs_values.iter().flat_map(|s| s.iter().copied()).collect();
    let sorted = stats::sorted_finite(&pooled);
    if sorted.is_empty() {
        return Err(Error::InvalidInput("no observed values".into()));
    }
    let ei_threshold = stats::quantile_sorted(&sorted, config.ei_quantile);
    let list = config.statistics();
    let obs = compute(&obs_values, &list, ei_threshold);

    let mut reps: Vec<Vec<Option<f64>>> = Vec::new();
    let mut buffer: Vec<Vec<f64>> = Vec::with_capacity(config.n_summers);
    let mut current_draw = None;
    for s in simulated {
        let s = s?;
        if current_draw != Some(s.source_draw) {
            buffer.clear();
            current_draw = Some(s.source_draw);
        }
        buffer.push(s.values);
        if buffer.len() == config.n_summers {
            reps.push(compute(&buffer, &list, ei_threshold));
            buffer.clear();
        }
    }
    if reps.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no complete replicate of {} summers from a single draw",
            config.n_summers
        )));
    }
    let rows = list
        .iter()
        .enumerate()
        .map(|(j, st)| {
            let vals: Vec<f64> = reps.iter().filter_map(|r| r[j]).collect();
            let (lower, upper) = if vals.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let sorted = stats::sorted_finite(&vals);
                (stats::quantile_sorted(&sorted, 0.025), stats::quantile_sorted(&sorted, 0.975))
            };
            let inside = obs[j].is_some_and(|o| lower <= o && o <= upper);
            PpcRow {
                statistic: *st,
                name: st.name(),
                observed: obs[j],
                lower,
                upper,
                inside,
                n_valid: vals.len(),
                n_excluded: reps.len() - vals.len(),
            }
        })
        .collect();
    Ok(PPCReport { rows, n_replicates: reps.len(), ei_threshold })
}

impl fmt::Display for PPCReport {
    /// Statistics as columns; lower, observed and upper as rows.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(8);
        write!(f, "{:<8}", "")?;
        for r in &self.rows {
            write!(f, " {:>w$}", r.name)?;
        }
        writeln!(f)?;
        let lines: [(&str, Box<dyn Fn(&PpcRow) -> String>); 5] = [
            ("q0.025", Box::new(|r: &PpcRow| fmt_opt((!r.lower.is_nan()).then_some(r.lower)))),
            ("obs.", Box::new(|r: &PpcRow| fmt_opt(r.observed))),
            ("q0.975", Box::new(|r: &PpcRow| fmt_opt((!r.upper.is_nan()).then_some(r.upper)))),
            ("inside", Box::new(|r: &PpcRow| if r.inside { "yes".into() } else { "NO".into() })),
            ("excluded", Box::new(|r: &PpcRow| r.n_excluded.to_string())),
        ];
        for (label, cell) in &lines {
            write!(f, "{label:<8}")?;
            for r in &self.rows {
                write!(f, " {:>w$}", cell(r))?;
            }
            writeln!(f)?;
        }
        write!(f, "{} replicate datasets; extremal index threshold {:.3}", self.n_replicates, self.ei_threshold)
    }
}
