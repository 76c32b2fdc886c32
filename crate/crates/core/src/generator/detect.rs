use std::collections::BTreeMap;
use std::fmt;

use crate::model::{StateSequence, SummerSegment};
use crate::stats;

pub const HUTH_T1_QUANTILE: f64 = 0.975;
pub const HUTH_T2_QUANTILE: f64 = 0.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Implicit,
    Huth,
    WorstAnnual,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Implicit, Rule::Huth, Rule::WorstAnnual];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Implicit => "implicit",
            Rule::Huth => "huth",
            Rule::WorstAnnual => "worst_annual",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatWaveEvent {
    /// Zero-based index of the first day.
    pub start: usize,
    pub length: usize,
    pub temps: Vec<f64>,
    pub rule: Rule,
}

impl HeatWaveEvent {
    fn new(values: &[f64], start: usize, length: usize, rule: Rule) -> Self {
        Self { start, length, temps: values[start..start + length].to_vec(), rule }
    }

    pub fn mean_temp(&self) -> f64 {
        stats::mean(&self.temps)
    }
}

fn runs(mut pred: impl FnMut(usize) -> bool, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < n {
        if pred(t) {
            let s = t;
            while t < n && pred(t) {
                t += 1;
            }
            out.push((s, t - s));
        } else {
            t += 1;
        }
    }
    out
}

/// Maximal runs of heat-wave states. `values` supplies the event
/// temperatures and must match `states` in length.
pub fn detect_implicit(states: &StateSequence, values: &[f64]) -> Vec<HeatWaveEvent> {
    let s = states.as_slice();
    runs(|t| s[t].is_heat_wave(), s.len())
        .into_iter()
        .map(|(start, len)| HeatWaveEvent::new(values, start, len, Rule::Implicit))
        .collect()
}

/// Huth thresholds `(T1, T2)`: the 0.975 and 0.81 empirical quantiles.
pub fn huth_thresholds(values: &[f64]) -> (f64, f64) {
    let sorted = stats::sorted_finite(values);
    (
        stats::quantile_sorted(&sorted, HUTH_T1_QUANTILE),
        stats::quantile_sorted(&sorted, HUTH_T2_QUANTILE),
    )
}

/// Huth-style events: within each maximal run of days above `t2`, the
/// longest sub-period with at least three days above `t1` and mean above
/// `t1`; earliest start on ties.
pub fn detect_huth(values: &[f64], t1: f64, t2: f64) -> Vec<HeatWaveEvent> {
    let mut out = Vec::new();
    for (rs, rl) in runs(|t| values[t] > t2, values.len()) {
        let mut best: Option<(usize, usize)> = None;
        for i in rs..rs + rl {
            let (mut sum, mut hot) = (0.0, 0usize);
            for j in i..rs + rl {
                sum += values[j];
                hot += usize::from(values[j] > t1);
                let len = j - i + 1;
                if hot >= 3 && sum / len as f64 > t1 && best.is_none_or(|(_, bl)| len > bl) {
                    best = Some((i, len));
                }
            }
        }
        if let Some((s, l)) = best {
            out.push(HeatWaveEvent::new(values, s, l, Rule::Huth));
        }
    }
    out
}

/// The `window`-day period with the highest mean; earliest on ties. `None`
/// when the series is shorter than the window.
pub fn detect_worst_annual(values: &[f64], window: usize) -> Option<HeatWaveEvent> {
    if window == 0 || values.len() < window {
        return None;
    }
    let mut best = 0;
    let mut best_sum = f64::NEG_INFINITY;
    for s in 0..=values.len() - window {
        // direct sum per window keeps ties exact
        let sum: f64 = values[s..s + window].iter().sum();
        if sum > best_sum {
            best_sum = sum;
            best = s;
        }
    }
    Some(HeatWaveEvent::new(values, best, window, Rule::WorstAnnual))
}

/// Per-summer summary of one definition's events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefinitionSummary {
    pub rule: Rule,
    pub n_events: usize,
    pub total_days: usize,
    /// Mean event length, `NaN` without events.
    pub mean_length: f64,
    /// Mean temperature over all event days, `NaN` without events.
    pub mean_temp: f64,
}

impl DefinitionSummary {
    pub fn from_events(rule: Rule, events: &[HeatWaveEvent]) -> Self {
        let total_days: usize = events.iter().map(|e| e.length).sum();
        let temp_sum: f64 = events.iter().flat_map(|e| &e.temps).sum();
        let (mean_length, mean_temp) = if events.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (total_days as f64 / events.len() as f64, temp_sum / total_days as f64)
        };
        Self { rule, n_events: events.len(), total_days, mean_length, mean_temp }
    }
}

/// Posterior summaries of the implicit events in the observed series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RetrospectiveSummary {
    /// `(length, probability)` over all events of all draws.
    pub length_pmf: Vec<(usize, f64)>,
    /// `(number of events over the whole record, probability)` across draws.
    pub count_pmf: Vec<(usize, f64)>,
    /// Observed temperatures on heat-wave days, pooled over draws.
    pub temperatures: Vec<f64>,
}

fn to_pmf(counts: BTreeMap<usize, u64>) -> Vec<(usize, f64)> {
    let total: u64 = counts.values().sum();
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

/// `draws[d][k]` is the state path of segment `k` in posterior draw `d`.
/// Missing days contribute to event lengths but not to the temperature
/// sample.
pub fn retrospective_summaries(draws: &[Vec<StateSequence>], segments: &[SummerSegment]) -> RetrospectiveSummary {
    let mut lengths = BTreeMap::new();
    let mut counts = BTreeMap::new();
    let mut temperatures = Vec::new();
    for draw in draws {
        let mut n_events = 0;
        for (states, seg) in draw.iter().zip(segments) {
            for ev in detect_implicit(states, &seg.values) {
                n_events += 1;
                *lengths.entry(ev.length).or_insert(0u64) += 1;
                temperatures.extend((ev.start..ev.start + ev.length).filter_map(|t| seg.get(t)));
            }
        }
        *counts.entry(n_events).or_insert(0u64) += 1;
    }
    RetrospectiveSummary { length_pmf: to_pmf(lengths), count_pmf: to_pmf(counts), temperatures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_runs() {
        let s = StateSequence::from_bits("000111011");
        let ev = detect_implicit(&s, &[0.0; 9]);
        assert_eq!(ev.iter().map(|e| (e.start + 1, e.length)).collect::<Vec<_>>(), vec![(4, 3), (8, 2)]);
        assert!(detect_implicit(&StateSequence::from_bits("0000"), &[0.0; 4]).is_empty());
    }

    #[test]
    fn huth_example() {
        let ev = detect_huth(&[30.0, 36.0, 37.0, 36.0, 30.0], 35.0, 31.0);
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].start + 1, ev[0].length), (2, 3));
        assert!((ev[0].mean_temp() - 109.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn huth_needs_three_hot_days() {
        assert!(detect_huth(&[30.0, 36.0, 34.0, 36.0, 30.0], 35.0, 31.0).is_empty());
    }

    #[test]
    fn huth_split_by_cool_day() {
        let v = [36.0, 36.0, 34.0, 36.0, 36.0];
        assert!(detect_huth(&v, 35.0, 34.0).is_empty());
        let ev = detect_huth(&v, 35.0, 33.0);
        assert_eq!((ev.len(), ev[0].length), (1, 5));
    }

    #[test]
    fn worst_annual_examples() {
        let ev = detect_worst_annual(&[20.0, 21.0, 30.0, 31.0, 32.0, 22.0], 3).unwrap();
        assert_eq!((ev.start + 1, ev.length), (3, 3));
        assert_eq!(ev.mean_temp(), 31.0);
        assert_eq!(detect_worst_annual(&[5.0; 10], 3).unwrap().start, 0);
    }

    #[test]
    fn retrospective_point_masses() {
        let seg = SummerSegment::complete(2003, vec![20.0, 35.0, 36.0, 37.0, 38.0, 39.0, 20.0]).unwrap();
        let draws = vec![vec![StateSequence::from_bits("0111110")]];
        let r = retrospective_summaries(&draws, &[seg]);
        assert_eq!(r.length_pmf, vec![(5, 1.0)]);
        assert_eq!(r.count_pmf, vec![(1, 1.0)]);
        assert_eq!(r.temperatures.len(), 5);
    }
}
