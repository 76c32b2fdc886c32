use crate::{stats, Error, Result};

fn both_observed(a: f64, b: f64) -> bool {
    !a.is_nan() && !b.is_nan()
}

/// `(y_{t-lag}, y_t)` for all within-segment pairs with both days observed.
pub fn lag_pairs<S: AsRef<[f64]>>(segments: &[S], lag: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for seg in segments {
        let v = seg.as_ref();
        for t in lag..v.len() {
            if both_observed(v[t - lag], v[t]) {
                out.push((v[t - lag], v[t]));
            }
        }
    }
    out
}

/// `#{y_{t-lag} > u, y_t > u} / #{y_{t-lag} > u}` over within-segment pairs
/// with both days observed. `None` when no predecessor exceeds `u`.
pub fn chi_hat<S: AsRef<[f64]>>(segments: &[S], u: f64, lag: usize) -> Option<f64> {
    let (mut num, mut den) = (0u64, 0u64);
    for seg in segments {
        let v = seg.as_ref();
        for t in lag..v.len() {
            let (a, b) = (v[t - lag], v[t]);
            if both_observed(a, b) && a > u {
                den += 1;
                num += u64::from(b > u);
            }
        }
    }
    (den > 0).then(|| num as f64 / den as f64)
}

/// χ̂ at the empirical (type 7) quantiles of the pooled observed values.
pub fn chi_curve<S: AsRef<[f64]>>(segments: &[S], grid: &[f64], lag: usize) -> Vec<(f64, Option<f64>)> {
    let pooled: Vec<f64> = segments.iter().flat_map(|s| s.as_ref().iter().copied()).collect();
    let sorted = stats::sorted_finite(&pooled);
    grid.iter()
        .map(|&q| {
            if sorted.is_empty() {
                return (q, None);
            }
            (q, chi_hat(segments, stats::quantile_sorted(&sorted, q), lag))
        })
        .collect()
}

/// Intervals estimator of the extremal index (Ferro and Segers, 2003).
///
/// Inter-exceedance times are taken within segments and pooled; a missing
/// day ends the current stretch like a segment boundary, since the gap
/// length across it is unknown. With `N - 1` pooled times `T_i`,
///
/// ```text
/// θ = 2 (Σ T_i)² / ((N-1) Σ T_i²)                      if max T_i ≤ 2
/// θ = 2 (Σ (T_i - 1))² / ((N-1) Σ (T_i - 1)(T_i - 2))   otherwise
/// ```
///
/// clamped to at most 1. `None` without at least one inter-exceedance time.
pub fn extremal_index<S: AsRef<[f64]>>(segments: &[S], u: f64) -> Option<f64> {
    let mut times = Vec::new();
    for seg in segments {
        let mut last: Option<usize> = None;
        for (t, &y) in seg.as_ref().iter().enumerate() {
            if y.is_nan() {
                last = None;
            } else if y > u {
                if let Some(l) = last {
                    times.push((t - l) as f64);
                }
                last = Some(t);
            }
        }
    }
    if times.is_empty() {
        return None;
    }
    let m = times.len() as f64;
    let max_t = times.iter().copied().fold(0.0, f64::max);
    let theta = if max_t <= 2.0 {
        let s: f64 = times.iter().sum();
        let s2: f64 = times.iter().map(|t| t * t).sum();
        2.0 * s * s / (m * s2)
    } else {
        let s: f64 = times.iter().map(|t| t - 1.0).sum();
        let s2: f64 = times.iter().map(|t| (t - 1.0) * (t - 2.0)).sum();
        2.0 * s * s / (m * s2)
    };
    Some(theta.min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pacf {
    /// Partial autocorrelations at lags `1..=max_lag`.
    pub values: Vec<f64>,
    /// Half-width `1.96 / sqrt(n)` of the approximate 95% band.
    pub band: f64,
}

/// Partial autocorrelations by the Durbin–Levinson recursion applied to
/// autocovariances pooled over segments around the overall mean.
pub fn pacf<S: AsRef<[f64]>>(segments: &[S], max_lag: usize) -> Result<Pacf> {
    let pooled: Vec<f64> = segments
        .iter()
        .flat_map(|s| s.as_ref().iter().copied())
        .filter(|v| !v.is_nan())
        .collect();
    let n = pooled.len();
    if n <= max_lag + 1 {
        return Err(Error::InvalidInput(format!("{n} observations, need more than {}", max_lag + 1)));
    }
    let mean = stats::mean(&pooled);
    let gamma: Vec<f64> = (0..=max_lag)
        .map(|h| {
            let mut acc = 0.0;
            for seg in segments {
                let v = seg.as_ref();
                for t in h..v.len() {
                    if both_observed(v[t - h], v[t]) {
                        acc += (v[t - h] - mean) * (v[t] - mean);
                    }
                }
            }
            acc / n as f64
        })
        .collect();
    if !(gamma[0] > 1e-12 * mean.abs().max(1.0).powi(2)) {
        return Err(Error::InvalidInput("series has zero variance".into()));
    }
    let rho: Vec<f64> = gamma.iter().map(|g| g / gamma[0]).collect();
    let mut values = Vec::with_capacity(max_lag);
    let mut phi_prev: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi_prev[j - 1] * rho[k - j]).sum::<f64>();
        let phi_kk = num / v;
        let mut phi = vec![0.0; k];
        for j in 1..k {
            phi[j - 1] = phi_prev[j - 1] - phi_kk * phi_prev[k - j - 1];
        }
        phi[k - 1] = phi_kk;
        v *= 1.0 - phi_kk * phi_kk;
        values.push(phi_kk);
        phi_prev = phi;
    }
    Ok(Pacf { values, band: 1.96 / (n as f64).sqrt() })
}

/// `z_i = -1 / log(r_i / (n + 1))` with average ranks on ties. Missing
/// entries stay `NaN` and are excluded from `n`.
pub fn frechet_rank_transform(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_nan()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let n = idx.len();
    let mut out = vec![f64::NAN; values.len()];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their average
        let rank = (i + j) as f64 / 2.0 + 1.0;
        let z = -1.0 / (rank / (n as f64 + 1.0)).ln();
        for &k in &idx[i..=j] {
            out[k] = z;
        }
        i = j + 1;
    }
    out
}
