use nalgebra::{DMatrix, DVector};

use super::ecad::JJA_DAYS;
use crate::model::SummerSegment;
use crate::{stats, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SplineConfig {
    pub n_interior_knots: usize,
    /// Fixed smoothing parameter; `None` selects one by cross-validation
    /// over `lambda_grid`.
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub cv_folds: usize,
    /// Smoothing constant of the surrogate `sqrt(r² + ε²)` for `|r|`, in °C.
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self {
            n_interior_knots: 12,
            lambda: None,
            lambda_grid: (0..13).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect(),
            cv_folds: 5,
            epsilon: 1e-4,
            tolerance: 1e-8,
            max_iter: 500,
        }
    }
}

/// Fitted seasonal median curve on days `1..=92`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalCurve {
    /// `values[d]` is the curve at day-of-season `d + 1`.
    pub values: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
}

/// Cubic B-spline basis on `[1, n_days]` with equally spaced interior knots,
/// evaluated at each integer day. Rows are days, columns basis functions.
pub fn bspline_basis(n_days: usize, n_interior: usize) -> DMatrix<f64> {
    let (lo, hi) = (1.0, n_days as f64);
    let h = (hi - lo) / (n_interior + 1) as f64;
    let knots: Vec<f64> = (-3..=(n_interior as i64 + 4)).map(|i| lo + i as f64 * h).collect();
    let nb = n_interior + 4;
    let mut b = DMatrix::zeros(n_days, nb);
    for d in 0..n_days {
        let x = lo + d as f64;
        // Cox–de Boor, degree 0 up to 3; the right endpoint belongs to the last span
        let mut n: Vec<f64> = (0..knots.len() - 1)
            .map(|i| {
                let inside = knots[i] <= x && x < knots[i + 1] && x < hi;
                let last = x == hi && knots[i] < x && (knots[i + 1] - hi).abs() < 1e-9 * h;
                f64::from(u8::from(inside || last))
            })
            .collect();
        for k in 1..=3 {
            for i in 0..knots.len() - 1 - k {
                let left = (x - knots[i]) / (knots[i + k] - knots[i]) * n[i];
                let right = (knots[i + k + 1] - x) / (knots[i + k + 1] - knots[i + 1]) * n[i + 1];
                n[i] = left + right;
            }
        }
        for j in 0..nb {
            b[(d, j)] = n[j];
        }
    }
    b
}

/// `DᵀD` for the second-difference matrix `D` on `nb` coefficients.
pub fn second_difference_penalty(nb: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(nb - 2, nb);
    for i in 0..nb - 2 {
        d[(i, i)] = 1.0;
        d[(i, i + 1)] = -2.0;
        d[(i, i + 2)] = 1.0;
    }
    d.transpose() * d
}

/// `(day, value)` pairs with `day` in `1..=len` for every observed value.
pub fn pooled_day_values(segments: &[SummerSegment]) -> Vec<(usize, f64)> {
    segments
        .iter()
        .flat_map(|s| (0..s.len()).filter_map(move |t| s.get(t).map(|v| (t + 1, v))))
        .collect()
}

struct Problem {
    b: DMatrix<f64>,
    penalty: DMatrix<f64>,
}

impl Problem {
    fn new(n_days: usize, n_interior: usize) -> Self {
        let b = bspline_basis(n_days, n_interior);
        let penalty = second_difference_penalty(b.ncols());
        Self { b, penalty }
    }

    fn objective(&self, data: &[(usize, f64)], beta: &DVector<f64>, lambda: f64, eps: f64) -> f64 {
        let fitted = &self.b * beta;
        let loss: f64 = data.iter().map(|&(d, y)| ((y - fitted[d - 1]).powi(2) + eps * eps).sqrt()).sum();
        loss + 0.5 * lambda * beta.dot(&(&self.penalty * beta))
    }

    /// Weighted normal equations `(Bᵀ W B + λ P) x = rhs` with per-day
    /// weight sums.
    fn system(&self, wsum: &[f64], lambda: f64) -> DMatrix<f64> {
        let mut lhs = &self.penalty * lambda;
        for (d, &w) in wsum.iter().enumerate() {
            if w != 0.0 {
                let row = self.b.row(d);
                lhs += row.transpose() * row * w;
            }
        }
        lhs
    }

    /// Minimizes `Σ sqrt(r_i² + ε²) + (λ/2) βᵀ P β` by iteratively
    /// reweighted least squares. Each step solves a weighted penalized
    /// least-squares problem with Newton weights `ε² / (r² + ε²)^{3/2}` and
    /// a backtracking line search; when that fails to descend, the
    /// majorizing weights `1 / sqrt(r² + ε²)` are used instead, which always
    /// descend. Stops when no coefficient moves by more than the tolerance.
    fn solve(&self, data: &[(usize, f64)], lambda: f64, cfg: &SplineConfig) -> Result<(DVector<f64>, usize)> {
        let nb = self.b.ncols();
        let n_days = self.b.nrows();
        let eps2 = cfg.epsilon * cfg.epsilon;
        let chol = |m: DMatrix<f64>| {
            m.cholesky().ok_or_else(|| Error::Numeric("seasonal spline system is not positive definite".into()))
        };
        let mut beta = DVector::from_element(nb, stats::median(&data.iter().map(|d| d.1).collect::<Vec<_>>()));
        let mut obj = self.objective(data, &beta, lambda, cfg.epsilon);
        for iter in 1..=cfg.max_iter {
            let fitted = &self.b * &beta;
            let mut w1 = vec![0.0; n_days];
            let mut w1y = vec![0.0; n_days];
            let mut w2 = vec![0.0; n_days];
            let mut w1r = vec![0.0; n_days];
            for &(d, y) in data {
                let r = y - fitted[d - 1];
                let s2 = r * r + eps2;
                let s = s2.sqrt();
                w1[d - 1] += 1.0 / s;
                w1y[d - 1] += y / s;
                w1r[d - 1] += r / s;
                w2[d - 1] += eps2 / (s2 * s);
            }
            let mut grad = &self.penalty * &beta * -lambda;
            for d in 0..n_days {
                grad += self.b.row(d).transpose() * w1r[d];
            }
            let mut step = None;
            if let Ok(c) = chol(self.system(&w2, lambda)) {
                let dir = c.solve(&grad);
                let slope = grad.dot(&dir);
                let mut t = 1.0;
                for _ in 0..30 {
                    let cand = &beta + &dir * t;
                    let o = self.objective(data, &cand, lambda, cfg.epsilon);
                    if o <= obj - 1e-4 * t * slope {
                        step = Some((cand, o));
                        break;
                    }
                    t *= 0.5;
                }
            }
            let (next, o) = match step {
                Some(s) => s,
                None => {
                    let mut rhs = DVector::zeros(nb);
                    for d in 0..n_days {
                        rhs += self.b.row(d).transpose() * w1y[d];
                    }
                    let cand = chol(self.system(&w1, lambda))?.solve(&rhs);
                    let o = self.objective(data, &cand, lambda, cfg.epsilon);
                    (cand, o)
                }
            };
            let change = (&next - &beta).amax();
            beta = next;
            obj = o;
            if change < cfg.tolerance {
                return Ok((beta, iter));
            }
        }
        Err(Error::Numeric(format!(
            "seasonal spline did not converge in {} iterations",
            cfg.max_iter
        )))
    }
}

/// Fit at a fixed smoothing parameter.
pub fn fit_with_lambda(data: &[(usize, f64)], n_days: usize, lambda: f64, cfg: &SplineConfig) -> Result<SeasonalCurve> {
    validate(data, n_days, cfg)?;
    let prob = Problem::new(n_days, cfg.n_interior_knots);
    let (beta, iterations) = prob.solve(data, lambda, cfg)?;
    Ok(SeasonalCurve { values: (&prob.b * beta).iter().copied().collect(), lambda, iterations })
}

fn validate(data: &[(usize, f64)], n_days: usize, cfg: &SplineConfig) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidInput("no observed values for the seasonal fit".into()));
    }
    if let Some(&(d, _)) = data.iter().find(|(d, _)| *d == 0 || *d > n_days) {
        return Err(Error::InvalidInput(format!("day-of-season {d} outside 1..={n_days}")));
    }
    if cfg.n_interior_knots == 0 || cfg.epsilon <= 0.0 {
        return Err(Error::InvalidInput("spline needs interior knots and epsilon > 0".into()));
    }
    Ok(())
}

/// Median-regression smoother of temperature on day-of-season: penalized
/// cubic B-spline with absolute loss, smoothing parameter by k-fold
/// cross-validation on absolute error unless fixed in `cfg`. Folds are
/// assigned round-robin in input order.
pub fn fit_seasonal_quantile_spline(data: &[(usize, f64)], cfg: &SplineConfig) -> Result<SeasonalCurve> {
    let n_days = JJA_DAYS.max(data.iter().map(|d| d.0).max().unwrap_or(0));
    validate(data, n_days, cfg)?;
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => select_lambda(data, n_days, cfg)?,
    };
    fit_with_lambda(data, n_days, lambda, cfg)
}

fn select_lambda(data: &[(usize, f64)], n_days: usize, cfg: &SplineConfig) -> Result<f64> {
    if cfg.lambda_grid.is_empty() {
        return Err(Error::InvalidInput("empty smoothing grid".into()));
    }
    let k = cfg.cv_folds.max(2);
    let prob = Problem::new(n_days, cfg.n_interior_knots);
    let mut best = (f64::INFINITY, cfg.lambda_grid[0]);
    for &lambda in &cfg.lambda_grid {
        let mut err = 0.0;
        for fold in 0..k {
            let train: Vec<(usize, f64)> = data.iter().enumerate().filter(|(i, _)| i % k != fold).map(|(_, d)| *d).collect();
            let (beta, _) = prob.solve(&train, lambda, cfg)?;
            let fitted = &prob.b * beta;
            err += data
                .iter()
                .enumerate()
                .filter(|(i, _)| i % k == fold)
                .map(|(_, &(d, y))| (y - fitted[d - 1]).abs())
                .sum::<f64>();
        }
        // strict improvement keeps the smallest lambda among exact ties
        if err < best.0 {
            best = (err, lambda);
        }
    }
    Ok(best.1)
}

/// `y - curve(day) + median(all observed values)`; missing days stay missing.
pub fn deseasonalize(segments: &[SummerSegment], curve: &SeasonalCurve) -> Result<Vec<SummerSegment>> {
    let pooled: Vec<f64> = segments.iter().flat_map(|s| s.observed()).collect();
    if pooled.is_empty() {
        return Err(Error::InvalidInput("no observed values".into()));
    }
    let med = stats::median(&pooled);
    segments
        .iter()
        .map(|s| {
            if s.len() > curve.values.len() {
                return Err(Error::InvalidInput(format!(
                    "segment {} has {} days but the curve covers {}",
                    s.year,
                    s.len(),
                    curve.values.len()
                )));
            }
            let v = s.values.iter().zip(&curve.values).map(|(y, c)| y - c + med).collect();
            SummerSegment::new(s.year, v, s.missing.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_partition_of_unity() {
        let b = bspline_basis(92, 12);
        for d in 0..92 {
            let s: f64 = b.row(d).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "day {}: {s}", d + 1);
        }
    }

    #[test]
    fn constant_input_gives_constant_curve() {
        let data: Vec<(usize, f64)> = (0..5).flat_map(|_| (1..=92).map(|d| (d, 25.3))).collect();
        let c = fit_with_lambda(&data, 92, 10.0, &SplineConfig::default()).unwrap();
        assert!(c.values.iter().all(|v| (v - 25.3).abs() < 1e-9));
    }
}
