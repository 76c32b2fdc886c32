//! Independent oracles shared by the integration suites: numerical
//! differentiation and quadrature of the model's CDFs, brute-force path
//! enumeration and simple Monte-Carlo helpers.
#![allow(dead_code)]

use heatwave_core::model::{
    bivariate_log_density, conditional_log_density, stationary_state_distribution, frechet_from_gpd, frechet_from_normal, logistic_bivariate_cdf,
    ModelParams, State,
};

pub fn frechet(y: f64, s: State, p: &ModelParams) -> f64 {
    match s {
        State::HeatWave => frechet_from_gpd(y, p.u, p.sigma, p.xi),
        State::Normal => frechet_from_normal(y, p.mu, p.sigma_n2),
    }
}

/// Joint CDF of two consecutive days on the temperature scale.
pub fn joint_cdf(y1: f64, y2: f64, s1: State, s2: State, p: &ModelParams) -> f64 {
    logistic_bivariate_cdf(frechet(y1, s1, p), frechet(y2, s2, p), p.copula_alpha(s1, s2))
}

/// Central mixed second difference of the joint CDF.
fn mixed_difference(y1: f64, y2: f64, h1: f64, h2: f64, s1: State, s2: State, p: &ModelParams) -> f64 {
    let c = |a: f64, b: f64| joint_cdf(a, b, s1, s2, p);
    (c(y1 + h1, y2 + h2) - c(y1 + h1, y2 - h2) - c(y1 - h1, y2 + h2) + c(y1 - h1, y2 - h2))
        / (4.0 * h1 * h2)
}

/// Mixed partial ∂²C/∂y1∂y2 by one Richardson step on the central difference.
pub fn fd_joint_density(y1: f64, y2: f64, h1: f64, h2: f64, s1: State, s2: State, p: &ModelParams) -> f64 {
    let coarse = mixed_difference(y1, y2, h1, h2, s1, s2, p);
    let fine = mixed_difference(y1, y2, 0.5 * h1, 0.5 * h2, s1, s2, p);
    (4.0 * fine - coarse) / 3.0
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    // split into panels first so narrow peaks are not stepped over
    let panels = 64;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (lo, hi) = (a + w * i as f64, a + w * (i + 1) as f64);
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, m, fm, whole, tol / panels as f64, 40)
        })
        .sum()
}

/// Margin of a state as (log density, -log F, quantile from -log F) closures.
fn margin_parts(s: State, p: &ModelParams) -> (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) {
    match s {
        State::HeatWave => {
            let g = p.gpd();
            (Box::new(move |y| g.log_density(y)), Box::new(move |t| g.quantile_from_neg_log_cdf(t)))
        }
        State::Normal => {
            let m = p.normal_margin();
            (Box::new(move |y| m.log_density(y)), Box::new(move |t| m.quantile_from_neg_log_cdf(t)))
        }
    }
}

/// ∫ g(y) dy over the support of the margin of state `s`, computed on the
/// `x = log(-log F(y))` scale where `dy = t e^{-t} / f(y) dx`.
pub fn integrate_over_margin<G: Fn(f64) -> f64>(g: G, s: State, p: &ModelParams) -> f64 {
    let (log_f, quantile) = margin_parts(s, p);
    let h = |x: f64| {
        let t = x.exp();
        let y = quantile(t);
        let lf = log_f(y);
        if !lf.is_finite() {
            return 0.0;
        }
        let v = g(y);
        if v == 0.0 {
            return 0.0;
        }
        v * (x - t - lf).exp()
    };
    integrate(&h, -40.0, 700f64.ln(), 1e-10)
}

/// Total mass of `f(· | y_prev, s_t, s_prev)`.
pub fn conditional_mass(y_prev: f64, s: State, sp: State, p: &ModelParams) -> f64 {
    if s == State::Normal && sp == State::Normal {
        let mean = p.mu + p.phi * (y_prev - p.mu);
        let sd = p.sigma_n2.sqrt();
        let f = |y: f64| conditional_log_density(y, y_prev, s, sp, p).exp();
        return integrate(&f, mean - 15.0 * sd, mean + 15.0 * sd, 1e-11);
    }
    integrate_over_margin(|y| conditional_log_density(y, y_prev, s, sp, p).exp(), s, p)
}

pub fn random_params<R: rand::Rng>(rng: &mut R) -> ModelParams {
    ModelParams {
        a0: rng.random_range(0.01..0.2),
        a1: rng.random_range(0.5..0.95),
        u: rng.random_range(28.0..36.0),
        sigma: rng.random_range(1.0..4.0),
        xi: rng.random_range(-0.45..0.45),
        mu: rng.random_range(18.0..28.0),
        sigma_n2: rng.random_range(4.0..16.0),
        phi: rng.random_range(0.1..0.9),
        alpha: rng.random_range(0.2..1.0),
        alpha01: rng.random_range(0.2..1.0),
    }
}

/// A point strictly inside the support of the margin of `s`, at margin
/// probability `q`.
pub fn margin_quantile(q: f64, s: State, p: &ModelParams) -> f64 {
    let t = -q.ln();
    match s {
        State::HeatWave => p.gpd().quantile_from_neg_log_cdf(t),
        State::Normal => p.normal_margin().quantile_from_neg_log_cdf(t),
    }
}

/// Finite-difference step for a margin: small against its scale and its
/// distance to either support boundary.
pub fn fd_step(y: f64, s: State, p: &ModelParams) -> f64 {
    match s {
        State::Normal => 0.01 * p.sigma_n2.sqrt(),
        State::HeatWave => {
            let g = p.gpd();
            let room = (y - p.u).min(g.upper_endpoint() - y);
            (0.01 * p.sigma).min(0.1 * room)
        }
    }
}

pub const COPULA_CASES: [(State, State); 3] = [
    (State::HeatWave, State::HeatWave),
    (State::Normal, State::HeatWave),
    (State::HeatWave, State::Normal),
];

/// Second, term-by-term evaluation of the complete-data likelihood.
pub fn loglik_by_hand(y: &[f64], s: &[State], p: &ModelParams) -> f64 {
    let outside = y.iter().zip(s).any(|(&v, &st)| st == State::HeatWave && p.gpd().log_density(v) == f64::NEG_INFINITY);
    if outside {
        return f64::NEG_INFINITY;
    }
    let (p0, p1) = stationary_state_distribution(p.a0, p.a1);
    let mut ll = if s[0] == State::HeatWave { p1.ln() } else { p0.ln() };
    ll += match s[0] {
        State::HeatWave => p.gpd().log_density(y[0]),
        State::Normal => {
            let v = p.sigma_n2 / (1.0 - p.phi * p.phi);
            -0.5 * (y[0] - p.mu).powi(2) / v - 0.5 * (2.0 * std::f64::consts::PI * v).ln()
        }
    };
    for t in 1..y.len() {
        let a = if s[t - 1] == State::HeatWave { p.a1 } else { p.a0 };
        ll += if s[t] == State::HeatWave { a.ln() } else { (1.0 - a).ln() };
        ll += match (s[t - 1], s[t]) {
            (State::Normal, State::Normal) => {
                let m = p.mu + p.phi * (y[t - 1] - p.mu);
                -0.5 * (y[t] - m).powi(2) / p.sigma_n2 - 0.5 * (2.0 * std::f64::consts::PI * p.sigma_n2).ln()
            }
            (sp, sc) => bivariate_log_density(y[t - 1], y[t], sp, sc, p) - p.margin_point(y[t - 1], sp).log_density,
        };
    }
    ll
}

/// Exact posterior probabilities of all `2^T` state paths, indexed by the
/// path's bit pattern with day 0 as the most significant bit.
pub fn enumerate_path_probabilities(y: &[f64], p: &ModelParams) -> Vec<f64> {
    let n = y.len();
    let logs: Vec<f64> = (0..1usize << n)
        .map(|code| loglik_by_hand(y, &path_from_code(code, n), p))
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn path_from_code(code: usize, n: usize) -> Vec<State> {
    (0..n).map(|t| State::from_index((code >> (n - 1 - t)) & 1)).collect()
}

pub fn path_code(states: &[State]) -> usize {
    states.iter().fold(0, |acc, s| (acc << 1) | s.index())
}

/// Pearson χ² p-value of multinomial counts against cell probabilities,
/// pooling cells with expected count below 5 into one.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let n: u64 = counts.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let e = p * n as f64;
        if e < 5.0 {
            pool_o += c as f64;
            pool_e += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e.max(1e-300);
        cells += 1;
    }
    if cells < 2 {
        return (1.0, cells);
    }
    let df = (cells - 1) as f64;
    (1.0 - ChiSquared::new(df).unwrap().cdf(stat), cells)
}

/// Mean and its standard error by batch means with `batches` batches.
pub fn batch_mean_se(x: &[f64], batches: usize) -> (f64, f64) {
    let n = x.len() / batches * batches;
    let mean = x[..n].iter().sum::<f64>() / n as f64;
    let b = n / batches;
    let bm: Vec<f64> = x[..n].chunks(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let v = bm.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (v / batches as f64).sqrt())
}

/// One-sample Kolmogorov–Smirnov p-value against `cdf`, by the asymptotic
/// Kolmogorov distribution with the Stephens small-sample correction.
pub fn ks_p_value<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lam * lam).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

/// Mean, variance and lag-1 correlation pooled over series, pairs within a
/// series only.
pub fn pooled_moments(series: &[Vec<f64>]) -> (f64, f64, f64) {
    let all: Vec<f64> = series.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let m = all.iter().sum::<f64>() / n;
    let v = all.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let mut c = 0.0;
    let mut k = 0.0;
    for s in series {
        for w in s.windows(2) {
            c += (w[0] - m) * (w[1] - m);
            k += 1.0;
        }
    }
    (m, v, c / k / v)
}

/// Reference parameter set used across simulation tests.
pub fn theta_star() -> ModelParams {
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

/// Huth events by exhaustive search: every window satisfying the three
/// criteria, keeping the longest (earliest on ties) within each maximal run
/// above `t2`.
pub fn brute_huth(v: &[f64], t1: f64, t2: f64) -> Vec<(usize, usize)> {
    let n = v.len();
    let mut run_of = vec![usize::MAX; n];
    let mut r = 0;
    for t in 0..n {
        if v[t] > t2 {
            if t == 0 || v[t - 1] <= t2 {
                r += 1;
            }
            run_of[t] = r;
        }
    }
    let mut best: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for s in 0..n {
        for e in s..n {
            let w = &v[s..=e];
            let ok = w.iter().all(|&x| x > t2)
                && w.iter().filter(|&&x| x > t1).count() >= 3
                && w.iter().sum::<f64>() / w.len() as f64 > t1;
            if ok {
                let entry = best.entry(run_of[s]).or_insert((s, w.len()));
                if w.len() > entry.1 {
                    *entry = (s, w.len());
                }
            }
        }
    }
    best.into_values().collect()
}

/// Start of the highest-sum window of `w` days, earliest on ties.
pub fn brute_worst_window(v: &[f64], w: usize) -> usize {
    let mut best = 0;
    for s in 1..=v.len() - w {
        if v[s..s + w].iter().sum::<f64>() > v[best..best + w].iter().sum::<f64>() {
            best = s;
        }
    }
    best
}
