mod common;

use common::*;
use heatwave_core::diagnostics::chi_hat;
use heatwave_core::generator::*;
use heatwave_core::inference::ffbs_sample_states;
use heatwave_core::model::{conditional_cdf, ModelParams, State, StateSequence, SummerSegment};
use heatwave_core::stats;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;


#[test]
fn no_heat_waves_gives_stationary_ar1() {
    let p = ModelParams { a0: 1e-12, ..theta_star() };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let series: Vec<Vec<f64>> = (0..10_870).map(|_| simulate_summer(&p, 92, &mut rng).unwrap().values).collect();
    let (m, v, r) = pooled_moments(&series);
    let want_v = p.sigma_n2 / (1.0 - p.phi * p.phi);
    assert!((m - p.mu).abs() < 0.01 * p.mu, "mean {m}");
    assert!((v - want_v).abs() < 0.01 * want_v, "variance {v} vs {want_v}");
    assert!((r - p.phi).abs() < 0.01 * p.phi, "lag-1 correlation {r}");
}

fn forced_heat_pairs(p: &ModelParams, n_series: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hot = StateSequence::all(State::HeatWave, len);
    (0..n_series).map(|_| simulate_values(&hot, p, &mut rng).unwrap()).collect()
}

#[test]
fn independent_heat_days_have_chi_near_one_minus_q() {
    let p = ModelParams { alpha: 1.0, ..theta_star() };
    let series = forced_heat_pairs(&p, 2000, 92, 2);
    let pooled: Vec<f64> = series.iter().flatten().copied().collect();
    let u = stats::quantile(&pooled, 0.9);
    let chi = chi_hat(&series, u, 1).unwrap();
    // about 18,000 conditioning pairs: sd ≈ 0.0022
    assert!((chi - 0.1).abs() < 0.01, "chi = {chi}");
}

#[test]
fn logistic_heat_days_approach_limit_chi() {
    let p = ModelParams { alpha: 0.5, ..theta_star() };
    let series = forced_heat_pairs(&p, 2000, 92, 3);
    let pooled: Vec<f64> = series.iter().flatten().copied().collect();
    let u = stats::quantile(&pooled, 0.98);
    let chi = chi_hat(&series, u, 1).unwrap();
    assert!((chi - (2.0 - 2f64.sqrt())).abs() < 0.05, "chi = {chi}");
}

/// F(y_t | y_{t-1}) evaluated with the likelihood's conditional CDF must be
/// uniform over simulated copula-case days.
#[test]
fn conditional_draws_pass_pit_test() {
    let p = theta_star();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pit = Vec::new();
    let cases = [(State::HeatWave, State::HeatWave), (State::Normal, State::HeatWave), (State::HeatWave, State::Normal)];
    while pit.len() < 100_000 {
        let (a, b) = cases[rng.random_range(0..3)];
        let seq = StateSequence(vec![a, b]);
        let y = simulate_values(&seq, &p, &mut rng).unwrap();
        pit.push(conditional_cdf(y[1], y[0], b, a, &p));
    }
    let pv = ks_p_value(&pit, |x| x.clamp(0.0, 1.0));
    assert!(pv > 0.001, "KS p = {pv}");
}

#[test]
fn generator_counts_and_propagates_uncertainty() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<ModelParams> = (0..100)
        .map(|_| ModelParams { mu: 24.0 + rng.random_range(-1.0..1.0), sigma: rng.random_range(1.5..2.5), ..theta_star() })
        .collect();
    let mut n = 0;
    let mut per_draw = vec![(0.0, 0usize); 100];
    for s in posterior_weather_generator(&draws, 500, 92, 11) {
        let s = s.unwrap();
        n += 1;
        let e = &mut per_draw[s.source_draw];
        e.0 += s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        e.1 += 1;
    }
    assert_eq!(n, 50_000);
    let means: Vec<f64> = per_draw.iter().map(|(s, k)| s / *k as f64).collect();
    assert!(stats::variance(&means) > 0.0);
}

#[test]
fn identical_draws_match_single_draw_monte_carlo() {
    let draws = vec![theta_star(); 20];
    let pooled: Vec<f64> = posterior_weather_generator(&draws, 500, 92, 21)
        .map(|s| s.unwrap().values.iter().sum::<f64>() / 92.0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let single: Vec<f64> = (0..10_000)
        .map(|_| simulate_summer(&theta_star(), 92, &mut rng).unwrap().values.iter().sum::<f64>() / 92.0)
        .collect();
    let (ma, mb) = (stats::mean(&pooled), stats::mean(&single));
    let se = ((stats::variance(&pooled) + stats::variance(&single)) / 10_000.0).sqrt();
    assert!((ma - mb).abs() < 4.0 * se, "{ma} vs {mb}");
}

#[test]
fn retrospective_temperatures_exceed_threshold() {
    let p = theta_star();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let segs: Vec<SummerSegment> = (0..5)
        .map(|k| SummerSegment::complete(2000 + k, simulate_summer(&p, 92, &mut rng).unwrap().values).unwrap())
        .collect();
    let draws: Vec<Vec<StateSequence>> = (0..50)
        .map(|_| segs.iter().map(|s| ffbs_sample_states(&s.values, &p, 0, &mut rng).unwrap()).collect())
        .collect();
    let r = retrospective_summaries(&draws, &segs);
    assert!(r.temperatures.iter().all(|&t| t >= p.u));
    for pmf in [&r.length_pmf, &r.count_pmf] {
        assert!((pmf.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn huth_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..40).map(|_| (rng.random_range(28.0..38.0f64) * 2.0).round() / 2.0).collect();
        let got: Vec<(usize, usize)> = detect_huth(&v, 35.0, 31.0).iter().map(|e| (e.start, e.length)).collect();
        assert_eq!(got, brute_huth(&v, 35.0, 31.0), "{v:?}");
    }
}

proptest! {
    #[test]
    fn huth_events_meet_all_criteria(v in prop::collection::vec(25.0f64..40.0, 5..92), t1 in 33.0f64..37.0, gap in 1.0f64..6.0) {
        let t2 = t1 - gap;
        for e in detect_huth(&v, t1, t2) {
            prop_assert!(e.temps.iter().filter(|&&x| x > t1).count() >= 3);
            prop_assert!(e.mean_temp() > t1);
            prop_assert!(e.temps.iter().all(|&x| x > t2));
        }
    }

    #[test]
    fn worst_annual_is_one_three_day_event(v in prop::collection::vec(10.0f64..40.0, 3..92)) {
        let e = detect_worst_annual(&v, 3).unwrap();
        prop_assert_eq!(e.length, 3);
        let best = (0..=v.len() - 3).map(|s| v[s..s + 3].iter().sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(e.temps.iter().sum::<f64>(), best);
    }
}
