use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::prior::PriorSpec;
use crate::model::{ModelParams, StateSequence};

/// Within-segment transition counts `n[i][j]` for `i → j`, pooled over
/// segments. Transitions never straddle segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransitionCounts {
    pub n: [[u64; 2]; 2],
}

pub fn count_transitions(states: &[StateSequence]) -> TransitionCounts {
    let mut c = TransitionCounts::default();
    for seq in states {
        for w in seq.as_slice().windows(2) {
            c.n[w[0].index()][w[1].index()] += 1;
        }
    }
    c
}

fn beta_draw<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let d = Beta::new(a, b).expect("Beta shapes are positive");
    // keep the draw inside the open interval
    d.sample(rng).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Conjugate draw `a0 ~ Beta(a + n01, b + n00)`, `a1 ~ Beta(a + n11, b + n10)`.
pub fn update_transition_probs<R: Rng + ?Sized>(
    states: &[StateSequence],
    prior: &PriorSpec,
    rng: &mut R,
) -> (f64, f64) {
    let c = count_transitions(states);
    let a0 = beta_draw(prior.a0.a + c.n[0][1] as f64, prior.a0.b + c.n[0][0] as f64, rng);
    let a1 = beta_draw(prior.a1.a + c.n[1][1] as f64, prior.a1.b + c.n[1][0] as f64, rng);
    (a0, a1)
}

/// The conjugate draw used as an independence proposal, accepted with the
/// ratio of stationary initial-state probabilities, which the Beta posterior
/// does not account for. Returns the new `(a0, a1)` and whether the draw
/// was accepted.
pub fn transition_mh_step<R: Rng + ?Sized>(
    current: &ModelParams,
    states: &[StateSequence],
    prior: &PriorSpec,
    rng: &mut R,
) -> ((f64, f64), bool) {
    let (a0, a1) = update_transition_probs(states, prior, rng);
    let proposal = ModelParams { a0, a1, ..*current };
    let log_ratio: f64 = states
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| proposal.log_initial_state(s[0]) - current.log_initial_state(s[0]))
        .sum();
    if rng.random::<f64>().ln() < log_ratio {
        ((a0, a1), true)
    } else {
        ((current.a0, current.a1), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use crate::model::State;

    #[test]
    fn counts_stay_within_segments() {
        let segs = [StateSequence::from_bits("0011"), StateSequence::from_bits("1000")];
        let c = count_transitions(&segs);
        assert_eq!(c.n, [[3, 1], [1, 1]]);
    }

    #[test]
    fn no_heat_days_leaves_a1_at_prior() {
        let prior = PriorSpec::with_u_center(30.0);
        let segs = vec![StateSequence::all(State::Normal, 92); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| update_transition_probs(&segs, &prior, &mut rng).1).sum::<f64>() / n as f64;
        // Beta(1,1) mean 1/2, sd of the mean ≈ 0.002
        assert!((mean - 0.5).abs() < 0.01);
    }
}
