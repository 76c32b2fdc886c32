//! Bivariate logistic extreme-value dependence.
//!
//! With unit-Fréchet scores `z_j` the joint CDF is
//! `G(z1, z2) = exp(-V)`, `V = (z1^(-1/α) + z2^(-1/α))^α`.
//!
//! Everything below is written in terms of `t_j = 1/z_j = -log F_j(y_j)`,
//! which stays finite and well scaled in both tails. With `r = 1/α` and
//! `S = t1^r + t2^r` we have `V = S^α` and
//!
//! ```text
//! -∂V/∂z_j      = t_j^(r+1) S^(α-1)
//! ∂²V/∂z1∂z2    = (1 - r) (t1 t2)^(r+1) S^(α-2)        (≤ 0)
//! dz_j/dy_j     = f_j(y_j) z_j² exp(1/z_j) = f_j t_j^-2 e^(t_j)
//! ```
//!
//! Differentiating `exp(-V)` once in each argument gives the joint density
//!
//! ```text
//! f(y1, y2) = exp(-V) (V_1 V_2 - V_12) (dz1/dy1) (dz2/dy2)
//! log f     = log f1 + log f2 + t1 + t2 + (r-1)(log t1 + log t2)
//!             + (α-2) log S + log(V + r - 1) - V
//! ```
//!
//! and differentiating once in the first argument gives the conditional CDF
//!
//! ```text
//! P(Y2 ≤ y2 | Y1 = y1) = exp(t1 - V) t1^(r-1) S^(α-1).
//! ```
//!
//! Both reduce to the independence forms at `α = 1`. The density is checked
//! against mixed finite differences of `G` and the conditional CDF against
//! quadrature of the density in the test suites.

/// A margin evaluated at one point: log density and `t = -log F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginPoint {
    pub log_density: f64,
    pub neg_log_cdf: f64,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `log S = log(t1^r + t2^r)`.
fn log_s(t1: f64, t2: f64, r: f64) -> f64 {
    log_sum_exp(r * t1.ln(), r * t2.ln())
}

/// Logistic CDF `exp(-(z1^(-1/α) + z2^(-1/α))^α)` on the unit-Fréchet scale.
pub fn logistic_bivariate_cdf(z1: f64, z2: f64, alpha: f64) -> f64 {
    if z1 <= 0.0 || z2 <= 0.0 {
        return 0.0;
    }
    let (t1, t2) = (1.0 / z1, 1.0 / z2);
    if alpha == 1.0 {
        return (-(t1 + t2)).exp();
    }
    let v = (alpha * log_s(t1, t2, 1.0 / alpha)).exp();
    (-v).exp()
}

/// Log of the dependence factor of the joint density, i.e. everything except
/// `log f1 + log f2`. Returns 0 for `α = 1` and `-∞` where either margin sits
/// on a boundary of its support.
pub fn log_copula_factor(t1: f64, t2: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return 0.0;
    }
    let interior = |t: f64| t > 0.0 && t.is_finite();
    if !interior(t1) || !interior(t2) {
        return f64::NEG_INFINITY;
    }
    let r = 1.0 / alpha;
    let (l1, l2) = (t1.ln(), t2.ln());
    let ls = log_sum_exp(r * l1, r * l2);
    let v = (alpha * ls).exp();
    t1 + t2 + (r - 1.0) * (l1 + l2) + (alpha - 2.0) * ls + (v + r - 1.0).ln() - v
}

/// Joint log density of two consecutive days from their margins.
pub(crate) fn pair_log_density(prev: MarginPoint, cur: MarginPoint, alpha: f64) -> f64 {
    if prev.log_density == f64::NEG_INFINITY || cur.log_density == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    prev.log_density + cur.log_density + log_copula_factor(prev.neg_log_cdf, cur.neg_log_cdf, alpha)
}

/// `log P(Y_cur ≤ y_cur | Y_prev = y_prev)` given `t_prev = -log F(y_prev)` and
/// `t_cur = -log F(y_cur)`.
pub fn conditional_cdf_from_neg_log(t_prev: f64, t_cur: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return -t_cur;
    }
    if t_cur == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let r = 1.0 / alpha;
    let l_prev = t_prev.ln();
    let ls = log_sum_exp(r * l_prev, r * t_cur.ln());
    let v = (alpha * ls).exp();
    let out = t_prev - v + (r - 1.0) * l_prev + (alpha - 1.0) * ls;
    out.min(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_independence() {
        let (z1, z2) = (0.7, 2.3);
        let got = logistic_bivariate_cdf(z1, z2, 1.0);
        let want = (-1.0 / z1).exp() * (-1.0 / z2).exp();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn cdf_closed_form_point() {
        let got = logistic_bivariate_cdf(1.0, 1.0, 0.5);
        assert!((got - (-(2f64.sqrt())).exp()).abs() < 1e-15);
        assert!((got - 0.24312).abs() < 1e-5);
    }

    #[test]
    fn cdf_complete_dependence_limit() {
        for &z in &[0.3, 1.0, 4.0] {
            let got = logistic_bivariate_cdf(z, z, 1e-4);
            assert!((got - (-1.0 / z).exp()).abs() < 1e-3, "{z} {got}");
        }
        let got = logistic_bivariate_cdf(0.5, 3.0, 1e-3);
        assert!((got - (-2.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn cdf_margins() {
        // z2 → ∞ recovers the first margin
        let got = logistic_bivariate_cdf(1.3, f64::INFINITY, 0.4);
        assert!((got - (-1.0 / 1.3f64).exp()).abs() < 1e-15);
        assert_eq!(logistic_bivariate_cdf(0.0, 1.0, 0.4), 0.0);
    }

    #[test]
    fn factor_vanishes_under_independence() {
        assert_eq!(log_copula_factor(0.3, 2.0, 1.0), 0.0);
        let near = log_copula_factor(0.3, 2.0, 1.0 - 1e-12);
        assert!(near.abs() < 1e-10);
    }

    #[test]
    fn conditional_cdf_limits() {
        let a = 0.6;
        assert!(conditional_cdf_from_neg_log(0.8, 1e-30, a).abs() < 1e-12);
        assert_eq!(conditional_cdf_from_neg_log(0.8, f64::INFINITY, a), f64::NEG_INFINITY);
        assert!(conditional_cdf_from_neg_log(0.8, 500.0, a) < -400.0);
        // monotone: larger t_cur (smaller y_cur) gives smaller CDF
        let mut last = 0.0;
        for i in -20..40 {
            let t = (i as f64 * 0.25).exp();
            let c = conditional_cdf_from_neg_log(0.8, t, a);
            assert!(c <= last);
            last = c;
        }
    }
}
