//! Standard-normal helpers with tail-stable logarithms.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

use super::copula::MarginPoint;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `log Φ(x)`, accurate across the whole double range.
pub fn std_normal_log_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-0.5 * erfc(x / SQRT_2)).ln_1p()
    } else if x > -30.0 {
        (0.5 * erfc(-x / SQRT_2)).ln()
    } else {
        // Mills-ratio asymptotic series.
        let x2 = x * x;
        let inv = 1.0 / x2;
        let series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
    }
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMargin {
    pub mean: f64,
    pub sd: f64,
}

impl NormalMargin {
    pub fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }

    pub fn log_density(&self, y: f64) -> f64 {
        std_normal_log_pdf((y - self.mean) / self.sd) - self.sd.ln()
    }

    pub fn neg_log_cdf(&self, y: f64) -> f64 {
        -std_normal_log_cdf((y - self.mean) / self.sd)
    }

    pub fn cdf(&self, y: f64) -> f64 {
        std_normal_log_cdf((y - self.mean) / self.sd).exp()
    }

    /// Inverse of [`NormalMargin::neg_log_cdf`], splitting at the median so
    /// both tails keep full relative precision.
    pub fn quantile_from_neg_log_cdf(&self, t: f64) -> f64 {
        let p = (-t).exp();
        let x = if p < 0.5 {
            std_normal_quantile(p)
        } else {
            -std_normal_quantile(-(-t).exp_m1())
        };
        self.mean + self.sd * x
    }

    pub fn margin_point(&self, y: f64) -> MarginPoint {
        MarginPoint {
            log_density: self.log_density(y),
            neg_log_cdf: self.neg_log_cdf(y),
        }
    }
}

/// Unit-Fréchet score `z = -1 / log Φ((y - μ)/σ_N)` with `σ_N = sqrt(sigma_n2)`.
pub fn frechet_from_normal(y: f64, mu: f64, sigma_n2: f64) -> f64 {
    1.0 / NormalMargin::new(mu, sigma_n2.sqrt()).neg_log_cdf(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    // log Φ(x) from mpmath at 50 digits:
    //   mp.log(mp.ncdf(x)) for x in (-10, -35, -50, -5, 3)
    const LOG_PHI_REF: [(f64, f64); 5] = [
        (-10.0, -53.231_285_150_512_47),
        (-35.0, -616.975_101_261_922_5),
        (-50.0, -1_254.831_361_139_42),
        (-5.0, -15.064_998_393_988_725),
        (3.0, -0.001_350_809_964_748_193_8),
    ];

    #[test]
    fn log_cdf_matches_high_precision() {
        for &(x, want) in &LOG_PHI_REF {
            let got = std_normal_log_cdf(x);
            assert!(((got - want) / want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_cdf_continuous_at_branch() {
        let a = std_normal_log_cdf(-30.0 + 1e-9);
        let b = std_normal_log_cdf(-30.0 - 1e-9);
        assert!(((a - b) / a).abs() < 1e-9);
    }

    #[test]
    fn frechet_symmetry_point() {
        let z = frechet_from_normal(20.0, 20.0, 4.0);
        assert!((z - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!((z - std::f64::consts::LOG2_E).abs() < 1e-15);
    }

    #[test]
    fn frechet_deep_tail_stays_positive() {
        // ten standard deviations below the mean
        let z = frechet_from_normal(20.0 - 10.0 * 2.0, 20.0, 4.0);
        assert!(z > 0.0 && z.is_finite());
        assert!(((1.0 / z - 53.231_285_150_512_47) / 53.23).abs() < 1e-12);
    }

    #[test]
    fn frechet_monotone_and_roundtrip() {
        let mut last = 0.0;
        for i in -300..300 {
            let y = 20.0 + i as f64 * 0.05;
            let z = frechet_from_normal(y, 20.0, 4.0);
            assert!(z > last);
            last = z;
            let m = NormalMargin::new(20.0, 2.0);
            assert!(((-1.0 / z).exp() - m.cdf(y)).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_roundtrip_in_both_tails() {
        let m = NormalMargin::new(0.0, 1.0);
        for &t in &[1e-15, 1e-6, 0.3, 0.693, 2.0, 50.0, 600.0] {
            let y = m.quantile_from_neg_log_cdf(t);
            let back = m.neg_log_cdf(y);
            assert!(((back - t) / t).abs() < 1e-9, "t={t} back={back}");
        }
    }
}
