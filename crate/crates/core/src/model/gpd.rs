//! Generalized Pareto distribution for threshold exceedances.
//!
//! Survivor function `P(Y > y | Y > u) = (1 + ξ (y - u) / σ)_+^(-1/ξ)`, with
//! the exponential limit `exp(-(y - u) / σ)` used whenever `|ξ| < XI_EPS`.

use super::copula::MarginPoint;

/// Below this magnitude the shape parameter is treated as exactly zero.
pub const XI_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gpd {
    pub threshold: f64,
    pub scale: f64,
    pub shape: f64,
}

impl Gpd {
    pub fn new(threshold: f64, scale: f64, shape: f64) -> Self {
        Self {
            threshold,
            scale,
            shape,
        }
    }

    /// Upper end of the support (`+∞` unless `ξ < 0`).
    pub fn upper_endpoint(&self) -> f64 {
        if self.shape < -XI_EPS {
            self.threshold - self.scale / self.shape
        } else {
            f64::INFINITY
        }
    }

    /// `log P(Y > y | Y > u)`; zero below the threshold, `-∞` past the
    /// upper endpoint.
    pub fn log_survival(&self, y: f64) -> f64 {
        let w = (y - self.threshold) / self.scale;
        if w <= 0.0 {
            return 0.0;
        }
        if self.shape.abs() < XI_EPS {
            return -w;
        }
        let arg = self.shape * w;
        if arg <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -arg.ln_1p() / self.shape
    }

    /// Log density; `-∞` outside `[u, endpoint)`.
    pub fn log_density(&self, y: f64) -> f64 {
        if y < self.threshold || y.is_nan() {
            return f64::NEG_INFINITY;
        }
        let ls = self.log_survival(y);
        if ls == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        // f = σ⁻¹ · S^(1+ξ)
        -self.scale.ln() + (1.0 + self.shape) * ls
    }

    pub fn cdf(&self, y: f64) -> f64 {
        -self.log_survival(y).exp_m1()
    }

    /// `-log F(y)`, the reciprocal of the unit-Fréchet score. Infinite at and
    /// below the threshold, zero at or past the upper endpoint.
    pub fn neg_log_cdf(&self, y: f64) -> f64 {
        if y <= self.threshold {
            return f64::INFINITY;
        }
        let ls = self.log_survival(y);
        if ls > -std::f64::consts::LN_2 {
            -(-ls.exp_m1()).ln()
        } else {
            -(-ls.exp()).ln_1p()
        }
    }

    /// Inverse of [`Gpd::neg_log_cdf`].
    pub fn quantile_from_neg_log_cdf(&self, t: f64) -> f64 {
        // S = 1 - exp(-t)
        let log_s = if t < std::f64::consts::LN_2 {
            (-(-t).exp_m1()).ln()
        } else {
            (-(-t).exp()).ln_1p()
        };
        self.quantile_from_log_survival(log_s)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.quantile_from_log_survival((-p).ln_1p())
    }

    fn quantile_from_log_survival(&self, log_s: f64) -> f64 {
        if self.shape.abs() < XI_EPS {
            self.threshold - self.scale * log_s
        } else {
            self.threshold + self.scale * (-self.shape * log_s).exp_m1() / self.shape
        }
    }

    pub fn margin_point(&self, y: f64) -> MarginPoint {
        MarginPoint {
            log_density: self.log_density(y),
            neg_log_cdf: self.neg_log_cdf(y),
        }
    }
}

pub fn gpd_log_density(y: f64, u: f64, sigma: f64, xi: f64) -> f64 {
    Gpd::new(u, sigma, xi).log_density(y)
}

/// Unit-Fréchet score `z = -1 / log F_GPD(y)`; zero at the threshold.
pub fn frechet_from_gpd(y: f64, u: f64, sigma: f64, xi: f64) -> f64 {
    1.0 / Gpd::new(u, sigma, xi).neg_log_cdf(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_at_threshold_is_inverse_scale() {
        let g = Gpd::new(30.0, 2.0, 0.0);
        assert_eq!(g.log_survival(30.0), 0.0);
        assert!((g.log_density(30.0) - (0.5f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn survivor_closed_form() {
        let g = Gpd::new(0.0, 1.0, 0.5);
        assert!((g.log_survival(2.0).exp() - 0.25).abs() < 1e-15);
        // f = (1 + 1)^-3
        assert!((g.log_density(2.0).exp() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn negative_shape_endpoint() {
        let g = Gpd::new(30.0, 2.0, -0.25);
        assert!((g.upper_endpoint() - 38.0).abs() < 1e-12);
        assert_eq!(g.log_density(39.0), f64::NEG_INFINITY);
        assert_eq!(g.log_density(38.0), f64::NEG_INFINITY);
        assert!(g.log_density(37.9).is_finite());
        assert_eq!(g.log_density(29.0), f64::NEG_INFINITY);
        assert_eq!(g.neg_log_cdf(38.5), 0.0);
    }

    #[test]
    fn shape_branch_is_continuous() {
        for &y in &[30.1, 31.0, 34.0, 40.0] {
            let limit = gpd_log_density(y, 30.0, 2.0, 0.0);
            for &xi in &[2e-8, -2e-8, 1e-7, -1e-7] {
                let general = gpd_log_density(y, 30.0, 2.0, xi);
                assert!(((general - limit) / limit).abs() < 1e-6, "{y} {xi}");
            }
            for &xi in &[1e-9, -1e-9] {
                let v = gpd_log_density(y, 30.0, 2.0, xi);
                assert!(((v - limit) / limit).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn frechet_definition() {
        let g = Gpd::new(0.0, 1.0, 0.1);
        // F(y) = e^-1 and F(y) = e^-2
        let y1 = g.quantile((-1.0f64).exp());
        let y2 = g.quantile((-2.0f64).exp());
        assert!((frechet_from_gpd(y1, 0.0, 1.0, 0.1) - 1.0).abs() < 1e-12);
        assert!((frechet_from_gpd(y2, 0.0, 1.0, 0.1) - 0.5).abs() < 1e-12);
        assert_eq!(frechet_from_gpd(0.0, 0.0, 1.0, 0.1), 0.0);
    }

    #[test]
    fn frechet_roundtrip_and_monotone() {
        for &xi in &[-0.4, -0.2, 0.0, 0.2, 0.45] {
            let g = Gpd::new(25.0, 1.5, xi);
            let mut last = 0.0;
            for i in 1..400 {
                let y = 25.0 + i as f64 * 0.01;
                if y >= g.upper_endpoint() {
                    break;
                }
                let z = frechet_from_gpd(y, 25.0, 1.5, xi);
                assert!(z > last);
                last = z;
                let back = (-1.0 / z).exp();
                assert!((back - g.cdf(y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quantile_inverts_neg_log_cdf() {
        for &xi in &[-0.3, 0.0, 0.3] {
            let g = Gpd::new(10.0, 3.0, xi);
            // large t puts y within a few ulps of the threshold, so stop at 10
            for &t in &[1e-12, 1e-3, 0.5, 2.0, 10.0] {
                let y = g.quantile_from_neg_log_cdf(t);
                let back = g.neg_log_cdf(y);
                assert!(((back - t) / t).abs() < 1e-8, "xi={xi} t={t} back={back}");
            }
        }
    }
}
