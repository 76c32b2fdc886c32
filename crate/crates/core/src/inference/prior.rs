use statrs::function::beta::ln_beta;

use crate::model::{ModelParams, SummerSegment};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub fn new(mean: f64, sd: f64) -> Self {
        Self { mean, sd }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z - self.sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return f64::NEG_INFINITY;
        }
        (self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - ln_beta(self.a, self.b)
    }
}

/// Prior distribution over the parameter vector.
///
/// `sigma` and `sigma_n2` carry normal priors on the log scale; `xi` is
/// uniform on (-0.5, 0.5); `phi`, `alpha` and `alpha01` are uniform on
/// (0, 1). [`PriorSpec::log_density`] is a density over
/// `(log σ, ξ, u, μ, log σ_N², φ, α, α01, a0, a1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub log_sigma: NormalPrior,
    pub u: NormalPrior,
    pub mu: NormalPrior,
    pub log_sigma_n2: NormalPrior,
    pub a0: BetaPrior,
    pub a1: BetaPrior,
}

impl PriorSpec {
    pub const DEFAULT_U_SD: f64 = 1.0;
    pub const U_CENTER_QUANTILE: f64 = 0.98;

    /// Default vague priors with the threshold prior centred on `u_center`.
    pub fn with_u_center(u_center: f64) -> Self {
        Self {
            log_sigma: NormalPrior::new(0.0, 10.0),
            u: NormalPrior::new(u_center, Self::DEFAULT_U_SD),
            mu: NormalPrior::new(0.0, 100.0),
            log_sigma_n2: NormalPrior::new(0.0, 10.0),
            a0: BetaPrior::new(1.0, 1.0),
            a1: BetaPrior::new(1.0, 1.0),
        }
    }

    /// Defaults with the threshold prior centred on the empirical 0.98
    /// quantile of all observed values.
    pub fn from_data(segments: &[SummerSegment]) -> Result<Self> {
        let pooled: Vec<f64> = segments.iter().flat_map(|s| s.observed()).collect();
        if pooled.is_empty() {
            return Err(Error::InvalidInput("no observed values".into()));
        }
        Ok(Self::with_u_center(stats::quantile(&pooled, Self::U_CENTER_QUANTILE)))
    }

    pub fn validate(&self) -> Result<()> {
        let normals = [
            ("log_sigma", self.log_sigma),
            ("u", self.u),
            ("mu", self.mu),
            ("log_sigma_n2", self.log_sigma_n2),
        ];
        for (name, n) in normals {
            if !(n.mean.is_finite() && n.sd.is_finite() && n.sd > 0.0) {
                return Err(Error::InvalidInput(format!("prior {name}: need finite mean and sd > 0")));
            }
        }
        for (name, b) in [("a0", self.a0), ("a1", self.a1)] {
            if !(b.a.is_finite() && b.b.is_finite() && b.a > 0.0 && b.b > 0.0) {
                return Err(Error::InvalidInput(format!("prior {name}: Beta shapes must be positive")));
            }
        }
        Ok(())
    }

    pub fn log_density(&self, p: &ModelParams) -> f64 {
        if p.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        self.log_sigma.log_density(p.sigma.ln())
            + self.u.log_density(p.u)
            + self.mu.log_density(p.mu)
            + self.log_sigma_n2.log_density(p.sigma_n2.ln())
            + self.a0.log_density(p.a0)
            + self.a1.log_density(p.a1)
    }
}
