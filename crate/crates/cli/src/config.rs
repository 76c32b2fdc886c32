//! TOML run configuration. Every table rejects unknown keys; command-line
//! flags override file values and the resolved result is written next to
//! the outputs.

use std::path::{Path, PathBuf};

use heatwave_core::diagnostics::PpcConfig;
use heatwave_core::inference::{BetaPrior, MCMCConfig, NormalPrior, PriorSpec};
use heatwave_core::preprocess::SplineConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub preprocess: PreprocessConfig,
    pub prior: PriorOverrides,
    pub mcmc: McmcSettings,
    pub generator: GeneratorSettings,
    pub diagnostics: DiagnosticsSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("out"),
            threads: 0,
            preprocess: PreprocessConfig::default(),
            prior: PriorOverrides::default(),
            mcmc: McmcSettings::default(),
            generator: GeneratorSettings::default(),
            diagnostics: DiagnosticsSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub input: Option<PathBuf>,
    pub year_from: i32,
    pub year_to: i32,
    pub drop_suspect: bool,
    pub deseasonalize: bool,
    /// Fixed spline smoothing parameter; cross-validated when absent.
    pub lambda: Option<f64>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { input: None, year_from: 1990, year_to: 2011, drop_suspect: false, deseasonalize: true, lambda: None }
    }
}

impl PreprocessConfig {
    pub fn spline(&self) -> SplineConfig {
        SplineConfig { lambda: self.lambda, ..SplineConfig::default() }
    }
}

/// Overrides of the default priors; absent fields keep the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorOverrides {
    pub u_mean: Option<f64>,
    pub u_sd: Option<f64>,
    pub mu_mean: Option<f64>,
    pub mu_sd: Option<f64>,
    pub log_sigma_mean: Option<f64>,
    pub log_sigma_sd: Option<f64>,
    pub log_sigma_n2_mean: Option<f64>,
    pub log_sigma_n2_sd: Option<f64>,
    pub a0_beta: Option<[f64; 2]>,
    pub a1_beta: Option<[f64; 2]>,
}

impl PriorOverrides {
    pub fn apply(&self, mut p: PriorSpec) -> PriorSpec {
        fn normal(n: &mut NormalPrior, mean: Option<f64>, sd: Option<f64>) {
            if let Some(m) = mean {
                n.mean = m;
            }
            if let Some(s) = sd {
                n.sd = s;
            }
        }
        normal(&mut p.u, self.u_mean, self.u_sd);
        normal(&mut p.mu, self.mu_mean, self.mu_sd);
        normal(&mut p.log_sigma, self.log_sigma_mean, self.log_sigma_sd);
        normal(&mut p.log_sigma_n2, self.log_sigma_n2_mean, self.log_sigma_n2_sd);
        if let Some([a, b]) = self.a0_beta {
            p.a0 = BetaPrior::new(a, b);
        }
        if let Some([a, b]) = self.a1_beta {
            p.a1 = BetaPrior::new(a, b);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcSettings {
    pub n_iterations: usize,
    pub n_burnin: usize,
    pub thinning: usize,
    pub adaptation_window: usize,
    pub target_acceptance: f64,
    pub impute_mh_steps: usize,
}

impl Default for McmcSettings {
    fn default() -> Self {
        let d = MCMCConfig::default();
        Self {
            n_iterations: d.n_iterations,
            n_burnin: d.n_burnin,
            thinning: d.thinning,
            adaptation_window: d.adaptation_window,
            target_acceptance: d.target_acceptance,
            impute_mh_steps: d.impute_mh_steps,
        }
    }
}

impl McmcSettings {
    pub fn to_config(&self, seed: u64) -> MCMCConfig {
        MCMCConfig {
            n_iterations: self.n_iterations,
            n_burnin: self.n_burnin,
            thinning: self.thinning,
            seed,
            adaptation_window: self.adaptation_window,
            target_acceptance: self.target_acceptance,
            impute_mh_steps: self.impute_mh_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSettings {
    pub summers_per_draw: usize,
    pub n_days: usize,
    pub worst_window: usize,
    /// Huth thresholds in °C; when absent they are the 0.975 and 0.81
    /// quantiles of the observed record.
    pub huth_t1: Option<f64>,
    pub huth_t2: Option<f64>,
    /// Width of the bins of the event mean-temperature density, °C.
    pub temperature_bin: f64,
    /// Also write every simulated day and every detected event.
    pub write_summers: bool,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self {
            summers_per_draw: 500,
            n_days: heatwave_core::preprocess::JJA_DAYS,
            worst_window: 3,
            huth_t1: None,
            huth_t2: None,
            temperature_bin: 0.25,
            write_summers: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSettings {
    pub chi_quantiles: Vec<f64>,
    pub chi_lags: Vec<usize>,
    pub pacf_max_lag: usize,
    pub extremal_quantiles: Vec<f64>,
    /// Summers simulated per posterior draw for the predictive check.
    pub ppc_summers_per_draw: usize,
    pub ppc_summers: usize,
    pub ppc_quantiles: Vec<f64>,
    pub ppc_ei_quantile: f64,
    pub ppc_thresholds: Vec<f64>,
    pub ppc_lags: Vec<usize>,
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        let p = PpcConfig::default();
        Self {
            chi_quantiles: (0..20).map(|k| 0.80 + 0.01 * k as f64).chain([0.995]).collect(),
            chi_lags: vec![1, 2, 3, 4, 5],
            pacf_max_lag: 10,
            extremal_quantiles: vec![0.9, 0.95, 0.975, 0.99],
            ppc_summers_per_draw: p.n_summers,
            ppc_summers: p.n_summers,
            ppc_quantiles: p.quantiles,
            ppc_ei_quantile: p.ei_quantile,
            ppc_thresholds: p.thresholds,
            ppc_lags: p.lags,
        }
    }
}

impl DiagnosticsSettings {
    pub fn ppc(&self) -> PpcConfig {
        PpcConfig {
            n_summers: self.ppc_summers,
            quantiles: self.ppc_quantiles.clone(),
            ei_quantile: self.ppc_ei_quantile,
            thresholds: self.ppc_thresholds.clone(),
            lags: self.ppc_lags.clone(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("seed = 3\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[mcmc]\nn_iter = 5\n").is_err());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = RunConfig::parse("[generator]\nhuth_t1 = 35.0\n").unwrap();
        assert_eq!(c.generator.summers_per_draw, 500);
        assert_eq!(c.generator.huth_t1, Some(35.0));
        assert_eq!(c.mcmc.n_iterations, 50_000);
    }

    #[test]
    fn resolved_config_roundtrips() {
        let mut c = RunConfig::default();
        c.prior.a1_beta = Some([2.0, 1.0]);
        c.preprocess.input = Some("x.txt".into());
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }
}
