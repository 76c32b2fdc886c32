//! Extremal-dependence diagnostics and posterior predictive checks.
//!
//! Every estimator takes a list of segments and never forms pairs across a
//! segment boundary. `NaN` entries are missing days. Undefined estimates
//! (empty denominators) are `None`, never zero.

mod estimators;
mod ppc;

pub use estimators::{
    chi_curve, chi_hat, extremal_index, frechet_rank_transform, lag_pairs, pacf, Pacf,
};
pub use ppc::{posterior_predictive_check, PPCReport, PpcConfig, PpcRow, Statistic};
