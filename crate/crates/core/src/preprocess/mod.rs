//! Station file parsing, JJA extraction and de-seasonalization.

mod ecad;
mod seasonal;

pub use ecad::{extract_jja, parse_ecad, parse_series, parse_two_column_csv, Quality, RawStationSeries, JJA_DAYS};
pub use seasonal::{
    bspline_basis, deseasonalize, fit_seasonal_quantile_spline, second_difference_penalty, fit_with_lambda, pooled_day_values, SeasonalCurve, SplineConfig,
};
