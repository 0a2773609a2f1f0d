//! Monte Carlo oracle: exact simulation of stationary Gaussian fields on
//! periodic grids (tori in ℝ¹–ℝ³ and the circle S¹), discrete local maxima,
//! and empirical peak rates and height distributions.

mod covariance;
mod field;
mod maxima;
mod stats;

pub use covariance::CovarianceSpec;
pub use field::{
    simulate_circle_field, simulate_field_euclidean, FieldSimulator, GridConfig, GridField, MAX_POINTS_3D,
    MAX_SPACING_RATIO,
};
pub use maxima::{extract_local_maxima, LocalMaximum, Maxima};
pub use stats::{estimate_peak_statistics, ks_block_bootstrap, KsReport, PeakStatistics, SimResult, MIN_REPLICATES};
