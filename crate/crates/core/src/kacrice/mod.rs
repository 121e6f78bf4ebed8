//! Kac-Rice one- and two-point functions of the critical points.

pub mod blocks;
pub mod conditional;
pub mod expansions;
pub mod k2;
pub mod moment;
pub mod onepoint;
pub mod series;

pub use blocks::{covariance_blocks, one_point_covariance, Branch, CovarianceBlocks, OnePointCovariance};
pub use conditional::{conditional_covariance, eigen_delta_closed, ConditionalCovariance, EigenSource};
pub use expansions::{verify_series, SeriesQuantity, SeriesReport};
pub use k2::{k2, k2_all_types, k2_limit_deviation, k2_spherical_crosscheck, k2_typed, K2Estimate, TypePair};
pub use moment::{second_factorial_moment, MomentQuadrature};
pub use onepoint::{expected_count, expected_counts, k1_density, ExpectedCounts};

use std::f64::consts::PI;

/// Density of critical points per unit area, `1 / (2 sqrt(3) pi)`.
pub const K1: f64 = 0.091_888_149_236_965_35;

/// `lim_{r -> 0} K2(r) = 1 / (2^5 3 sqrt(3) pi^2)`.
pub fn k2_limit() -> f64 {
    1.0 / (96.0 * 3f64.sqrt() * PI * PI)
}

/// Leading coefficient of `E[N (N - 1)]` in `rho^4`, `1 / (2^5 3 sqrt(3))`.
pub fn second_moment_coefficient() -> f64 {
    1.0 / (96.0 * 3f64.sqrt())
}
