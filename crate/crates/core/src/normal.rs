//! Standard normal distribution helpers for Wald inference.

use std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Two-sided tail probability `2·(1 − Φ(|z|))`, evaluated through `erfc` so
/// that small p-values keep their relative precision.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    libm::erfc(z.abs() / SQRT_2).clamp(0.0, 1.0)
}

/// 97.5% standard normal quantile used for 95% Wald intervals.
pub const Z_975: f64 = 1.96;
