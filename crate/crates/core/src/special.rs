//! Normal-distribution helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Gaussian tail `Q(x) = 1 - Φ(x)`.
pub fn normal_q(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `ln Φ(x)`, accurate far into the lower tail where `Φ(x)` underflows.
pub fn ln_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-normal_q(x)).ln_1p()
    } else if x > -5.0 {
        normal_cdf(x).ln()
    } else {
        // Φ(x) = φ(x)·R(-x) with R the Mills ratio.
        -0.5 * x * x - 0.5 * (2.0 * PI).ln() + mills_ratio(-x).ln()
    }
}

/// Mills ratio `Q(t)/φ(t)` for `t >= 5` by backward evaluation of its continued fraction.
fn mills_ratio(t: f64) -> f64 {
    let mut acc = t;
    for k in (1..=80).rev() {
        acc = t + k as f64 / acc;
    }
    1.0 / acc
}
