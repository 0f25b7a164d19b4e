//! Achievable information rates over the Gaussian optical intensity channel.
//!
//! Rates are in bits per channel use. Discrete inputs are equiprobable; the
//! continuous reference is the exponential input with mean `energy`, whose
//! output density is the exponential convolved with the Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{gaussian_log_likelihoods, snr_from_db};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::quadrature::simpson;
use crate::scalar::{log_sum_exp, Real};
use crate::special::ln_normal_cdf;

/// How a rate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

/// One point of a rate-vs-SNR curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub snr_db: f64,
    pub rate_bits: f64,
    pub method: RateMethod,
    pub mc_std_error: Option<f64>,
}

impl RatePoint {
    pub fn exact(snr_db: f64, rate_bits: f64, method: RateMethod) -> Self {
        Self {
            snr_db,
            rate_bits,
            method,
            mc_std_error: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Minimum number of Simpson nodes on the first pass; must be odd and ≥ 3.
    pub node_count: usize,
    /// Half-width of the Gaussian tails kept around the outermost levels, in units of sigma.
    pub tail_sigmas: f64,
    /// Convergence threshold between successive refinements, relative to `max(|I|, 1 bit)`.
    pub rel_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            node_count: 129,
            tail_sigmas: 10.0,
            rel_tolerance: 1e-8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 3 || self.node_count % 2 == 0 {
            return Err(Error::domain(format!(
                "node_count must be odd and at least 3, got {}",
                self.node_count
            )));
        }
        if !(self.tail_sigmas > 0.0) || !(self.rel_tolerance > 0.0) {
            return Err(Error::domain("tail_sigmas and rel_tolerance must be positive"));
        }
        Ok(())
    }
}

const MAX_INTERVALS: usize = 1 << 23;

/// Initial interval count: at least the configured nodes, and fine enough that
/// the narrowest feature (`width`) spans one interval.
fn initial_intervals(cfg: &QuadratureConfig, span: f64, width: f64) -> usize {
    let by_width = (span / width).ceil() as usize;
    (cfg.node_count - 1).max(by_width).min(MAX_INTERVALS / 2)
}

/// Mutual information `I(X;Y)` in bits of equiprobable `c` over `Y = X + N(0, sigma²)`,
/// by Simpson integration over `y ∈ [a_0 - Tσ, a_{M-1} + Tσ]`.
pub fn mi_discrete<T: Real>(c: &Constellation<T>, sigma: T, cfg: &QuadratureConfig) -> Result<T> {
    cfg.validate()?;
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::domain("sigma must be positive and finite"));
    }
    let levels = c.levels();
    let m = levels.len();
    if m == 1 {
        return Ok(T::zero());
    }
    let tail = T::lit(cfg.tail_sigmas) * sigma;
    let lo = levels[0] - tail;
    let hi = c.peak() + tail;
    let ln_m = T::from_count(m).ln();
    let inv_m = T::from_count(m).recip();
    let inv_ln2 = T::LOG2_E();

    let integrand = |y: T| {
        let mut ll = vec![T::zero(); m];
        gaussian_log_likelihoods(y, levels, sigma, &mut ll);
        let ln_mix = log_sum_exp(ll.iter().copied()) - ln_m;
        if ln_mix == T::neg_infinity() {
            return T::zero();
        }
        ll.iter()
            .map(|&l| l.exp() * (l - ln_mix))
            .sum::<T>()
            * inv_m
            * inv_ln2
    };
    let n0 = initial_intervals(cfg, (hi - lo).as_f64(), sigma.as_f64());
    let mi = simpson(
        "discrete mutual information",
        integrand,
        lo,
        hi,
        n0,
        T::lit(cfg.rel_tolerance),
        MAX_INTERVALS,
    )?;
    let cap = T::from_count(m).log2();
    Ok(mi.max(T::zero()).min(cap))
}

/// Monte-Carlo estimate of a rate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub rate: f64,
    pub std_error: f64,
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// Sample-mean estimate of `E[log2 p(y|x)/p(y)]` with uniform `x` and Gaussian noise.
///
/// Deterministic for a given `seed`.
pub fn mi_discrete_mc<T: Real>(
    c: &Constellation<T>,
    sigma: T,
    sample_count: usize,
    seed: u64,
) -> Result<McEstimate> {
    if sample_count < MIN_MC_SAMPLES {
        return Err(Error::domain(format!(
            "sample_count must be at least {MIN_MC_SAMPLES}, got {sample_count}"
        )));
    }
    if !(sigma > T::zero()) {
        return Err(Error::domain("sigma must be positive"));
    }
    let levels: Vec<f64> = c.levels().iter().map(|x| x.as_f64()).collect();
    let sigma = sigma.as_f64();
    let m = levels.len();
    let ln_m = (m as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ll = vec![0.0; m];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..sample_count {
        let i = rng.random_range(0..m);
        let z: f64 = rng.sample(StandardNormal);
        let y = levels[i] + sigma * z;
        gaussian_log_likelihoods(y, &levels, sigma, &mut ll);
        let ln_mix = log_sum_exp(ll.iter().copied()) - ln_m;
        let v = (ll[i] - ln_mix) * std::f64::consts::LOG2_E;
        sum += v;
        sum_sq += v * v;
    }
    let n = sample_count as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        rate: mean,
        std_error: (var / n).sqrt(),
    })
}

/// Natural log of the output density when the input is exponential with mean
/// `energy`: `p_Y(y) = (1/E)·exp(σ²/(2E²) - y/E)·Φ(y/σ - σ/E)`.
pub fn ln_output_pdf_exponential(y: f64, energy: f64, sigma: f64) -> f64 {
    let r = sigma / energy;
    -energy.ln() + 0.5 * r * r - y / energy + ln_normal_cdf(y / sigma - r)
}

/// Output density for an exponential input with mean `energy`.
pub fn output_pdf_exponential<T: Real>(y: T, energy: T, sigma: T) -> T {
    T::lit(ln_output_pdf_exponential(y.as_f64(), energy.as_f64(), sigma.as_f64()).exp())
}

const PDF_FLOOR: f64 = 1e-15;

/// Achievable rate `h(Y) - h(Z)` of the exponential input with mean `energy`, in bits.
///
/// The problem is scale invariant, so it is solved at unit mean; the
/// integration limits grow geometrically until the density falls below `1e-15`.
pub fn air_exponential<T: Real>(energy: T, sigma: T, cfg: &QuadratureConfig) -> Result<T> {
    cfg.validate()?;
    if !(energy > T::zero() && sigma > T::zero()) {
        return Err(Error::domain("energy and sigma must be positive"));
    }
    let s = (sigma / energy).as_f64();
    let ln_pdf = |y: f64| ln_output_pdf_exponential(y, 1.0, s);
    let ln_floor = PDF_FLOOR.ln();

    let mut lo = -cfg.tail_sigmas * s;
    while ln_pdf(lo) > ln_floor {
        lo *= 2.0;
    }
    let mut hi = 1.0 + cfg.tail_sigmas * s;
    while ln_pdf(hi) > ln_floor {
        hi = 2.0 * hi;
    }
    let neg_p_ln_p = |y: f64| {
        let lp = ln_pdf(y);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            -lp.exp() * lp
        }
    };
    let width = s.min(1.0);
    let n0 = initial_intervals(cfg, hi - lo, width);
    let h_y_nats = simpson(
        "output differential entropy",
        neg_p_ln_p,
        lo,
        hi,
        n0,
        cfg.rel_tolerance,
        MAX_INTERVALS,
    )?;
    let h_z_nats = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * s * s).ln();
    let rate = (h_y_nats - h_z_nats) * std::f64::consts::LOG2_E;
    Ok(T::lit(rate.max(0.0)))
}

/// Capacity upper bound `½·log2((e/2π)·(snr + 2)²)` for linear optical SNR.
pub fn capacity_upper<T: Real>(snr: T) -> T {
    let k = T::E() / (T::lit(2.0) * T::PI());
    let s2 = snr + T::lit(2.0);
    T::lit(0.5) * (k * s2 * s2).log2()
}

/// High-SNR capacity asymptote `½·log2((e/2π)·snr²)`.
pub fn capacity_asymptote<T: Real>(snr: T) -> T {
    let k = T::E() / (T::lit(2.0) * T::PI());
    T::lit(0.5) * (k * snr * snr).log2()
}

/// Optical SNR (dB) at which a rate curve reaches `target_rate`, by piecewise-linear
/// interpolation between the first pair of points that brackets it.
pub fn snr_at_rate(points: &[RatePoint], target_rate: f64) -> Result<f64> {
    if points.windows(2).any(|w| w[1].snr_db <= w[0].snr_db) {
        return Err(Error::domain("rate points must be strictly increasing in SNR"));
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.rate_bits <= target_rate && target_rate <= b.rate_bits {
            if b.rate_bits == a.rate_bits {
                return Ok(a.snr_db);
            }
            let t = (target_rate - a.rate_bits) / (b.rate_bits - a.rate_bits);
            return Ok(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    if let [only] = points {
        if only.rate_bits == target_rate {
            return Ok(only.snr_db);
        }
    }
    Err(Error::Range(format!(
        "target rate {target_rate} bits not bracketed by the curve"
    )))
}

/// Horizontal distance in dB between two curves at `rate`; positive when `b` needs less SNR.
pub fn snr_gap_db(a: &[RatePoint], b: &[RatePoint], rate: f64) -> Result<f64> {
    Ok(snr_at_rate(a, rate)? - snr_at_rate(b, rate)?)
}

/// Rate curve of a constellation shape held at its own mean intensity, one
/// point per SNR in dB. Points are evaluated in parallel.
pub fn discrete_rate_curve(
    c: &Constellation<f64>,
    snr_grid_db: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<RatePoint>> {
    let energy = c.mean();
    snr_grid_db
        .par_iter()
        .map(|&snr_db| {
            let sigma = energy / snr_from_db(snr_db);
            Ok(RatePoint::exact(
                snr_db,
                mi_discrete(c, sigma, cfg)?,
                RateMethod::Quadrature,
            ))
        })
        .collect()
}

/// One row of the rate-comparison table; unset fields are written empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub snr_db: f64,
    pub r_pam: Option<f64>,
    pub r_shaped: Option<f64>,
    pub i_exp: Option<f64>,
    pub c_upper: Option<f64>,
    pub c_asymptote: Option<f64>,
}

pub const RATE_CSV_HEADER: &str = "snr_db,r_pam,r_shaped,i_exp,c_upper,c_asymptote";

pub fn rates_csv(rows: &[RateRow]) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = format!("{RATE_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.snr_db,
            cell(r.r_pam),
            cell(r.r_shaped),
            cell(r.i_exp),
            cell(r.c_upper),
            cell(r.c_asymptote)
        ));
    }
    out
}
