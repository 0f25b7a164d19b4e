use serde::{Deserialize, Serialize};


use crate::error::{Error, Result};
use crate::scalar::Real;

/// Average-intensity budget and noise level of the optical intensity channel `Y = X + Z`.
///
/// The optical SNR is `energy / sigma`, a ratio of intensities rather than of
/// squared amplitudes, so its dB value is `10·log10(energy / sigma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams<T> {
    energy: T,
    sigma: T,
}

impl<T: Real> ChannelParams<T> {
    pub fn new(energy: T, sigma: T) -> Result<Self> {
        if !(energy > T::zero() && energy.is_finite()) {
            return Err(Error::domain(format!("energy must be positive and finite, got {energy}")));
        }
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(Self { energy, sigma })
    }

    /// Channel with the given intensity budget and optical SNR in dB.
    pub fn from_snr_db(energy: T, snr_db: T) -> Result<Self> {
        Self::new(energy, energy / snr_from_db(snr_db))
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn snr(&self) -> T {
        self.energy / self.sigma
    }

    pub fn snr_db(&self) -> T {
        snr_to_db(self.snr())
    }
}

/// Linear optical SNR from its dB value.
pub fn snr_from_db<T: Real>(snr_db: T) -> T {
    T::lit(10.0).powf(snr_db / T::lit(10.0))
}

pub fn snr_to_db<T: Real>(snr: T) -> T {
    T::lit(10.0) * snr.log10()
}

/// Fills `out[i]` with `ln N(y; a_i, sigma²)` for every level `a_i`.
///
/// Shared by the rate computations and the bit demapper so both see the same
/// likelihoods.
pub fn gaussian_log_likelihoods<T: Real>(y: T, levels: &[T], sigma: T, out: &mut [T]) {
    debug_assert_eq!(levels.len(), out.len());
    let norm = -(sigma * (T::lit(2.0) * T::PI()).sqrt()).ln();
    let inv = (T::lit(2.0) * sigma * sigma).recip();
    for (o, &a) in out.iter_mut().zip(levels) {
        let d = y - a;
        *o = norm - d * d * inv;
    }
}

/// Parses an inclusive SNR grid `start:step:stop` in dB.
///
/// Points are `start + i·step`, computed directly rather than accumulated. A
/// single number is a one-point grid.
pub fn parse_snr_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::domain(format!("`{s}` is not a number in grid `{spec}`")))
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || b < a {
                return Err(Error::domain(format!(
                    "grid `{spec}` needs a positive step and stop >= start"
                )));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(Error::domain(format!("grid `{spec}` is not of the form start:step:stop"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(ChannelParams::new(0.0_f64, 1.0).is_err());
        assert!(ChannelParams::new(1.0_f64, -1.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 1.0).is_err());
        assert!(ChannelParams::new(1.0_f64, f64::INFINITY).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_snr_grid("0:2.5:10").unwrap(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(parse_snr_grid("3").unwrap(), vec![3.0]);
        let g = parse_snr_grid("5:0.1:6").unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 6.0).abs() < 1e-12);
        assert!(parse_snr_grid("5:0:6").is_err());
        assert!(parse_snr_grid("6:1:5").is_err());
        assert!(parse_snr_grid("a:1:5").is_err());
        assert!(parse_snr_grid("1:2").is_err());
    }

    #[test]
    fn snr_is_intensity_ratio() {
        let ch = ChannelParams::new(2.0_f64, 0.2).unwrap();
        assert!((ch.snr() - 10.0).abs() < 1e-14);
        assert!((ch.snr_db() - 10.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn snr_db_round_trip(energy in 1e-3_f64..1e3, snr_db in -40.0_f64..80.0) {
            let ch = ChannelParams::from_snr_db(energy, snr_db).unwrap();
            let back = ch.snr_db();
            prop_assert!(((back - snr_db) / snr_db.abs().max(1.0)).abs() < 1e-12);
            let lin = snr_from_db(snr_db);
            prop_assert!(((ch.snr() - lin) / lin).abs() < 1e-12);
        }
    }
}
