//! Geometric constellation shaping for optical intensity (IM/DD) channels.
//!
//! The crate builds exponential-like, equiprobable intensity constellations
//! whose levels are integer multiples of a basic level, and evaluates them by
//! achievable-rate computation and by LDPC coded-modulation simulation.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! name the common instantiations.
//!
//! ```
//! use ois_shape::build_shaped;
//!
//! let design = build_shaped::<f64>(2, 2, 1.0).unwrap();
//! assert_eq!(design.integer_levels, vec![0, 2, 6, 15]);
//! assert!((design.basic_level - 4.0 / 23.0).abs() < 1e-15);
//! ```

pub mod airate;
pub mod channel;
pub mod constellation;
pub mod error;
pub mod ldpc;
pub mod mapping;
mod quadrature;
pub mod scalar;
pub mod sim;
pub mod special;

pub use airate::{
    air_exponential, capacity_asymptote, capacity_upper, mi_discrete, mi_discrete_mc,
    output_pdf_exponential, snr_at_rate, snr_gap_db, QuadratureConfig, RateMethod, RatePoint,
};
pub use channel::{parse_snr_grid, snr_from_db, snr_to_db, ChannelParams};
pub use constellation::{
    approx_gain_db, basic_level, build_shaped, centroid, centroid_constellation, pam, papr,
    quantile, quantize_levels, scaling_gain_db, shift_scale, Constellation, Quantile, ShapedDesign,
};
pub use error::{Error, Result};
pub use mapping::{bit_llrs, gray_labeling, hard_demap, modulate, Demapper, Labeling};
pub use scalar::Real;

pub type Constellation64 = Constellation<f64>;
pub type Constellation32 = Constellation<f32>;
pub type ShapedDesign64 = ShapedDesign<f64>;
pub type ShapedDesign32 = ShapedDesign<f32>;
pub type ChannelParams64 = ChannelParams<f64>;
pub type ChannelParams32 = ChannelParams<f32>;
