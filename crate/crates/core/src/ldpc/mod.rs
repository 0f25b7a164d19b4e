//! Binary LDPC codes: parity-check matrices, construction, encoding and
//! sum-product decoding.

mod construct;
mod decoder;
mod encoder;
mod matrix;

pub use construct::{count_four_cycles, random_regular_code};
pub use decoder::{decode_bp, BpConfig, BpDecoder, DecodeResult, LLR_CLIP};
pub use encoder::{build_encoder, Encoder};
pub use matrix::{parse_alist, syndrome, write_alist, ParityCheckMatrix};
