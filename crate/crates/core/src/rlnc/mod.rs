//! Random linear network coding over GF(256).

pub mod codec;
pub mod gf256;
pub mod validate;

pub use codec::{encode, encode_with, random_coefficients, CodedPacket, DecoderState};
pub use gf256::{gf_inv, gf_mul, Gf256};
pub use validate::{expected_extra_packets, validate_codec, validate_codec_with, CodecReport};
