//! Exact synthesis of discrete memoryless channels over a noiseless bit pipe
//! with common randomness.
//!
//! Given a source distribution and a channel matrix, the encoder turns an
//! input sequence into a short prefix-free transcript such that the decoder's
//! reconstruction is distributed *exactly* according to the channel applied
//! to the input — not approximately, and at a rate close to the mutual
//! information. The construction is a two-stage rejection-sampling scheme:
//! an auxiliary stage simulates the quantized log-likelihood ratio of the
//! block, and a primary stage simulates the channel conditioned on it,
//! against a proposal that depends on whether the channel is singular
//! (LLR determined by the output, as in an erasure channel) or not.
//!
//! Modules:
//! - [`dmc`]: channel model, mutual information, LLR table, singularity.
//! - [`llr`]: exact distributions of the quantized LLR and its
//!   side-information triple, by type-class dynamic programming.
//! - [`stream`]: bit-exact seeded counter-mode randomness.
//! - [`sampler`]: rejection sampling against re-derivable codebooks.
//! - [`codes`]: Golomb and Huffman prefix codes.
//! - [`bits`]: bitstream reader/writer.
//! - [`scheme`]: the full encoder/decoder and a one-stage baseline.

pub mod bits;
pub mod codes;
pub mod dmc;
pub mod llr;
pub mod sampler;
pub mod scheme;
pub mod stream;

pub use bits::{BitReader, BitString};
pub use dmc::{parse_channel_spec, Dmc};
pub use llr::{BarTriple, Bin, GammaPmf, GammaTables, Quantizer, XType};
pub use scheme::{Scheme, SchemeConfig, SchemeMode, SchemeTrace, Transcript};
