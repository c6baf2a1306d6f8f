//! Bit chain: punctured convolutional code, random interleaver and Gray QAM.

mod code;
mod interleave;
mod qam;
mod viterbi;

pub use code::{coded_len, decode, encode, message_len, CodeConfig, TAIL_BITS};
pub use interleave::Interleaver;
pub use qam::{Modulation, QamMapper};
pub use viterbi::viterbi_decode;
