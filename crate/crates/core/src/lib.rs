//! Link-level simulation of SVD-beamformed MIMO transmission over
//! frequency-spreading FBMC/OQAM (FS-FBMC).
//!
//! The crate is organised bottom-up:
//!
//! - [`filter`]: PHYDYAS prototype filter, spreading coefficients and the
//!   transmultiplexer response.
//! - [`modem`]: OQAM staggering and the per-tone beamformed FS-FBMC
//!   transmitter and receiver.
//! - [`smoothing`]: per-tone SVD beamformers, phase-factor smoothing,
//!   orthogonal iteration, perturbation diagnostics and FLOP counts.
//! - [`channel`]: tapped-delay-line Rayleigh MIMO channels and AWGN.
//! - [`link`]: convolutional coding, interleaving and Gray QAM.
//! - [`baselines`]: SVD-OFDM and subchannel-level SVD-FBMC reference links.
//! - [`sim`]: Monte Carlo BER sweeps, smoothness histograms and
//!   interference probes.

pub mod baselines;
pub mod channel;
mod error;
pub mod filter;
pub mod link;
pub mod linalg;
pub mod modem;
pub mod sim;
pub mod smoothing;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix (antenna and stream dimensions are small).
pub type CMat = nalgebra::DMatrix<C64>;
