//! Monte Carlo harness: BER sweeps, beamformer-distance histograms and
//! leaked-interference probes.

mod ber;
mod config;
mod histogram;
mod leak;
mod output;
mod seeds;

pub use ber::{awgn_qam_ber, run_ber_sweep, wilson_half_width, BerRecord, FrameOutcome, Link};
pub use config::{standard_active_subchannels, ChannelChoice, SimConfig, SmootherKind};
pub use histogram::{beamformer_distance_histogram, distance_histogram_for, Histogram};
pub use leak::{measure_leaked_interference, LeakReport};
pub use output::{write_ber_csv, write_manifest};
pub use seeds::{mix, trial_seed, Lane};
