//! Per-tone SVD beamformers and their smoothing across frequency.

mod beamformer;
mod flops;
mod orthoiter;
mod perturbation;
mod phase;
mod reference;
mod svd;
mod sweep;

pub use beamformer::{zf_gains, Beamformer, BeamformerSet, Granularity, ZF_FLOOR_REL};
pub use flops::{flops_estimate, FlopsBreakdown};
pub use orthoiter::{derive_receive_beamformer, orthogonal_iteration, OrthoIterOutput, ReceiveBeamformer};
pub use perturbation::{weyl_check, wedin_check, PerturbationDiagnostic, WedinStatus};
pub use phase::{pair_streams, phase_align, subspace_distance, PhaseAligned, CLOSENESS_THRESHOLD};
pub use reference::reference_svd;
pub use svd::{svd_decompose, Svd};
pub use sweep::{smooth_sweep, SmoothingMethod};
