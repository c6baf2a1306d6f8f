use super::beamformer::{Beamformer, BeamformerSet, Granularity};
use super::orthoiter::{derive_receive_beamformer, orthogonal_iteration};
use super::phase::{pair_streams, phase_align, CLOSENESS_THRESHOLD};
use super::reference::reference_svd;
use super::svd::svd_decompose;
use crate::linalg::{column, inner};
use crate::{CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingMethod {
    /// Independent SVD per tone, with the phases a reference LAPACK
    /// driver returns (see [`super::reference_svd`]).
    None,
    /// SVD, stream pairing and per-stream phase alignment.
    PhaseFactor,
    /// Orthogonal iteration warm-started from the previous tone.
    OrthoIter(usize),
}

impl std::fmt::Display for SmoothingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::None => write!(f, "none"),
            Self::PhaseFactor => write!(f, "phase_factor"),
            Self::OrthoIter(n) => write!(f, "ortho_iter{n}"),
        }
    }
}

impl std::str::FromStr for SmoothingMethod {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "phase_factor" | "phase" => Ok(Self::PhaseFactor),
            _ => s
                .strip_prefix("ortho_iter")
                .and_then(|n| n.trim_start_matches(['(', ':']).trim_end_matches(')').parse().ok())
                .filter(|n: &usize| *n >= 1)
                .map(Self::OrthoIter)
                .ok_or_else(|| crate::Error::Parse(format!("unknown smoothing method '{s}'"))),
        }
    }
}

fn from_svd(h: &CMat, streams: usize) -> Beamformer {
    let s = svd_decompose(h, streams);
    Beamformer::new(s.v, s.u, s.d)
}

fn from_reference_svd(h: &CMat, streams: usize) -> Beamformer {
    let s = reference_svd(h, streams);
    Beamformer::new(s.v, s.u, s.d)
}

fn phase_factor_step(h: &CMat, streams: usize, prev: &Beamformer) -> Beamformer {
    let s = svd_decompose(h, streams);
    let candidates: Vec<(f64, Vec<C64>)> = (0..streams).map(|l| (s.d[l], column(&s.v, l))).collect();
    let previous: Vec<Vec<C64>> = (0..streams).map(|l| column(&prev.v, l)).collect();
    let perm = pair_streams(&candidates, &previous, CLOSENESS_THRESHOLD);
    let mut v = CMat::zeros(s.v.nrows(), streams);
    let mut u = CMat::zeros(s.u.nrows(), streams);
    let mut d = Vec::with_capacity(streams);
    let mut undefined = false;
    for (l, &c) in perm.iter().enumerate() {
        let aligned = phase_align(&candidates[c].1, &previous[l]);
        undefined |= aligned.undefined;
        let rot = if aligned.undefined {
            C64::new(1.0, 0.0)
        } else {
            let ip = inner(&candidates[c].1, &previous[l]);
            ip / ip.norm()
        };
        v.set_column(l, &(s.v.column(c) * rot));
        u.set_column(l, &(s.u.column(c) * rot));
        d.push(s.d[c]);
    }
    Beamformer::new(v, u, d).with_degenerate(undefined)
}

fn ortho_iter_step(h: &CMat, n_iter: usize, prev: &Beamformer) -> Beamformer {
    let out = orthogonal_iteration(h, &prev.v, n_iter);
    let rx = derive_receive_beamformer(h, &out.v, &out.d);
    Beamformer::new(out.v, rx.u, out.d).with_degenerate(out.breakdown || rx.degenerate)
}

/// Computes beamformers at `indices` (ascending) of `channel`, smoothing
/// each entry against the previous one in that order.
pub fn smooth_sweep(
    channel: &[CMat],
    indices: &[usize],
    method: SmoothingMethod,
    streams: usize,
    granularity: Granularity,
) -> BeamformerSet {
    let mut entries: Vec<(usize, Beamformer)> = Vec::with_capacity(indices.len());
    for &k in indices {
        let h = &channel[k];
        let b = match (method, entries.last()) {
            (SmoothingMethod::None, _) => from_reference_svd(h, streams),
            (_, None) => from_svd(h, streams),
            (SmoothingMethod::PhaseFactor, Some((_, prev))) => phase_factor_step(h, streams, prev),
            (SmoothingMethod::OrthoIter(n), Some((_, prev))) => ortho_iter_step(h, n, prev),
        };
        entries.push((k, b));
    }
    BeamformerSet::from_entries(granularity, channel.len(), entries)
}
