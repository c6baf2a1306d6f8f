//! Comparison systems: SVD-OFDM with cyclic prefix and the FBMC variants
//! that differ in beamformer granularity and smoothing.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::channel::ChannelTaps;
use crate::modem::{FsFbmcModem, Grid, QamGrid, SampleStream};
use crate::smoothing::{smooth_sweep, BeamformerSet, Granularity, SmoothingMethod};
use crate::{Error, Result, C64};

/// Cyclic prefix of the OFDM reference, in samples.
pub const OFDM_CP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Ofdm,
    Fbmc,
}

/// The five compared schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// CP-OFDM with per-subchannel SVD.
    SvdOfdm,
    /// FBMC, one unsmoothed beamformer per subchannel.
    BasicSubchannel,
    /// FBMC, per-subchannel beamformers smoothed across subchannels.
    SmoothedSubchannel,
    /// FS-FBMC, per-tone beamformers without smoothing.
    FinerUnsmoothed,
    /// FS-FBMC, per-tone beamformers smoothed across tones.
    Proposed,
}

impl System {
    pub const ALL: [System; 5] = [
        System::SvdOfdm,
        System::BasicSubchannel,
        System::SmoothedSubchannel,
        System::FinerUnsmoothed,
        System::Proposed,
    ];

    /// Builds a system from its waveform, granularity and smoothing flags.
    pub fn from_flags(waveform: Waveform, granularity: Granularity, smoothed: bool) -> Result<Self> {
        match (waveform, granularity, smoothed) {
            (Waveform::Ofdm, Granularity::Subchannel, false) => Ok(Self::SvdOfdm),
            (Waveform::Ofdm, _, _) => Err(Error::Config(
                "OFDM supports only unsmoothed per-subchannel beamforming".into(),
            )),
            (Waveform::Fbmc, Granularity::Subchannel, false) => Ok(Self::BasicSubchannel),
            (Waveform::Fbmc, Granularity::Subchannel, true) => Ok(Self::SmoothedSubchannel),
            (Waveform::Fbmc, Granularity::Tone, false) => Ok(Self::FinerUnsmoothed),
            (Waveform::Fbmc, Granularity::Tone, true) => Ok(Self::Proposed),
        }
    }

    pub fn waveform(self) -> Waveform {
        match self {
            Self::SvdOfdm => Waveform::Ofdm,
            _ => Waveform::Fbmc,
        }
    }

    pub fn granularity(self) -> Granularity {
        match self {
            Self::FinerUnsmoothed | Self::Proposed => Granularity::Tone,
            _ => Granularity::Subchannel,
        }
    }

    pub fn smoothed(self) -> bool {
        matches!(self, Self::SmoothedSubchannel | Self::Proposed)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::SvdOfdm => "svd_ofdm",
            Self::BasicSubchannel => "basic_subchannel",
            Self::SmoothedSubchannel => "smoothed_subchannel",
            Self::FinerUnsmoothed => "finer_unsmoothed",
            Self::Proposed => "proposed",
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown system '{s}'")))
    }
}

/// Beamformers of an FBMC system for one channel realization. Subchannel
/// systems use the response at the subchannel centres; tone systems use the
/// modem's FFT grid over its spread support.
pub fn fbmc_beamformers(
    system: System,
    smoother: SmoothingMethod,
    taps: &ChannelTaps,
    modem: &FsFbmcModem,
    streams: usize,
) -> Result<BeamformerSet> {
    let method = if system.smoothed() { smoother } else { SmoothingMethod::None };
    if system.smoothed() && smoother == SmoothingMethod::None {
        return Err(Error::Config(format!("{system} needs a smoothing method")));
    }
    match system {
        System::SvdOfdm => Err(Error::Config("SVD-OFDM is not an FBMC system".into())),
        System::BasicSubchannel | System::SmoothedSubchannel => {
            let h = taps.response(modem.filter().subcarriers());
            Ok(smooth_sweep(&h, &modem.active_subchannels(), method, streams, Granularity::Subchannel))
        }
        System::FinerUnsmoothed | System::Proposed => {
            let h = taps.response(modem.fft_size());
            Ok(smooth_sweep(&h, &modem.support(), method, streams, Granularity::Tone))
        }
    }
}

/// CP-OFDM with per-subchannel precoding and unitary transforms.
pub struct OfdmLink {
    subcarriers: usize,
    cp: usize,
    active: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmLink {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmLink").field("subcarriers", &self.subcarriers).field("cp", &self.cp).finish()
    }
}

impl OfdmLink {
    pub fn new(active: Vec<bool>, cp: usize) -> Result<Self> {
        let m = active.len();
        if m == 0 || cp >= m {
            return Err(Error::Config(format!("invalid OFDM numerology M={m}, CP={cp}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { subcarriers: m, cp, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m), active })
    }

    pub fn active_subchannels(&self) -> Vec<usize> {
        (0..self.subcarriers).filter(|&m| self.active[m]).collect()
    }

    pub fn symbol_len(&self) -> usize {
        self.subcarriers + self.cp
    }

    /// Unsmoothed per-subchannel SVD beamformers.
    pub fn beamformers(&self, taps: &ChannelTaps, streams: usize) -> BeamformerSet {
        let h = taps.response(self.subcarriers);
        smooth_sweep(&h, &self.active_subchannels(), SmoothingMethod::None, streams, Granularity::Subchannel)
    }

    pub fn modulate(&self, qam: &QamGrid, bf: &BeamformerSet) -> Result<SampleStream> {
        let nt = bf.transmit_antennas();
        let sym = self.symbol_len();
        let scale = 1.0 / (self.subcarriers as f64).sqrt();
        let mut out = SampleStream::zeros(nt, qam.times() * sym);
        let mut scratch = vec![C64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for n in 0..qam.times() {
            let mut tones = vec![vec![C64::new(0.0, 0.0); self.subcarriers]; nt];
            for m in self.active_subchannels() {
                let b = bf.get(m).ok_or_else(|| Error::Config(format!("no beamformer for subchannel {m}")))?;
                for l in 0..qam.streams() {
                    let s = qam.get(l, m, n);
                    for (t, row) in tones.iter_mut().enumerate() {
                        row[m] += b.v[(t, l)] * s;
                    }
                }
            }
            for (t, mut buf) in tones.into_iter().enumerate() {
                self.inverse.process_with_scratch(&mut buf, &mut scratch);
                let dst = &mut out.samples[t][n * sym..(n + 1) * sym];
                for (i, d) in dst.iter_mut().enumerate() {
                    *d = buf[(i + self.subcarriers - self.cp) % self.subcarriers] * scale;
                }
            }
        }
        Ok(out)
    }

    /// Equalized QAM estimates for `symbols` OFDM symbols.
    pub fn demodulate(&self, y: &SampleStream, bf: &BeamformerSet, symbols: usize) -> Result<Grid<C64>> {
        let streams = bf.streams();
        let sym = self.symbol_len();
        let scale = 1.0 / (self.subcarriers as f64).sqrt();
        let mut est = Grid::zeros(streams, self.subcarriers, symbols);
        let mut scratch = vec![C64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for n in 0..symbols {
            let start = n * sym + self.cp;
            let spectra: Vec<Vec<C64>> = y
                .samples
                .iter()
                .map(|ant| {
                    let mut buf: Vec<C64> =
                        (0..self.subcarriers).map(|i| ant.get(start + i).copied().unwrap_or_default()).collect();
                    self.forward.process_with_scratch(&mut buf, &mut scratch);
                    buf
                })
                .collect();
            for m in self.active_subchannels() {
                let b = bf.get(m).ok_or_else(|| Error::Config(format!("no beamformer for subchannel {m}")))?;
                for l in 0..streams {
                    let mut s = C64::new(0.0, 0.0);
                    for (r, spec) in spectra.iter().enumerate() {
                        s += b.u[(r, l)].conj() * spec[m];
                    }
                    est.set(l, m, n, s * scale * b.e[l]);
                }
            }
        }
        Ok(est)
    }

    /// Noise variance of the equalized estimate per unit input noise.
    pub fn noise_gain(&self, bf: &BeamformerSet, m: usize, l: usize) -> f64 {
        bf.get(m).map_or(0.0, |b| {
            let u: f64 = (0..b.u.nrows()).map(|r| b.u[(r, l)].norm_sqr()).sum();
            u * b.e[l] * b.e[l]
        })
    }
}
