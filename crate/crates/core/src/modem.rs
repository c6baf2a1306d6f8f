//! FS-FBMC transmitter and receiver with per-tone beamforming.
//!
//! Transmit: each half-symbol `n` is spread over the non-negligible tones of
//! every active subchannel, precoded per tone, inverse-transformed (no
//! scaling) and overlap-added with a hop of `M/2` samples. Receive: a
//! sliding window of `fft_size` samples with the same hop is transformed
//! with a `1/fft_size` scale, combined per tone by `E_k U_k^H` and despread
//! with the conjugate spreading coefficients.
//!
//! The spread coefficients are divided by the FFT size at the transmitter,
//! so the transmitted waveform is `sum a_{m,n} g_{m,n}(i)` with unit-energy
//! pulses and a back-to-back link has unit gain.

use std::io::{self, Write};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::filter::{PrototypeFilter, SpreadProfile};
use crate::linalg::write_complex64;
use crate::smoothing::{Beamformer, BeamformerSet};
use crate::{Error, Result, C64};

/// Dense `(stream, subchannel, time)` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    streams: usize,
    subcarriers: usize,
    times: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> Grid<T> {
    pub fn zeros(streams: usize, subcarriers: usize, times: usize) -> Self {
        Self { streams, subcarriers, times, data: vec![T::default(); streams * subcarriers * times] }
    }

    pub fn from_fn(streams: usize, subcarriers: usize, times: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut g = Self::zeros(streams, subcarriers, times);
        for l in 0..streams {
            for m in 0..subcarriers {
                for n in 0..times {
                    g.set(l, m, n, f(l, m, n));
                }
            }
        }
        g
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn times(&self) -> usize {
        self.times
    }

    #[inline]
    fn idx(&self, l: usize, m: usize, n: usize) -> usize {
        (l * self.subcarriers + m) * self.times + n
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize, n: usize) -> T {
        self.data[self.idx(l, m, n)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: usize, n: usize, v: T) {
        let i = self.idx(l, m, n);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// QAM symbols indexed by `(stream, subchannel, symbol)`.
pub type QamGrid = Grid<C64>;

/// Real PAM symbols `a_{m,n}` per stream with the active-subchannel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PamGrid {
    values: Grid<f64>,
    active: Vec<bool>,
}

impl PamGrid {
    pub fn zeros(streams: usize, active: Vec<bool>, half_times: usize) -> Self {
        Self { values: Grid::zeros(streams, active.len(), half_times), active }
    }

    /// Builds a grid from values; entries of inactive subchannels are zeroed.
    pub fn new(values: Grid<f64>, active: Vec<bool>) -> Result<Self> {
        if values.subcarriers() != active.len() {
            return Err(Error::Shape(format!(
                "grid has {} subchannels but mask has {}",
                values.subcarriers(),
                active.len()
            )));
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("PAM values must be finite".into()));
        }
        let mut g = Self { values, active };
        g.clear_inactive();
        Ok(g)
    }

    fn clear_inactive(&mut self) {
        for m in 0..self.active.len() {
            if !self.active[m] {
                for l in 0..self.values.streams() {
                    for n in 0..self.values.times() {
                        self.values.set(l, m, n, 0.0);
                    }
                }
            }
        }
    }

    pub fn streams(&self) -> usize {
        self.values.streams()
    }

    pub fn subcarriers(&self) -> usize {
        self.values.subcarriers()
    }

    pub fn half_times(&self) -> usize {
        self.values.times()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn get(&self, l: usize, m: usize, n: usize) -> f64 {
        self.values.get(l, m, n)
    }

    pub fn set(&mut self, l: usize, m: usize, n: usize, v: f64) {
        if self.active[m] {
            self.values.set(l, m, n, v);
        }
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    /// Elementwise sum (for linearity checks and probe composition).
    pub fn add(&self, other: &PamGrid) -> Result<PamGrid> {
        if self.values.streams() != other.values.streams()
            || self.active != other.active
            || self.values.times() != other.values.times()
        {
            return Err(Error::Shape("PAM grids differ in shape".into()));
        }
        let data = self.values.data.iter().zip(&other.values.data).map(|(a, b)| a + b).collect();
        Ok(PamGrid { values: Grid { data, ..self.values.clone() }, active: self.active.clone() })
    }
}

/// Splits each QAM symbol into two real PAM symbols `T/2` apart:
/// `a_{m,2n} = Re s_{m,n}`, `a_{m,2n+1} = Im s_{m,n}`.
pub fn oqam_stagger(qam: &QamGrid, active: &[bool]) -> Result<PamGrid> {
    if qam.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Shape("QAM symbols must be finite".into()));
    }
    let values = Grid::from_fn(qam.streams(), qam.subcarriers(), 2 * qam.times(), |l, m, n| {
        let s = qam.get(l, m, n / 2);
        if n % 2 == 0 { s.re } else { s.im }
    });
    PamGrid::new(values, active.to_vec())
}

/// Inverse of [`oqam_stagger`].
pub fn oqam_destagger(pam: &PamGrid) -> Result<QamGrid> {
    let t = pam.half_times();
    if !t.is_multiple_of(2) {
        return Err(Error::Shape(format!("odd number of half-times ({t})")));
    }
    Ok(Grid::from_fn(pam.streams(), pam.subcarriers(), t / 2, |l, m, n| {
        C64::new(pam.get(l, m, 2 * n), pam.get(l, m, 2 * n + 1))
    }))
}

/// Time-domain samples per antenna at interval `T/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub samples: Vec<Vec<C64>>,
}

impl SampleStream {
    pub fn zeros(antennas: usize, len: usize) -> Self {
        Self { samples: vec![vec![C64::new(0.0, 0.0); len]; antennas] }
    }

    pub fn antennas(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

/// Beamformed tones `b_n(k)` of one half-symbol, indexed `[antenna][tone]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneFrame {
    pub tones: Vec<Vec<C64>>,
}

/// Writes tone frames as little-endian complex64, frame-major, then
/// antenna, then tone.
pub fn write_tone_frames<W: Write>(w: &mut W, frames: &[ToneFrame]) -> io::Result<()> {
    for f in frames {
        for ant in &f.tones {
            write_complex64(w, ant.iter().copied())?;
        }
    }
    Ok(())
}

/// Receiver output: the complex despread estimate and its real part.
#[derive(Debug, Clone)]
pub struct Demodulated {
    pub estimate: Grid<C64>,
    pub pam: PamGrid,
    /// Beamformer indices (tones or subchannels) whose ZF gain hit the floor.
    pub floored: Vec<usize>,
}

pub struct FsFbmcModem {
    profile: SpreadProfile,
    active: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FsFbmcModem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FsFbmcModem")
            .field("fft_size", &self.profile.fft_size())
            .field("active", &self.active.iter().filter(|a| **a).count())
            .finish()
    }
}

impl FsFbmcModem {
    /// `fft_size` is `KM` for the standard receiver or a larger multiple of
    /// `M` (e.g. `2KM`) for a finer tone grid.
    pub fn new(filter: Arc<PrototypeFilter>, fft_size: usize, active: Vec<bool>) -> Result<Self> {
        if active.len() != filter.subcarriers() {
            return Err(Error::Config(format!(
                "active mask has {} entries, expected {}",
                active.len(),
                filter.subcarriers()
            )));
        }
        let profile = SpreadProfile::new(filter, fft_size)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
            profile,
            active,
        })
    }

    pub fn fft_size(&self) -> usize {
        self.profile.fft_size()
    }

    pub fn profile(&self) -> &SpreadProfile {
        &self.profile
    }

    pub fn filter(&self) -> &PrototypeFilter {
        self.profile.filter()
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_subchannels(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&m| self.active[m]).collect()
    }

    /// Sorted union of the spread supports of the active subchannels.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.fft_size()];
        for m in self.active_subchannels() {
            for (k, _) in self.profile.coefficients(m, 0) {
                used[k] = true;
            }
        }
        (0..used.len()).filter(|&k| used[k]).collect()
    }

    fn hop(&self) -> usize {
        self.filter().subcarriers() / 2
    }

    /// Samples produced for `half_times` half-symbols.
    pub fn stream_len(&self, half_times: usize) -> usize {
        half_times.saturating_sub(1) * self.hop() + self.fft_size()
    }

    fn lookup<'a>(&self, bf: &'a BeamformerSet, m: usize, k: usize) -> Result<&'a Beamformer> {
        bf.lookup(m, k)
            .ok_or_else(|| Error::Config(format!("no beamformer for subchannel {m} at tone {k}")))
    }

    /// Per-half-symbol beamformed tone vectors.
    pub fn tone_frames(&self, pam: &PamGrid, bf: &BeamformerSet) -> Result<Vec<ToneFrame>> {
        if pam.subcarriers() != self.active.len() {
            return Err(Error::Shape(format!("PAM grid has {} subchannels", pam.subcarriers())));
        }
        let n_fft = self.fft_size();
        let scale = 1.0 / n_fft as f64;
        let streams = pam.streams();
        let mut antennas = None;
        let mut frames = Vec::with_capacity(pam.half_times());
        for n in 0..pam.half_times() {
            let mut tones: Vec<Vec<C64>> = Vec::new();
            for m in self.active_subchannels() {
                for (k, g) in self.profile.coefficients(m, n as i64) {
                    let b = self.lookup(bf, m, k)?;
                    if b.streams() != streams {
                        return Err(Error::Shape(format!(
                            "beamformer carries {} streams, grid has {streams}",
                            b.streams()
                        )));
                    }
                    let nt = b.v.nrows();
                    if *antennas.get_or_insert(nt) != nt {
                        return Err(Error::Shape("inconsistent transmit antenna count".into()));
                    }
                    if tones.is_empty() {
                        tones = vec![vec![C64::new(0.0, 0.0); n_fft]; nt];
                    }
                    let w = g * scale;
                    for l in 0..streams {
                        let a = pam.get(l, m, n);
                        if a == 0.0 {
                            continue;
                        }
                        for (t, row) in tones.iter_mut().enumerate() {
                            row[k] += b.v[(t, l)] * w * a;
                        }
                    }
                }
            }
            if tones.is_empty() {
                tones = vec![vec![C64::new(0.0, 0.0); n_fft]; antennas.unwrap_or(bf.transmit_antennas())];
            }
            frames.push(ToneFrame { tones });
        }
        Ok(frames)
    }

    /// Transmit chain: spreading, per-tone precoding, IFFT and overlap-add.
    pub fn modulate(&self, pam: &PamGrid, bf: &BeamformerSet) -> Result<SampleStream> {
        let frames = self.tone_frames(pam, bf)?;
        let antennas = frames.first().map_or(bf.transmit_antennas(), |f| f.tones.len());
        let mut out = SampleStream::zeros(antennas, self.stream_len(pam.half_times()));
        let mut scratch = vec![C64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for (n, frame) in frames.into_iter().enumerate() {
            let start = n * self.hop();
            for (t, mut buf) in frame.tones.into_iter().enumerate() {
                self.inverse.process_with_scratch(&mut buf, &mut scratch);
                for (o, x) in out.samples[t][start..start + buf.len()].iter_mut().zip(&buf) {
                    *o += x;
                }
            }
        }
        Ok(out)
    }

    /// Receive chain for `half_times` half-symbols. Windows reaching past the
    /// end of `y` are zero-padded.
    pub fn demodulate(&self, y: &SampleStream, bf: &BeamformerSet, half_times: usize) -> Result<Demodulated> {
        let n_fft = self.fft_size();
        let streams = bf.streams();
        let m_count = self.active.len();
        let mut estimate = Grid::zeros(streams, m_count, half_times);
        let scale = 1.0 / n_fft as f64;
        let mut scratch = vec![C64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        let mut spectra: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n_fft]; y.antennas()];
        let mut floored = std::collections::BTreeSet::new();
        let mut combined = vec![C64::new(0.0, 0.0); streams];
        for n0 in 0..half_times {
            let start = n0 * self.hop();
            for (r, spec) in spectra.iter_mut().enumerate() {
                let src = &y.samples[r];
                for (t, z) in spec.iter_mut().enumerate() {
                    *z = src.get(start + t).copied().unwrap_or_default();
                }
                self.forward.process_with_scratch(spec, &mut scratch);
            }
            for m0 in self.active_subchannels() {
                let mut acc = vec![C64::new(0.0, 0.0); streams];
                for (k, g) in self.profile.coefficients(m0, n0 as i64) {
                    let b = self.lookup(bf, m0, k)?;
                    if b.u.nrows() != y.antennas() {
                        return Err(Error::Shape(format!(
                            "receive beamformer has {} rows, stream has {} antennas",
                            b.u.nrows(),
                            y.antennas()
                        )));
                    }
                    if b.floored {
                        floored.insert(bf.index_of(m0, k));
                    }
                    for (l, c) in combined.iter_mut().enumerate() {
                        let mut s = C64::new(0.0, 0.0);
                        for (r, spec) in spectra.iter().enumerate() {
                            s += b.u[(r, l)].conj() * spec[k];
                        }
                        *c = s * b.e[l] * scale;
                    }
                    let gc = g.conj();
                    for (a, c) in acc.iter_mut().zip(&combined) {
                        *a += gc * c;
                    }
                }
                for (l, a) in acc.into_iter().enumerate() {
                    estimate.set(l, m0, n0, a);
                }
            }
        }
        let real = Grid::from_fn(streams, m_count, half_times, |l, m, n| estimate.get(l, m, n).re);
        Ok(Demodulated { estimate, pam: PamGrid::new(real, self.active.clone())?, floored: floored.into_iter().collect() })
    }

    /// Variance of the complex despread estimate of stream `l` on
    /// subchannel `m` per unit of white noise variance at the receive
    /// antennas.
    pub fn noise_gain(&self, bf: &BeamformerSet, m: usize, l: usize) -> Result<f64> {
        let n_fft = self.fft_size() as f64;
        let mut acc = 0.0;
        for (k, g) in self.profile.coefficients(m, 0) {
            let b = self.lookup(bf, m, k)?;
            let u_norm: f64 = (0..b.u.nrows()).map(|r| b.u[(r, l)].norm_sqr()).sum();
            acc += g.norm_sqr() * b.e[l] * b.e[l] * u_norm;
        }
        Ok(acc / n_fft)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoothing::{BeamformerSet, Granularity};

    fn filter() -> Arc<PrototypeFilter> {
        Arc::new(PrototypeFilter::phydyas(64, 4).unwrap())
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn stagger_definition() {
        let mut q = QamGrid::zeros(1, 4, 2);
        q.set(0, 0, 0, c(3.0, 4.0));
        let p = oqam_stagger(&q, &[true; 4]).unwrap();
        assert_eq!(p.half_times(), 4);
        assert_eq!(p.get(0, 0, 0), 3.0);
        assert_eq!(p.get(0, 0, 1), 4.0);
    }

    #[test]
    fn stagger_of_real_input_has_zero_odd_times() {
        let q = QamGrid::from_fn(2, 4, 3, |l, m, n| c((l + m + n) as f64, 0.0));
        let p = oqam_stagger(&q, &[true; 4]).unwrap();
        for l in 0..2 {
            for m in 0..4 {
                for n in (1..6).step_by(2) {
                    assert_eq!(p.get(l, m, n), 0.0);
                }
            }
        }
    }

    #[test]
    fn destagger_definition_and_errors() {
        let mut p = PamGrid::zeros(1, vec![true; 2], 2);
        p.set(0, 0, 0, 1.0);
        p.set(0, 0, 1, -1.0);
        let q = oqam_destagger(&p).unwrap();
        assert_eq!(q.get(0, 0, 0), c(1.0, -1.0));
        assert_eq!(q.get(0, 1, 0), c(0.0, 0.0));
        let odd = PamGrid::zeros(1, vec![true; 2], 3);
        assert!(matches!(oqam_destagger(&odd), Err(Error::Shape(_))));
    }

    #[test]
    fn inactive_entries_are_zero() {
        let q = QamGrid::from_fn(1, 4, 1, |_, _, _| c(1.0, 1.0));
        let p = oqam_stagger(&q, &[true, false, true, true]).unwrap();
        assert_eq!(p.get(0, 1, 0), 0.0);
        assert_eq!(p.get(0, 2, 1), 1.0);
    }

    #[test]
    fn single_symbol_is_the_shifted_pulse() {
        let f = filter();
        let modem = FsFbmcModem::new(f.clone(), 256, vec![true; 64]).unwrap();
        let bf = BeamformerSet::identity(Granularity::Tone, 256, 1, 1);
        let mut pam = PamGrid::zeros(1, vec![true; 64], 4);
        pam.set(0, 5, 2, 1.0);
        let x = modem.modulate(&pam, &bf).unwrap();
        for i in 0..x.len() {
            let want = f.pulse(5, 2, i as i64);
            assert!((x.samples[0][i] - want).norm() < 1e-9, "sample {i}");
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let modem = FsFbmcModem::new(filter(), 256, vec![true; 64]).unwrap();
        let bf = BeamformerSet::identity(Granularity::Tone, 256, 1, 1);
        let pam = PamGrid::zeros(1, vec![true; 64], 6);
        let x = modem.modulate(&pam, &bf).unwrap();
        assert_eq!(x.energy(), 0.0);
        let d = modem.demodulate(&x, &bf, 6).unwrap();
        assert!(d.estimate.as_slice().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn missing_beamformer_is_a_configuration_error() {
        let modem = FsFbmcModem::new(filter(), 256, vec![true; 64]).unwrap();
        let bf = BeamformerSet::from_entries(Granularity::Tone, 256, Vec::new());
        let mut pam = PamGrid::zeros(1, vec![true; 64], 2);
        pam.set(0, 3, 0, 1.0);
        assert!(matches!(modem.modulate(&pam, &bf), Err(Error::Config(_))));
    }

    #[test]
    fn window_dft_inverts_transmit_ifft() {
        // One half-symbol, demodulated in its own window, returns the
        // transmitted tones exactly (up to the 1/N scale).
        let modem = FsFbmcModem::new(filter(), 256, vec![true; 64]).unwrap();
        let bf = BeamformerSet::identity(Granularity::Tone, 256, 1, 1);
        let mut pam = PamGrid::zeros(1, vec![true; 64], 1);
        pam.set(0, 7, 0, 0.75);
        pam.set(0, 8, 0, -1.25);
        let frames = modem.tone_frames(&pam, &bf).unwrap();
        let x = modem.modulate(&pam, &bf).unwrap();
        let mut spec = x.samples[0].clone();
        FftPlanner::new().plan_fft_forward(256).process(&mut spec);
        for (a, b) in spec.iter().zip(&frames[0].tones[0]) {
            assert!((a / 256.0 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn noise_gain_is_unity_for_identity() {
        let modem = FsFbmcModem::new(filter(), 256, vec![true; 64]).unwrap();
        let bf = BeamformerSet::identity(Granularity::Tone, 256, 2, 2);
        let g = modem.noise_gain(&bf, 10, 1).unwrap();
        assert!((g - 1.0).abs() < 1e-12, "{g}");
    }
}
