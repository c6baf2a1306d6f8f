//! PHYDYAS prototype filter and the filter-bank quantities derived from it.
//!
//! The pulse is designed by frequency sampling: `K` real coefficients
//! `H_0 = 1, H_1, .., H_{K-1}` define
//!
//! ```text
//! g(i) = 1 + 2 * sum_k (-1)^k H_k cos(2 pi k i / KM),   0 <= i < KM
//! ```
//!
//! so that its length-`KM` DFT has exactly `2K - 1` nonzero tones around
//! tone 0. The taps are scaled to unit energy, which makes the
//! transmultiplexer response equal to one at the origin.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;

use rustfft::FftPlanner;

use crate::{Error, Result, C64};

/// Tones whose magnitude is at most this fraction of the peak are negligible.
pub const NEGLIGIBLE_REL: f64 = 1e-3;

/// Published PHYDYAS frequency coefficients `H_1..H_{K-1}`.
fn phydyas_coefficients(overlap: usize) -> Option<&'static [f64]> {
    const K2: [f64; 1] = [std::f64::consts::FRAC_1_SQRT_2];
    const K3: [f64; 2] = [0.911_438, 0.411_438];
    const K4: [f64; 3] = [0.971_959_83, std::f64::consts::FRAC_1_SQRT_2, 0.235_146_95];
    match overlap {
        2 => Some(&K2),
        3 => Some(&K3),
        4 => Some(&K4),
        _ => None,
    }
}

/// Exact `e^{j pi q / 2}`.
pub(crate) fn quarter_turn(q: i64) -> C64 {
    match q.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `e^{j 2 pi num / den}` with the argument reduced modulo `den` first.
pub(crate) fn unit_phase(num: i64, den: i64) -> C64 {
    let r = num.rem_euclid(den);
    C64::from_polar(1.0, 2.0 * PI * r as f64 / den as f64)
}

#[derive(Debug, Clone)]
pub struct PrototypeFilter {
    subcarriers: usize,
    overlap: usize,
    one_sided_tones: usize,
    taps: Vec<f64>,
    spectrum: Vec<C64>,
}

impl PrototypeFilter {
    /// PHYDYAS design for `subcarriers` (a power of two, at least 8) and
    /// overlapping factor 2, 3 or 4.
    pub fn phydyas(subcarriers: usize, overlap: usize) -> Result<Self> {
        if subcarriers < 8 || !subcarriers.is_power_of_two() {
            return Err(Error::Config(format!("subcarrier count {subcarriers} must be a power of two >= 8")));
        }
        let coeffs = phydyas_coefficients(overlap)
            .ok_or_else(|| Error::Config(format!("unsupported overlapping factor {overlap}; expected 2, 3 or 4")))?;
        let len = overlap * subcarriers;
        let mut taps: Vec<f64> = (0..len)
            .map(|i| {
                let mut v = 1.0;
                for (k, h) in coeffs.iter().enumerate() {
                    let k = k + 1;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    v += 2.0 * sign * h * (2.0 * PI * (k * i) as f64 / len as f64).cos();
                }
                v
            })
            .collect();
        taps[0] = 0.0;
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        let scale = energy.sqrt().recip();
        taps.iter_mut().for_each(|t| *t *= scale);

        let mut spectrum: Vec<C64> = taps.iter().map(|&t| C64::new(t, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut spectrum);

        Ok(Self { subcarriers, overlap, one_sided_tones: overlap, taps, spectrum })
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// Pulse length `KM` in samples.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `P`: the spectrum has `2P - 1` non-negligible tones.
    pub fn one_sided_tones(&self) -> usize {
        self.one_sided_tones
    }

    /// Time-domain taps `g(i)`, `0 <= i < KM`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Length-`KM` DFT of the taps.
    pub fn spectrum(&self) -> &[C64] {
        &self.spectrum
    }

    /// Tone indices whose magnitude exceeds [`NEGLIGIBLE_REL`] of the peak.
    pub fn significant_tones(&self) -> Vec<usize> {
        significant(&self.spectrum)
    }

    /// Shifted pulse `g_{m,n}(i) = g(i - nM/2) e^{j2 pi m i/M} e^{j pi (m+n)/2}`.
    pub fn pulse(&self, m: i64, n: i64, i: i64) -> C64 {
        let half = (self.subcarriers / 2) as i64;
        let t = i - n * half;
        if t < 0 || t >= self.len() as i64 {
            return C64::new(0.0, 0.0);
        }
        let g = self.taps[t as usize];
        unit_phase(m * i, self.subcarriers as i64) * quarter_turn(m + n) * g
    }

    /// Offset of the first sample of window `n0` relative to `n0 M/2`
    /// for a DFT of `fft_size` samples (the pulse sits centred in longer windows).
    pub fn window_pad(&self, fft_size: usize) -> usize {
        (fft_size - self.len()) / 2
    }

    /// Length-`fft_size` DFT of the part of `g_{m,n}` inside window `n0`,
    /// i.e. samples `n0 M/2 - pad .. n0 M/2 - pad + fft_size`.
    pub fn window_spectrum(&self, m: i64, n: i64, n0: i64, fft_size: usize) -> Result<Vec<C64>> {
        self.check_fft_size(fft_size)?;
        let start = n0 * (self.subcarriers / 2) as i64 - self.window_pad(fft_size) as i64;
        let mut buf: Vec<C64> = (0..fft_size as i64).map(|t| self.pulse(m, n, start + t)).collect();
        FftPlanner::new().plan_fft_forward(fft_size).process(&mut buf);
        Ok(buf)
    }

    pub(crate) fn check_fft_size(&self, fft_size: usize) -> Result<()> {
        if fft_size < self.len() || !fft_size.is_multiple_of(self.subcarriers) || !(fft_size - self.len()).is_multiple_of(2) {
            return Err(Error::Config(format!(
                "FFT size {fft_size} must be a multiple of M={} and at least KM={}",
                self.subcarriers,
                self.len()
            )));
        }
        Ok(())
    }

    /// Spreading coefficients `G_{m,n}^{(n0)}(k)` on the `KM`-tone grid.
    ///
    /// Pairs whose pulse does not overlap the window give an empty vector.
    /// Entries under 1e-9 of the peak (the residue of forcing `g(0) = 0`)
    /// are dropped.
    pub fn spread_coefficients(&self, m: usize, n: i64, n0: i64) -> SpreadCoefficients {
        let fft_size = self.len();
        if (n - n0).unsigned_abs() as usize >= 2 * self.overlap {
            return SpreadCoefficients { fft_size, entries: Vec::new() };
        }
        let dense = self
            .window_spectrum(m as i64, n, n0, fft_size)
            .expect("KM is always a valid FFT size");
        let peak = self.spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let entries = dense
            .into_iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 1e-9 * peak)
            .collect();
        SpreadCoefficients { fft_size, entries }
    }

    /// Transmultiplexer response `sum_i g*_{m0,n0}(i) g_{m,n}(i)`.
    pub fn transmux_response(&self, m: i64, n: i64, m0: i64, n0: i64) -> C64 {
        let half = (self.subcarriers / 2) as i64;
        let lo = n.max(n0) * half;
        let hi = n.min(n0) * half + self.len() as i64;
        (lo..hi).map(|i| self.pulse(m0, n0, i).conj() * self.pulse(m, n, i)).sum()
    }

    /// Plain-text column dump: `i  g(i)  Re G(i)  Im G(i)`.
    pub fn write_columns<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# PHYDYAS prototype filter M={} K={} P={}", self.subcarriers, self.overlap, self.one_sided_tones)?;
        writeln!(w, "# i g(i) re(G(i)) im(G(i))")?;
        for (i, (g, big)) in self.taps.iter().zip(&self.spectrum).enumerate() {
            writeln!(w, "{i} {g:.17e} {:.17e} {:.17e}", big.re, big.im)?;
        }
        Ok(())
    }
}

fn significant(spectrum: &[C64]) -> Vec<usize> {
    let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    spectrum
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > NEGLIGIBLE_REL * peak)
        .map(|(k, _)| k)
        .collect()
}

/// Sparse tone vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadCoefficients {
    pub fft_size: usize,
    pub entries: Vec<(usize, C64)>,
}

impl SpreadCoefficients {
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.fft_size];
        for &(k, z) in &self.entries {
            out[k] = z;
        }
        out
    }

    pub fn tones(&self) -> Vec<usize> {
        self.entries.iter().map(|(k, _)| *k).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Cached spreading profile for one FFT size: the centred window spectrum of
/// the prototype restricted to its non-negligible tones.
#[derive(Debug, Clone)]
pub struct SpreadProfile {
    filter: Arc<PrototypeFilter>,
    fft_size: usize,
    /// `(offset from the subchannel centre tone, coefficient)`.
    taps: Vec<(i64, C64)>,
}

impl SpreadProfile {
    pub fn new(filter: Arc<PrototypeFilter>, fft_size: usize) -> Result<Self> {
        let base = filter.window_spectrum(0, 0, 0, fft_size)?;
        let taps = significant(&base)
            .into_iter()
            .map(|k| {
                let off = if k > fft_size / 2 { k as i64 - fft_size as i64 } else { k as i64 };
                (off, base[k])
            })
            .collect::<Vec<_>>();
        let mut taps = taps;
        taps.sort_by_key(|(off, _)| *off);
        Ok(Self { filter, fft_size, taps })
    }

    pub fn filter(&self) -> &PrototypeFilter {
        &self.filter
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Tones per subchannel, `fft_size / M`.
    pub fn tones_per_subchannel(&self) -> usize {
        self.fft_size / self.filter.subcarriers()
    }

    pub fn center_tone(&self, m: usize) -> usize {
        m * self.tones_per_subchannel()
    }

    /// Number of spread tones per subchannel (`2P - 1` on the `KM` grid).
    pub fn width(&self) -> usize {
        self.taps.len()
    }

    /// `G_{m,n}^{(n)}(k)` restricted to the non-negligible tones, as
    /// `(tone, coefficient)` pairs.
    pub fn coefficients(&self, m: usize, n: i64) -> impl Iterator<Item = (usize, C64)> + '_ {
        let mm = self.filter.subcarriers() as i64;
        let pad = self.filter.window_pad(self.fft_size) as i64;
        let mi = m as i64;
        // Modulation phase of the window origin and the OQAM phase.
        let phase = unit_phase(mi * (n * mm / 2 - pad), mm) * quarter_turn(mi + n);
        let center = self.center_tone(m) as i64;
        let n_fft = self.fft_size as i64;
        self.taps
            .iter()
            .map(move |&(off, z)| ((center + off).rem_euclid(n_fft) as usize, z * phase))
    }
}
