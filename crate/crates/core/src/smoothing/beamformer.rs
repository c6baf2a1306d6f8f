use std::io::{self, Write};

use crate::linalg::{canonical_columns, frobenius_norm, write_complex64};
use crate::{CMat, C64};

/// ZF gains below `ZF_FLOOR_REL * max(lambda)` are clamped.
pub const ZF_FLOOR_REL: f64 = 1e-6;

/// Zero-forcing gains `1/lambda` with the singularity floor. The flag is set
/// when any stream was clamped.
pub fn zf_gains(d: &[f64]) -> (Vec<f64>, bool) {
    let max = d.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return (vec![0.0; d.len()], !d.is_empty());
    }
    let floor = ZF_FLOOR_REL * max;
    let mut clamped = false;
    let e = d
        .iter()
        .map(|&l| {
            if l < floor {
                clamped = true;
                1.0 / floor
            } else {
                1.0 / l
            }
        })
        .collect();
    (e, clamped)
}

/// Transmit/receive beamformer pair for one tone (or subchannel).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    /// `N_t x L` precoder.
    pub v: CMat,
    /// `N_r x L` combiner (applied as `U^H`).
    pub u: CMat,
    /// Per-stream gains.
    pub d: Vec<f64>,
    /// Per-stream ZF equalizer gains.
    pub e: Vec<f64>,
    /// The ZF floor was hit.
    pub floored: bool,
    /// A degenerate step (undefined phase, QR breakdown, canonical
    /// completion) was taken while computing this entry.
    pub degenerate: bool,
}

impl Beamformer {
    pub fn new(v: CMat, u: CMat, d: Vec<f64>) -> Self {
        let (e, floored) = zf_gains(&d);
        Self { v, u, d, e, floored, degenerate: false }
    }

    /// Identity precoder/combiner with unit gains.
    pub fn identity(antennas: usize, streams: usize) -> Self {
        Self::new(
            canonical_columns(antennas, streams),
            canonical_columns(antennas, streams),
            vec![1.0; streams],
        )
    }

    pub fn with_degenerate(mut self, flag: bool) -> Self {
        self.degenerate |= flag;
        self
    }

    pub fn streams(&self) -> usize {
        self.v.ncols()
    }
}

/// Whether a set is indexed by tone or by subchannel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Tone,
    /// One beamformer per subchannel, shared by all its tones.
    Subchannel,
}

/// Beamformers over the active support, indexed by tone or subchannel.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    granularity: Granularity,
    entries: Vec<Option<Beamformer>>,
}

impl BeamformerSet {
    /// `len` is the number of tones (or subchannels).
    pub fn from_entries(granularity: Granularity, len: usize, entries: Vec<(usize, Beamformer)>) -> Self {
        let mut slots = vec![None; len];
        for (i, b) in entries {
            slots[i] = Some(b);
        }
        Self { granularity, entries: slots }
    }

    /// Identity beamformers everywhere.
    pub fn identity(granularity: Granularity, len: usize, antennas: usize, streams: usize) -> Self {
        let b = Beamformer::identity(antennas, streams);
        Self { granularity, entries: vec![Some(b); len] }
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(Option::is_none)
    }

    pub fn get(&self, index: usize) -> Option<&Beamformer> {
        self.entries.get(index).and_then(Option::as_ref)
    }

    /// Index into the set used for subchannel `m` at tone `k`.
    pub fn index_of(&self, m: usize, k: usize) -> usize {
        match self.granularity {
            Granularity::Tone => k,
            Granularity::Subchannel => m,
        }
    }

    pub fn lookup(&self, m: usize, k: usize) -> Option<&Beamformer> {
        self.get(self.index_of(m, k))
    }

    /// Defined entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Beamformer)> {
        self.entries.iter().enumerate().filter_map(|(i, b)| b.as_ref().map(|b| (i, b)))
    }

    pub fn streams(&self) -> usize {
        self.iter().next().map_or(0, |(_, b)| b.streams())
    }

    pub fn transmit_antennas(&self) -> usize {
        self.iter().next().map_or(0, |(_, b)| b.v.nrows())
    }

    /// `||V_i - V_{i-1}||_F` for every pair of consecutive indices that are
    /// both defined.
    pub fn adjacent_distances(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .filter_map(|w| match (&w[0], &w[1]) {
                (Some(a), Some(b)) => Some(frobenius_norm(&(&b.v - &a.v))),
                _ => None,
            })
            .collect()
    }

    /// Binary little-endian complex64 export, index-major: for each defined
    /// entry, `V` then `U` (column-major), then `D` and `E` as real-valued
    /// complex numbers.
    pub fn write_complex64<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (_, b) in self.iter() {
            write_complex64(w, b.v.iter().copied())?;
            write_complex64(w, b.u.iter().copied())?;
            write_complex64(w, b.d.iter().map(|&x| C64::new(x, 0.0)))?;
            write_complex64(w, b.e.iter().map(|&x| C64::new(x, 0.0)))?;
        }
        Ok(())
    }
}
