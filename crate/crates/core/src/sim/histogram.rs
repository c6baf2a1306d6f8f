use rayon::prelude::*;

use super::ber::Link;
use super::config::SimConfig;
use crate::smoothing::{smooth_sweep, BeamformerSet, Granularity, SmoothingMethod};
use crate::{Error, Result};

/// Counts over `[edges[i], edges[i+1])` plus under- and overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::Config("histogram edges must be increasing, at least two".into()));
        }
        let bins = edges.len() - 1;
        Ok(Self { edges, counts: vec![0; bins], underflow: 0, overflow: 0 })
    }

    /// `bins` equal bins on `[lo, hi)`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        Self::new((0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect())
    }

    pub fn add(&mut self, x: f64) {
        if x < self.edges[0] {
            self.underflow += 1;
        } else if x >= *self.edges.last().expect("edges") {
            self.overflow += 1;
        } else {
            let i = self.edges.partition_point(|e| *e <= x) - 1;
            self.counts[i] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// Fraction of samples at or above `x`, which must be an edge.
    pub fn mass_above(&self, x: f64) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let from = self.edges.iter().position(|e| *e >= x).unwrap_or(self.counts.len());
        let n: u64 = self.counts[from.min(self.counts.len())..].iter().sum::<u64>() + self.overflow;
        n as f64 / total as f64
    }

    /// Probability mass per bin (under- and overflow last).
    pub fn masses(&self) -> Vec<f64> {
        let t = self.total().max(1) as f64;
        self.counts.iter().chain([&self.underflow, &self.overflow]).map(|c| *c as f64 / t).collect()
    }

    pub fn total_variation(&self, other: &Histogram) -> Result<f64> {
        if self.edges != other.edges {
            return Err(Error::Shape("histograms use different bins".into()));
        }
        Ok(0.5 * self.masses().iter().zip(other.masses()).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }
}

/// Pools `||V_k - V_{k-1}||_F` over consecutive defined entries of each set.
pub fn beamformer_distance_histogram(sets: &[BeamformerSet], edges: &[f64]) -> Result<Histogram> {
    let mut h = Histogram::new(edges.to_vec())?;
    for s in sets {
        for d in s.adjacent_distances() {
            h.add(d);
        }
    }
    Ok(h)
}

/// Per-tone beamformer distances over `draws` channel realizations of
/// `cfg`, on the FS-FBMC tone grid and spread support.
pub fn distance_histogram_for(
    cfg: &SimConfig,
    method: SmoothingMethod,
    draws: usize,
    edges: &[f64],
    parallel: bool,
) -> Result<Histogram> {
    let fbmc = SimConfig { system: crate::baselines::System::Proposed, ..cfg.clone() };
    let link = Link::new(&fbmc)?;
    let modem = link.modem().expect("FBMC link");
    let support = modem.support();
    let one = |d: usize| -> Result<Histogram> {
        let taps = link.channel(d as u64);
        let h = taps.response(modem.fft_size());
        let set = smooth_sweep(&h, &support, method, cfg.streams, Granularity::Tone);
        beamformer_distance_histogram(std::slice::from_ref(&set), edges)
    };
    let parts: Vec<Result<Histogram>> =
        if parallel { (0..draws).into_par_iter().map(one).collect() } else { (0..draws).map(one).collect() };
    let mut out = Histogram::new(edges.to_vec())?;
    for p in parts {
        out.merge(&p?);
    }
    Ok(out)
}
