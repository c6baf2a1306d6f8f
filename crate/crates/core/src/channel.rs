//! Tapped-delay-line MIMO Rayleigh channels with exponential power-delay
//! profiles, and AWGN.

use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::linalg::write_complex64;
use crate::modem::SampleStream;
use crate::{CMat, Error, Result, C64};

/// Sample spacing of the tap grid (20 MHz).
pub const SAMPLE_NS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, Deserialize)]
pub enum ChannelModel {
    D,
    E,
    F,
}

impl ChannelModel {
    pub fn max_delay_ns(self) -> f64 {
        match self {
            Self::D => 390.0,
            Self::E => 730.0,
            Self::F => 1050.0,
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D" => Ok(Self::D),
            "E" => Ok(Self::E),
            "F" => Ok(Self::F),
            _ => Err(Error::Parse(format!("unknown channel model '{s}'"))),
        }
    }
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Tap delays in samples and unit-sum powers.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    pub name: String,
    pub delays: Vec<usize>,
    pub powers: Vec<f64>,
}

#[derive(Deserialize)]
struct ProfileFile {
    name: String,
    delays_ns: Vec<f64>,
    powers: Vec<f64>,
}

impl DelayProfile {
    /// Validates and normalizes a profile.
    pub fn new(name: impl Into<String>, delays: Vec<usize>, powers: Vec<f64>) -> Result<Self> {
        if delays.is_empty() || delays.len() != powers.len() {
            return Err(Error::Config("profile needs matching, nonempty delays and powers".into()));
        }
        if delays[0] != 0 || delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("delays must start at 0 and strictly increase".into()));
        }
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Config("tap powers must be finite and nonnegative".into()));
        }
        let total: f64 = powers.iter().sum();
        if total <= 0.0 {
            return Err(Error::Config("profile has zero power".into()));
        }
        Ok(Self { name: name.into(), delays, powers: powers.into_iter().map(|p| p / total).collect() })
    }

    /// Exponential profile on the 50 ns grid up to the model's maximum
    /// delay spread, RMS delay a quarter of the maximum.
    pub fn preset(model: ChannelModel) -> Self {
        let max = model.max_delay_ns();
        let taps = (max / SAMPLE_NS).floor() as usize + 1;
        let rms = max / 4.0;
        let delays: Vec<usize> = (0..taps).collect();
        let powers = delays.iter().map(|&d| (-(d as f64) * SAMPLE_NS / rms).exp()).collect();
        Self::new(format!("model-{model}"), delays, powers).expect("preset is valid")
    }

    /// Reads `name`, `delays_ns` and `powers` from a TOML file. Delays are
    /// snapped down to the sample grid.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.delays_ns.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::Config("delays must be finite and nonnegative".into()));
        }
        let delays = f.delays_ns.iter().map(|d| (d / SAMPLE_NS + 1e-9).floor() as usize).collect();
        Self::new(f.name, delays, f.powers)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().expect("nonempty")
    }
}

/// One realization of the tap matrices (each `N_r x N_t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    pub delays: Vec<usize>,
    pub taps: Vec<CMat>,
}

pub(crate) fn complex_normal<R: Rng>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

impl ChannelTaps {
    /// Draws i.i.d. circular Gaussian taps with the profile's powers.
    pub fn draw<R: Rng>(profile: &DelayProfile, nr: usize, nt: usize, rng: &mut R) -> Self {
        let taps = profile
            .powers
            .iter()
            .map(|&p| CMat::from_fn(nr, nt, |_, _| complex_normal(rng, p)))
            .collect();
        Self { delays: profile.delays.clone(), taps }
    }

    pub fn receive_antennas(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn transmit_antennas(&self) -> usize {
        self.taps[0].ncols()
    }

    /// `H_k = sum_p h_p exp(-j 2 pi k d_p / n)` on an `n`-point grid.
    pub fn response(&self, n: usize) -> Vec<CMat> {
        (0..n)
            .map(|k| {
                let mut h = CMat::zeros(self.receive_antennas(), self.transmit_antennas());
                for (d, t) in self.delays.iter().zip(&self.taps) {
                    let ph = -2.0 * std::f64::consts::PI * ((k * d) % n) as f64 / n as f64;
                    h += t * C64::from_polar(1.0, ph);
                }
                h
            })
            .collect()
    }

    /// Linear convolution; the output is longer by the maximum delay.
    pub fn apply(&self, x: &SampleStream) -> SampleStream {
        let max = *self.delays.last().expect("nonempty");
        let mut y = SampleStream::zeros(self.receive_antennas(), x.len() + max);
        for (d, t) in self.delays.iter().zip(&self.taps) {
            for (r, out) in y.samples.iter_mut().enumerate() {
                for (ti, src) in x.samples.iter().enumerate() {
                    let h = t[(r, ti)];
                    if h == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for (o, s) in out[*d..*d + src.len()].iter_mut().zip(src) {
                        *o += h * s;
                    }
                }
            }
        }
        y
    }
}

/// Taps together with their response on an FFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFrequencyResponse {
    pub taps: ChannelTaps,
    pub fft_size: usize,
    pub tones: Vec<CMat>,
}

impl ChannelFrequencyResponse {
    pub fn new(taps: ChannelTaps, fft_size: usize) -> Result<Self> {
        let max = *taps.delays.last().expect("nonempty");
        if fft_size < 2 * max {
            return Err(Error::Config(format!("FFT size {fft_size} too short for delay {max}")));
        }
        let tones = taps.response(fft_size);
        Ok(Self { taps, fft_size, tones })
    }

    /// Taps first (tap-major), then the response (tone-major); each matrix
    /// column-major.
    pub fn write_complex64<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for t in &self.taps.taps {
            write_complex64(w, t.iter().copied())?;
        }
        for h in &self.tones {
            write_complex64(w, h.iter().copied())?;
        }
        Ok(())
    }
}

pub fn realize_channel(
    profile: &DelayProfile,
    nr: usize,
    nt: usize,
    fft_size: usize,
    seed: u64,
) -> Result<ChannelFrequencyResponse> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChannelFrequencyResponse::new(ChannelTaps::draw(profile, nr, nt, &mut rng), fft_size)
}

/// `sigma_n^2 = N_t sigma_a^2 sigma_h^2 / 10^(snr/10)`.
pub fn snr_to_noise_variance(snr_db: f64, nt: usize, sigma_a2: f64, sigma_h2: f64) -> f64 {
    nt as f64 * sigma_a2 * sigma_h2 / 10f64.powf(snr_db / 10.0)
}

/// Fraction of the sampled band occupied by active subchannels; the noise
/// variance is specified over that bandwidth.
pub fn noise_injection_scale(active: usize, subcarriers: usize) -> f64 {
    active as f64 / subcarriers as f64
}

/// Adds circular Gaussian noise of variance `variance` to every sample.
pub fn add_awgn<R: Rng>(y: &mut SampleStream, variance: f64, rng: &mut R) {
    if variance <= 0.0 {
        return;
    }
    for ant in &mut y.samples {
        for s in ant.iter_mut() {
            *s += complex_normal(rng, variance);
        }
    }
}
