use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::System;
use crate::channel::{ChannelModel, DelayProfile};
use crate::link::{CodeConfig, Modulation};
use crate::smoothing::SmoothingMethod;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelChoice {
    D,
    E,
    F,
    #[serde(rename = "flat")]
    Flat,
    /// Profile read from `profile_path`.
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for ChannelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Self::Flat),
            "custom" => Ok(Self::Custom),
            _ => Ok(match s.parse::<ChannelModel>()? {
                ChannelModel::D => Self::D,
                ChannelModel::E => Self::E,
                ChannelModel::F => Self::F,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmootherKind {
    OrthoIter,
    PhaseFactor,
}

impl std::str::FromStr for SmootherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ortho_iter" => Ok(Self::OrthoIter),
            "phase_factor" => Ok(Self::PhaseFactor),
            _ => Err(Error::Parse(format!("unknown smoother '{s}'"))),
        }
    }
}

/// Data subchannels `-26..=-1, 1..=26` without `+-7, +-21`, as indices
/// modulo 64.
pub fn standard_active_subchannels() -> Vec<usize> {
    let mut v: Vec<usize> = (-26i64..=26)
        .filter(|k| *k != 0 && k.abs() != 7 && k.abs() != 21)
        .map(|k| k.rem_euclid(64) as usize)
        .collect();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub system: System,
    pub smoother: SmootherKind,
    pub n_iter: usize,
    pub modulation: Modulation,
    pub coded: bool,
    pub channel: ChannelChoice,
    pub profile_path: Option<PathBuf>,
    /// FFT size of the FS-FBMC modem in units of `M` (`K` or `2K`).
    pub fft_factor: usize,
    pub snr_db: Vec<f64>,
    pub frames_per_point: usize,
    pub min_frames: usize,
    /// Stop a point once this many bit errors are seen (0 disables).
    pub target_errors: u64,
    pub master_seed: u64,
    pub active_subchannels: Vec<usize>,
    pub subcarriers: usize,
    pub overlap: usize,
    pub transmit_antennas: usize,
    pub receive_antennas: usize,
    pub streams: usize,
    pub symbols_per_frame: usize,
    pub code: CodeConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            system: System::Proposed,
            smoother: SmootherKind::OrthoIter,
            n_iter: 3,
            modulation: Modulation::Qam64,
            coded: false,
            channel: ChannelChoice::D,
            profile_path: None,
            fft_factor: 4,
            snr_db: vec![0.0, 10.0, 20.0, 30.0],
            frames_per_point: 200,
            min_frames: 20,
            target_errors: 500,
            master_seed: 1,
            active_subchannels: standard_active_subchannels(),
            subcarriers: 64,
            overlap: 4,
            transmit_antennas: 2,
            receive_antennas: 2,
            streams: 2,
            symbols_per_frame: 7,
            code: CodeConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// First 16 hex digits of the SHA-256 of the TOML form.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.to_toml().as_bytes());
        h.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn smoothing_method(&self) -> SmoothingMethod {
        match self.smoother {
            SmootherKind::OrthoIter => SmoothingMethod::OrthoIter(self.n_iter),
            SmootherKind::PhaseFactor => SmoothingMethod::PhaseFactor,
        }
    }

    pub fn fft_size(&self) -> usize {
        self.fft_factor * self.subcarriers
    }

    pub fn active_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.subcarriers];
        for &m in &self.active_subchannels {
            mask[m] = true;
        }
        mask
    }

    pub fn profile(&self) -> Result<DelayProfile> {
        Ok(match self.channel {
            ChannelChoice::D => DelayProfile::preset(ChannelModel::D),
            ChannelChoice::E => DelayProfile::preset(ChannelModel::E),
            ChannelChoice::F => DelayProfile::preset(ChannelModel::F),
            ChannelChoice::Flat => DelayProfile::new("flat", vec![0], vec![1.0])?,
            ChannelChoice::Custom => {
                let path = self
                    .profile_path
                    .as_ref()
                    .ok_or_else(|| Error::Config("custom channel needs profile_path".into()))?;
                DelayProfile::load(path)?
            }
        })
    }

    /// Coded (or raw) bits carried by one frame.
    pub fn frame_capacity(&self) -> usize {
        self.symbols_per_frame * self.active_subchannels.len() * self.streams * self.modulation.bits_per_symbol()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.snr_db.is_empty() || self.snr_db.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return fail("SNR grid must be nonempty and strictly increasing".into());
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return fail("SNR values must not be NaN".into());
        }
        if self.frames_per_point == 0 {
            return fail("frames_per_point must be at least 1".into());
        }
        if self.n_iter == 0 {
            return fail("n_iter must be at least 1".into());
        }
        if self.fft_factor != self.overlap && self.fft_factor != 2 * self.overlap {
            return fail(format!("fft_factor must be {} or {}", self.overlap, 2 * self.overlap));
        }
        if self.streams == 0 || self.streams > self.transmit_antennas.min(self.receive_antennas) {
            return fail("stream count must be between 1 and min(Nt, Nr)".into());
        }
        if self.symbols_per_frame == 0 {
            return fail("symbols_per_frame must be positive".into());
        }
        if self.active_subchannels.is_empty()
            || self.active_subchannels.windows(2).any(|w| w[1] <= w[0])
            || self.active_subchannels.iter().any(|&m| m >= self.subcarriers)
        {
            return fail("active subchannels must be sorted, unique and below M".into());
        }
        if self.channel == ChannelChoice::Custom && self.profile_path.is_none() {
            return fail("custom channel needs profile_path".into());
        }
        self.code.validate()?;
        if self.coded && crate::link::message_len(&self.code, self.frame_capacity()).is_err() {
            return fail("frame capacity is not a valid coded block length".into());
        }
        Ok(())
    }
}
