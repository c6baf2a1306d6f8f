use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::SimConfig;
use super::seeds::{trial_seed, Lane};
use crate::baselines::{fbmc_beamformers, OfdmLink, System, OFDM_CP};
use crate::channel::{add_awgn, complex_normal, noise_injection_scale, snr_to_noise_variance, ChannelTaps, DelayProfile};
use crate::filter::PrototypeFilter;
use crate::link::{decode, encode, message_len, Modulation, QamMapper, TAIL_BITS};
use crate::modem::{oqam_destagger, oqam_stagger, FsFbmcModem, Grid, QamGrid};
use crate::{Result, C64};

/// Frames evaluated per parallel batch. The stopping rule is applied to the
/// batch results in frame order, so the batch size never changes results.
const BATCH: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub digest: String,
    pub system: System,
    pub snr_db: f64,
    pub frames: u64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    pub bits: u64,
    pub errors: u64,
}

/// 95% Wilson score interval half-width.
pub fn wilson_half_width(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.5;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = errors as f64 / n;
    z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()
}

/// Prepared transmit/receive chain for one configuration.
pub struct Link {
    cfg: SimConfig,
    profile: DelayProfile,
    mapper: QamMapper,
    modem: Option<FsFbmcModem>,
    ofdm: Option<OfdmLink>,
}

impl Link {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mask = cfg.active_mask();
        let (modem, ofdm) = if cfg.system == System::SvdOfdm {
            (None, Some(OfdmLink::new(mask, OFDM_CP)?))
        } else {
            let filter = Arc::new(PrototypeFilter::phydyas(cfg.subcarriers, cfg.overlap)?);
            (Some(FsFbmcModem::new(filter, cfg.fft_size(), mask)?), None)
        };
        Ok(Self { profile: cfg.profile()?, mapper: QamMapper::new(cfg.modulation), cfg: cfg.clone(), modem, ofdm })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn modem(&self) -> Option<&FsFbmcModem> {
        self.modem.as_ref()
    }

    /// Channel realization of `frame`.
    pub fn channel(&self, frame: u64) -> ChannelTaps {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(self.cfg.master_seed, Lane::Channel, frame));
        ChannelTaps::draw(&self.profile, self.cfg.receive_antennas, self.cfg.transmit_antennas, &mut rng)
    }

    /// Per-sample noise variance injected at `snr_db`.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        let sigma_a2 = self.cfg.streams as f64 / self.cfg.transmit_antennas as f64;
        let n = if snr_db == f64::INFINITY {
            0.0
        } else {
            snr_to_noise_variance(snr_db, self.cfg.transmit_antennas, sigma_a2, 1.0)
        };
        n * noise_injection_scale(self.cfg.active_subchannels.len(), self.cfg.subcarriers)
    }

    fn qam_grid(&self, symbols: &[C64]) -> QamGrid {
        let c = &self.cfg;
        let mut g = QamGrid::zeros(c.streams, c.subcarriers, c.symbols_per_frame);
        let mut it = symbols.iter();
        for n in 0..c.symbols_per_frame {
            for &m in &c.active_subchannels {
                for l in 0..c.streams {
                    g.set(l, m, n, *it.next().expect("symbol count matches capacity"));
                }
            }
        }
        g
    }

    fn flatten(&self, g: &Grid<C64>, gain: impl Fn(usize, usize) -> f64) -> (Vec<C64>, Vec<f64>) {
        let c = &self.cfg;
        let mut syms = Vec::new();
        let mut vars = Vec::new();
        for n in 0..c.symbols_per_frame {
            for &m in &c.active_subchannels {
                for l in 0..c.streams {
                    syms.push(g.get(l, m, n));
                    vars.push(gain(m, l));
                }
            }
        }
        (syms, vars)
    }

    /// Equalized symbols and their noise variances for one frame.
    pub fn transceive(&self, symbols: &[C64], taps: &ChannelTaps, noise_var: f64, noise_seed: u64) -> Result<(Vec<C64>, Vec<f64>)> {
        let c = &self.cfg;
        let qam = self.qam_grid(symbols);
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        if let Some(ofdm) = &self.ofdm {
            let bf = ofdm.beamformers(taps, c.streams);
            let mut y = taps.apply(&ofdm.modulate(&qam, &bf)?);
            add_awgn(&mut y, noise_var, &mut rng);
            let est = ofdm.demodulate(&y, &bf, c.symbols_per_frame)?;
            return Ok(self.flatten(&est, |m, l| noise_var * ofdm.noise_gain(&bf, m, l)));
        }
        let modem = self.modem.as_ref().expect("FBMC link has a modem");
        let bf = fbmc_beamformers(c.system, c.smoothing_method(), taps, modem, c.streams)?;
        let pam = oqam_stagger(&qam, modem.active())?;
        let mut y = taps.apply(&modem.modulate(&pam, &bf)?);
        add_awgn(&mut y, noise_var, &mut rng);
        let rx = modem.demodulate(&y, &bf, pam.half_times())?;
        let est = oqam_destagger(&rx.pam)?;
        let mut gains = vec![vec![0.0; c.streams]; c.subcarriers];
        for &m in &c.active_subchannels {
            for (l, g) in gains[m].iter_mut().enumerate() {
                *g = modem.noise_gain(&bf, m, l)?;
            }
        }
        Ok(self.flatten(&est, |m, l| noise_var * gains[m][l]))
    }

    /// Simulates frame `frame` at SNR index `snr_idx`.
    pub fn run_frame(&self, snr_idx: usize, frame: u64) -> Result<FrameOutcome> {
        let c = &self.cfg;
        let capacity = c.frame_capacity();
        let mut data_rng = ChaCha8Rng::seed_from_u64(trial_seed(c.master_seed, Lane::Data, frame));
        let (message, coded) = if c.coded {
            let n = message_len(&c.code, capacity)?;
            let mut m: Vec<u8> = (0..n - TAIL_BITS).map(|_| data_rng.random::<bool>() as u8).collect();
            m.extend([0; TAIL_BITS]);
            let coded = encode(&m, &c.code);
            (m, coded)
        } else {
            let bits: Vec<u8> = (0..capacity).map(|_| data_rng.random::<bool>() as u8).collect();
            (bits.clone(), bits)
        };
        let symbols = self.mapper.map(&coded)?;
        let taps = self.channel(frame);
        let noise_var = self.noise_variance(c.snr_db[snr_idx]);
        let noise_seed = trial_seed(c.master_seed, Lane::Noise(snr_idx), frame);
        let (est, vars) = self.transceive(&symbols, &taps, noise_var, noise_seed)?;
        let (decided, payload) = if c.coded {
            let llr = self.mapper.demap_each(&est, &vars);
            (decode(&llr, &c.code)?, message.len() - TAIL_BITS)
        } else {
            (self.mapper.hard_bits(&est), message.len())
        };
        let errors = decided[..payload].iter().zip(&message[..payload]).filter(|(a, b)| a != b).count();
        Ok(FrameOutcome { bits: payload as u64, errors: errors as u64 })
    }
}

/// BER sweep over the configured SNR grid. `parallel` distributes frames
/// over the rayon pool; results are identical either way.
pub fn run_ber_sweep(cfg: &SimConfig, parallel: bool) -> Result<Vec<BerRecord>> {
    let link = Link::new(cfg)?;
    let digest = cfg.digest();
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let (mut frames, mut bits, mut errors) = (0u64, 0u64, 0u64);
        let mut next = 0usize;
        'point: while next < cfg.frames_per_point {
            let batch: Vec<u64> = (next..(next + BATCH).min(cfg.frames_per_point)).map(|f| f as u64).collect();
            let outcomes: Vec<Result<FrameOutcome>> = if parallel {
                batch.par_iter().map(|&f| link.run_frame(idx, f)).collect()
            } else {
                batch.iter().map(|&f| link.run_frame(idx, f)).collect()
            };
            for o in outcomes {
                let o = o?;
                frames += 1;
                bits += o.bits;
                errors += o.errors;
                if cfg.target_errors > 0 && errors >= cfg.target_errors && frames >= cfg.min_frames as u64 {
                    break 'point;
                }
            }
            next += batch.len();
        }
        let ber = if bits == 0 { 0.0 } else { errors as f64 / bits as f64 };
        records.push(BerRecord {
            digest: digest.clone(),
            system: cfg.system,
            snr_db: snr,
            frames,
            bits,
            errors,
            ber,
            half_width: wilson_half_width(errors, bits),
        });
    }
    Ok(records)
}

/// Uncoded QAM over a scalar AWGN channel at symbol SNR `snr_db`
/// (`E_s/N_0` with unit symbol energy).
pub fn awgn_qam_ber(modulation: Modulation, snr_db: f64, bits: usize, seed: u64) -> Result<FrameOutcome> {
    let mapper = QamMapper::new(modulation);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = modulation.bits_per_symbol();
    let n = bits / per * per;
    let tx: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
    let var = 10f64.powf(-snr_db / 10.0);
    let rx: Vec<C64> = mapper.map(&tx)?.into_iter().map(|s| s + complex_normal(&mut rng, var)).collect();
    let errors = mapper.hard_bits(&rx).iter().zip(&tx).filter(|(a, b)| a != b).count();
    Ok(FrameOutcome { bits: n as u64, errors: errors as u64 })
}
