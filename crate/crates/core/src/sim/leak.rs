use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ber::Link;
use super::config::SimConfig;
use super::seeds::{trial_seed, Lane};
use crate::baselines::{fbmc_beamformers, System};
use crate::filter::PrototypeFilter;
use crate::modem::{FsFbmcModem, PamGrid};
use crate::smoothing::{BeamformerSet, Granularity};
use crate::{Error, Result};

/// Real-part interference relative to the PAM symbol power, per subchannel
/// and averaged over the active subchannels.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakReport {
    pub per_subchannel: Vec<f64>,
    pub mean: f64,
    pub draws: usize,
}

/// Noiseless probe of the interference leaked into the real domain.
///
/// Each draw sends a random PAM grid over the configured system and
/// compares `Re(a~)` with the back-to-back output of the same modem (unit
/// channel, identity beamformers), so the filter bank's own residual is not
/// counted as leakage.
pub fn measure_leaked_interference(cfg: &SimConfig, draws: usize, parallel: bool) -> Result<LeakReport> {
    if cfg.system == System::SvdOfdm {
        return Err(Error::Config("leakage probe applies to FBMC systems".into()));
    }
    let link = Link::new(cfg)?;
    let modem = link.modem().expect("FBMC link");
    let m_count = cfg.subcarriers;
    let half_times = 2 * cfg.symbols_per_frame;
    let reference = BeamformerSet::identity(Granularity::Tone, modem.fft_size(), cfg.transmit_antennas, cfg.streams);
    let b2b = back_to_back(modem, cfg)?;
    let one = |d: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.master_seed, Lane::Data, d as u64));
        let mut pam = PamGrid::zeros(cfg.streams, cfg.active_mask(), half_times);
        for l in 0..cfg.streams {
            for &m in &cfg.active_subchannels {
                for n in 0..half_times {
                    pam.set(l, m, n, if rng.random::<bool>() { 1.0 } else { -1.0 });
                }
            }
        }
        let taps = link.channel(d as u64);
        let bf = fbmc_beamformers(cfg.system, cfg.smoothing_method(), &taps, modem, cfg.streams)?;
        let y = taps.apply(&modem.modulate(&pam, &bf)?);
        let rx = modem.demodulate(&y, &bf, half_times)?;
        let x = b2b.modulate(&pam, &reference)?;
        let rx_ref = b2b.demodulate(&x, &reference, half_times)?;
        let mut leak = vec![0.0; m_count];
        let mut power = vec![0.0; m_count];
        for l in 0..cfg.streams {
            for &m in &cfg.active_subchannels {
                for n in 0..half_times {
                    let e = rx.pam.get(l, m, n) - rx_ref.pam.get(l, m, n);
                    leak[m] += e * e;
                    power[m] += pam.get(l, m, n).powi(2);
                }
            }
        }
        Ok((leak, power))
    };
    let parts: Vec<Result<(Vec<f64>, Vec<f64>)>> =
        if parallel { (0..draws).into_par_iter().map(one).collect() } else { (0..draws).map(one).collect() };
    let mut leak = vec![0.0; m_count];
    let mut power = vec![0.0; m_count];
    for p in parts {
        let (l, s) = p?;
        for m in 0..m_count {
            leak[m] += l[m];
            power[m] += s[m];
        }
    }
    let per_subchannel: Vec<f64> = (0..m_count).map(|m| if power[m] > 0.0 { leak[m] / power[m] } else { 0.0 }).collect();
    let mean = cfg.active_subchannels.iter().map(|&m| per_subchannel[m]).sum::<f64>() / cfg.active_subchannels.len() as f64;
    Ok(LeakReport { per_subchannel, mean, draws })
}

fn back_to_back(modem: &FsFbmcModem, cfg: &SimConfig) -> Result<FsFbmcModem> {
    let filter = Arc::new(PrototypeFilter::phydyas(cfg.subcarriers, cfg.overlap)?);
    FsFbmcModem::new(filter, modem.fft_size(), modem.active().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ChannelChoice;

    #[test]
    fn flat_channel_has_no_leak() {
        let cfg = SimConfig { channel: ChannelChoice::Flat, ..SimConfig::default() };
        let r = measure_leaked_interference(&cfg, 2, false).unwrap();
        assert!(r.mean < 1e-10, "{}", r.mean);
    }

    #[test]
    fn ofdm_rejected() {
        let cfg = SimConfig { system: System::SvdOfdm, ..SimConfig::default() };
        assert!(measure_leaked_interference(&cfg, 1, false).is_err());
    }
}
