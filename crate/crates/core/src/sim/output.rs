use std::io::Write;

use super::ber::BerRecord;
use super::config::SimConfig;
use crate::Result;

/// One CSV row per record.
pub fn write_ber_csv<W: Write>(w: W, cfg: &SimConfig, records: &[BerRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "digest", "system", "smoothing", "modulation", "coded", "channel", "fft_factor", "snr_db", "frames", "bits",
        "errors", "ber", "wilson_half_width",
    ])?;
    for r in records {
        out.write_record([
            r.digest.clone(),
            r.system.to_string(),
            if r.system.smoothed() { cfg.smoothing_method().to_string() } else { "none".into() },
            cfg.modulation.to_string(),
            cfg.coded.to_string(),
            format!("{:?}", cfg.channel),
            cfg.fft_factor.to_string(),
            r.snr_db.to_string(),
            r.frames.to_string(),
            r.bits.to_string(),
            r.errors.to_string(),
            format!("{:e}", r.ber),
            format!("{:e}", r.half_width),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Plain-text manifest: version, digest and the full configuration.
pub fn write_manifest<W: Write>(mut w: W, cfg: &SimConfig) -> Result<()> {
    writeln!(w, "# fsfbmc {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# digest {}", cfg.digest())?;
    writeln!(w, "# master_seed {}", cfg.master_seed)?;
    w.write_all(cfg.to_toml().as_bytes())?;
    Ok(())
}
