use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fsfbmc::baselines::System;
use fsfbmc::link::Modulation;
use fsfbmc::sim::{
    distance_histogram_for, measure_leaked_interference, run_ber_sweep, write_ber_csv, write_manifest,
    ChannelChoice, SimConfig, SmootherKind,
};
use fsfbmc::smoothing::{flops_estimate, FlopsBreakdown, SmoothingMethod};

#[derive(Parser)]
#[command(name = "fsfbmc", version, about = "FS-FBMC MIMO link-level simulator")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER sweep over an SNR grid.
    Ber {
        #[command(flatten)]
        sim: SimArgs,
        /// Output directory for ber.csv and manifest.txt (stdout if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run frames on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Histogram of adjacent-tone beamformer distances.
    Hist {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        #[arg(long, default_value_t = 2.0)]
        max: f64,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, value_delimiter = ',', default_value = "none,phase_factor,ortho_iter3")]
        methods: Vec<SmoothingMethod>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Real-part interference probe (noiseless).
    Leak {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-tone FLOPS of the smoothing methods.
    Flops {
        #[arg(long, default_value_t = 2)]
        nt: usize,
        #[arg(long, default_value_t = 2)]
        nr: usize,
        #[arg(long, default_value_t = 3)]
        n_iter: usize,
    },
}

#[derive(Args)]
struct SimArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<System>,
    #[arg(long)]
    smoother: Option<SmootherKind>,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    modulation: Option<Modulation>,
    #[arg(long)]
    coded: Option<bool>,
    #[arg(long)]
    channel: Option<ChannelChoice>,
    /// Delay profile file for `--channel custom`.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    fft_factor: Option<usize>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    min_frames: Option<usize>,
    #[arg(long)]
    target_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated active subchannel indices.
    #[arg(long, value_delimiter = ',')]
    active: Option<Vec<usize>>,
}

impl SimArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut c = match &self.config {
            Some(p) => SimConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => SimConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $arg:ident),*) => {$(
                if let Some(v) = &self.$arg { c.$field = v.clone(); }
            )*};
        }
        set!(system <- system, smoother <- smoother, n_iter <- n_iter, modulation <- modulation,
             coded <- coded, channel <- channel, fft_factor <- fft_factor, snr_db <- snr,
             frames_per_point <- frames, min_frames <- min_frames, target_errors <- target_errors,
             master_seed <- seed, active_subchannels <- active);
        if let Some(p) = &self.profile {
            c.profile_path = Some(p.clone());
        }
        c.validate()?;
        Ok(c)
    }
}

fn sink(dir: &Option<PathBuf>, name: &str) -> Result<Box<dyn Write>> {
    Ok(match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            Box::new(BufWriter::new(File::create(d.join(name))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Ber { sim, out, sequential } => {
            let cfg = sim.resolve()?;
            let records = run_ber_sweep(&cfg, !sequential)?;
            write_ber_csv(sink(&out, "ber.csv")?, &cfg, &records)?;
            if out.is_some() {
                write_manifest(sink(&out, "manifest.txt")?, &cfg)?;
            }
        }
        Command::Hist { sim, draws, max, bins, methods, out } => {
            let cfg = sim.resolve()?;
            let edges: Vec<f64> = (0..=bins).map(|i| max * i as f64 / bins as f64).collect();
            let mut w = csv::Writer::from_writer(sink(&out, "hist.csv")?);
            w.write_record(["method", "lower", "upper", "count", "mass"])?;
            for m in methods {
                let h = distance_histogram_for(&cfg, m, draws, &edges, true)?;
                let masses = h.masses();
                for i in 0..h.counts.len() {
                    w.write_record([
                        m.to_string(),
                        edges[i].to_string(),
                        edges[i + 1].to_string(),
                        h.counts[i].to_string(),
                        format!("{:e}", masses[i]),
                    ])?;
                }
                w.write_record([m.to_string(), max.to_string(), "inf".into(), h.overflow.to_string(), format!("{:e}", masses[h.counts.len() + 1])])?;
            }
            w.flush()?;
        }
        Command::Leak { sim, draws, out } => {
            let cfg = sim.resolve()?;
            let r = measure_leaked_interference(&cfg, draws, true)?;
            let mut w = csv::Writer::from_writer(sink(&out, "leak.csv")?);
            w.write_record(["subchannel", "relative_leak"])?;
            for &m in &cfg.active_subchannels {
                w.write_record([m.to_string(), format!("{:e}", r.per_subchannel[m])])?;
            }
            w.write_record(["mean".to_string(), format!("{:e}", r.mean)])?;
            w.flush()?;
        }
        Command::Flops { nt, nr, n_iter } => {
            let b = FlopsBreakdown::orthogonal_iteration(nt, nr, n_iter);
            println!("operation,flops");
            println!("gram_matrix,{}", b.gram);
            println!("multiply_x{n_iter},{}", b.multiply);
            println!("qr_x{n_iter},{}", b.qr);
            println!("receive_beamformer,{}", b.receive);
            println!("ortho_iter{n_iter}_total,{}", flops_estimate(nt, nr, SmoothingMethod::OrthoIter(n_iter)));
            println!("phase_factor_total,{}", flops_estimate(nt, nr, SmoothingMethod::PhaseFactor));
        }
    }
    Ok(())
}
