use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Modulation {
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
}

impl Modulation {
    pub fn order(self) -> usize {
        match self {
            Self::Qam16 => 16,
            Self::Qam64 => 64,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        self.order().trailing_zeros() as usize
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().trim_end_matches("qam").trim_end_matches('-') {
            "16" => Ok(Self::Qam16),
            "64" => Ok(Self::Qam64),
            _ => Err(Error::Parse(format!("unknown modulation '{s}'"))),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}qam", self.order())
    }
}

/// Square Gray-labelled QAM with unit average energy. The first half of a
/// symbol's bits select the in-phase level, the second half the quadrature
/// level; each axis uses a binary-reflected Gray code, MSB first.
#[derive(Debug, Clone)]
pub struct QamMapper {
    modulation: Modulation,
    /// Amplitude of each axis label.
    levels: Vec<f64>,
}

impl QamMapper {
    pub fn new(modulation: Modulation) -> Self {
        let side = 1usize << (modulation.bits_per_symbol() / 2);
        let scale = (2.0 * (modulation.order() as f64 - 1.0) / 3.0).sqrt().recip();
        let mut levels = vec![0.0; side];
        for j in 0..side {
            let gray = j ^ (j >> 1);
            levels[gray] = (2.0 * j as f64 - (side as f64 - 1.0)) * scale;
        }
        Self { modulation, levels }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    fn axis_bits(&self) -> usize {
        self.modulation.bits_per_symbol() / 2
    }

    fn check(&self, n: usize) -> Result<()> {
        let b = self.modulation.bits_per_symbol();
        if !n.is_multiple_of(b) {
            return Err(Error::Shape(format!("{n} bits do not fill {b}-bit symbols")));
        }
        Ok(())
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<C64>> {
        self.check(bits.len())?;
        let h = self.axis_bits();
        let label = |bs: &[u8]| bs.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
        Ok(bits
            .chunks_exact(2 * h)
            .map(|c| C64::new(self.levels[label(&c[..h])], self.levels[label(&c[h..])]))
            .collect())
    }

    /// Max-log LLRs `log P(0)/P(1)` with a common noise variance.
    pub fn demap(&self, symbols: &[C64], noise_var: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(symbols.len() * self.modulation.bits_per_symbol());
        for s in symbols {
            self.demap_one(*s, noise_var, &mut out);
        }
        out
    }

    /// Max-log LLRs with a per-symbol noise variance.
    pub fn demap_each(&self, symbols: &[C64], noise_vars: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(symbols.len() * self.modulation.bits_per_symbol());
        for (s, v) in symbols.iter().zip(noise_vars) {
            self.demap_one(*s, *v, &mut out);
        }
        out
    }

    fn demap_one(&self, s: C64, noise_var: f64, out: &mut Vec<f64>) {
        let v = noise_var.max(1e-300);
        for y in [s.re, s.im] {
            let h = self.axis_bits();
            for bit in (0..h).rev() {
                let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
                for (label, &x) in self.levels.iter().enumerate() {
                    let d = (y - x) * (y - x);
                    if (label >> bit) & 1 == 0 {
                        d0 = d0.min(d);
                    } else {
                        d1 = d1.min(d);
                    }
                }
                out.push((d1 - d0) / v);
            }
        }
    }

    /// Hard decisions (signs of the LLRs).
    pub fn hard_bits(&self, symbols: &[C64]) -> Vec<u8> {
        self.demap(symbols, 1.0).into_iter().map(|l| (l < 0.0) as u8).collect()
    }
}
