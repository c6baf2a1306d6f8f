use super::interleave::Interleaver;
use super::viterbi::viterbi_decode;
use crate::{Error, Result};

/// Zero bits appended to flush the encoder.
pub const TAIL_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CodeConfig {
    /// Generator polynomials (octal notation as integers, MSB = current bit).
    pub generators: [u32; 2],
    pub constraint_length: u32,
    /// One `[keep A, keep B]` pair per input bit of the puncturing period.
    pub puncture: Vec<[bool; 2]>,
    pub interleaver_seed: u64,
    /// Messages end with `TAIL_BITS` zeros, so the decoder may start its
    /// traceback from state 0.
    pub zero_terminated: bool,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self {
            generators: [0o133, 0o171],
            constraint_length: 7,
            puncture: vec![[true, true], [true, false]],
            interleaver_seed: 0x1e4_7ea5,
            zero_terminated: true,
        }
    }
}

impl CodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.constraint_length != 7 {
            return Err(Error::Config("only constraint length 7 is supported".into()));
        }
        if self.generators.iter().any(|g| *g == 0 || *g >= 1 << 7) {
            return Err(Error::Config("generators must be nonzero 7-bit polynomials".into()));
        }
        let kept: usize = self.puncture.iter().map(|p| p.iter().filter(|b| **b).count()).sum();
        if self.puncture.is_empty() || 2 * kept != 3 * self.puncture.len() {
            return Err(Error::Config("puncturing pattern must give rate 2/3".into()));
        }
        if !self.puncture[0][0] && !self.puncture[0][1] {
            return Err(Error::Config("puncturing pattern must keep a bit of the first step".into()));
        }
        Ok(())
    }

    fn kept(&self, i: usize) -> [bool; 2] {
        self.puncture[i % self.puncture.len()]
    }
}

/// Punctured output length for an `n`-bit message.
pub fn coded_len(cfg: &CodeConfig, n: usize) -> usize {
    (0..n).map(|i| cfg.kept(i).iter().filter(|b| **b).count()).sum()
}

/// Message length whose punctured output has `len` bits.
pub fn message_len(cfg: &CodeConfig, len: usize) -> Result<usize> {
    // The output length is nondecreasing in n and grows by at most two per
    // bit, so n lies in [len/2, len].
    (len / 2..=len)
        .find(|&n| coded_len(cfg, n) == len)
        .ok_or_else(|| Error::Shape(format!("{len} is not a valid coded block length")))
}

#[inline]
fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Mother-code outputs `(A, B)` for input `bit` from `state`, and the next
/// state.
#[inline]
pub(crate) fn step(generators: [u32; 2], state: u32, bit: u8) -> (u8, u8, u32) {
    let reg = ((bit as u32) << 6) | state;
    (parity(reg & generators[0]), parity(reg & generators[1]), reg >> 1)
}

/// Convolutional encoding, puncturing and interleaving. No tail is added.
pub fn encode(bits: &[u8], cfg: &CodeConfig) -> Vec<u8> {
    let mut state = 0;
    let mut out = Vec::with_capacity(coded_len(cfg, bits.len()));
    for (i, &b) in bits.iter().enumerate() {
        let (a, c, next) = step(cfg.generators, state, b & 1);
        state = next;
        let keep = cfg.kept(i);
        if keep[0] {
            out.push(a);
        }
        if keep[1] {
            out.push(c);
        }
    }
    Interleaver::new(out.len(), cfg.interleaver_seed).interleave(&out)
}

/// Deinterleaving, depuncturing with zero LLRs and soft Viterbi decoding.
/// LLRs are `log P(0)/P(1)`.
pub fn decode(llrs: &[f64], cfg: &CodeConfig) -> Result<Vec<u8>> {
    let n = message_len(cfg, llrs.len())?;
    let coded = Interleaver::new(llrs.len(), cfg.interleaver_seed).deinterleave(llrs);
    let mut pairs = Vec::with_capacity(n);
    let mut it = coded.into_iter();
    for i in 0..n {
        let keep = cfg.kept(i);
        let a = if keep[0] { it.next().unwrap_or(0.0) } else { 0.0 };
        let b = if keep[1] { it.next().unwrap_or(0.0) } else { 0.0 };
        pairs.push([a, b]);
    }
    Ok(viterbi_decode(&pairs, cfg.generators, cfg.zero_terminated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn message(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        let mut m: Vec<u8> = (0..n).map(|_| rng.random::<bool>() as u8).collect();
        m.extend([0; TAIL_BITS]);
        m
    }

    fn clean(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect()
    }

    #[test]
    fn rate_arithmetic() {
        let cfg = CodeConfig::default();
        cfg.validate().unwrap();
        assert_eq!(encode(&[0; 100], &cfg), vec![0; 150]);
        assert_eq!(coded_len(&cfg, 101), 152);
        assert_eq!(message_len(&cfg, 150).unwrap(), 100);
        assert_eq!(message_len(&cfg, 152).unwrap(), 101);
        assert!(matches!(message_len(&cfg, 151), Err(Error::Shape(_))));
        assert!(matches!(decode(&[0.0; 151], &cfg), Err(Error::Shape(_))));
    }

    #[test]
    fn known_mother_code_output() {
        // Impulse response of 133/171: the generator taps, MSB first.
        let cfg = CodeConfig { puncture: vec![[true, true]; 2], ..CodeConfig::default() };
        let mut state = 0;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for bit in [1u8, 0, 0, 0, 0, 0, 0] {
            let (x, y, s) = step(cfg.generators, state, bit);
            state = s;
            a.push(x);
            b.push(y);
        }
        assert_eq!(a, vec![1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(b, vec![1, 1, 1, 1, 0, 0, 1]);
    }

    #[test]
    fn clean_round_trip() {
        let cfg = CodeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 37, 100, 401] {
            let m = message(&mut rng, n);
            assert_eq!(decode(&clean(&encode(&m, &cfg)), &cfg).unwrap(), m);
        }
    }

    #[test]
    fn corrects_any_single_error() {
        let cfg = CodeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = message(&mut rng, 94);
        let coded = encode(&m, &cfg);
        for i in 0..coded.len() {
            let mut llr = clean(&coded);
            llr[i] = -llr[i];
            assert_eq!(decode(&llr, &cfg).unwrap(), m, "flip at {i}");
        }
    }

    #[test]
    fn zero_llrs_decode_to_zero_path() {
        let cfg = CodeConfig::default();
        assert_eq!(decode(&[0.0; 30], &cfg).unwrap(), vec![0; 20]);
        let free = CodeConfig { zero_terminated: false, ..cfg };
        assert_eq!(decode(&[0.0; 30], &free).unwrap(), vec![0; 20]);
    }

    #[test]
    fn rejects_bad_patterns() {
        let bad = CodeConfig { puncture: vec![[true, true]], ..CodeConfig::default() };
        assert!(bad.validate().is_err());
    }
}
