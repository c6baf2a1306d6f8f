use super::code::step;

const STATES: usize = 64;

/// Soft-input Viterbi decoder over the 64-state mother-code trellis.
///
/// `pairs[i]` holds the LLRs (`log P(0)/P(1)`, zero if punctured) of the two
/// mother-code outputs for input bit `i`. Ties between predecessors go to
/// the one whose dropped bit is 0. With `terminated` the traceback starts at
/// state 0, otherwise at the best state (lowest index on ties).
pub fn viterbi_decode(pairs: &[[f64; 2]], generators: [u32; 2], terminated: bool) -> Vec<u8> {
    // Branch outputs for each (state, input bit), signed +1 for 0 and -1 for 1.
    let mut out = [[[0.0f64; 2]; 2]; STATES];
    for (s, o) in out.iter_mut().enumerate() {
        for b in 0..2u8 {
            let (x, y, _) = step(generators, s as u32, b);
            o[b as usize] = [1.0 - 2.0 * x as f64, 1.0 - 2.0 * y as f64];
        }
    }
    let mut metric = [f64::NEG_INFINITY; STATES];
    metric[0] = 0.0;
    let mut decisions: Vec<u64> = Vec::with_capacity(pairs.len());
    for llr in pairs {
        let mut next = [f64::NEG_INFINITY; STATES];
        let mut dec = 0u64;
        for (ns, slot) in next.iter_mut().enumerate() {
            let bit = ns >> 5;
            let base = (ns & 0x1f) << 1;
            let mut best = f64::NEG_INFINITY;
            let mut choice = 0;
            for x in 0..2 {
                let s = base | x;
                let o = out[s][bit];
                let m = metric[s] + o[0] * llr[0] + o[1] * llr[1];
                if m > best {
                    best = m;
                    choice = x;
                }
            }
            *slot = best;
            dec |= (choice as u64) << ns;
        }
        metric = next;
        decisions.push(dec);
    }
    let mut state = if terminated {
        0
    } else {
        (0..STATES).fold(0, |b, s| if metric[s] > metric[b] { s } else { b })
    };
    let mut bits = vec![0u8; pairs.len()];
    for (t, dec) in decisions.iter().enumerate().rev() {
        bits[t] = (state >> 5) as u8;
        let x = ((dec >> state) & 1) as usize;
        state = ((state & 0x1f) << 1) | x;
    }
    bits
}
