use crate::linalg::inner;
use crate::C64;

/// Relative singular-value gap below which two streams are treated as close
/// and may be re-paired.
pub const CLOSENESS_THRESHOLD: f64 = 0.05;

/// |v^H w| below this is treated as orthogonal (phase undefined).
const ORTHOGONAL_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAligned {
    pub v: Vec<C64>,
    /// The inner product vanished; `v` is the input unchanged.
    pub undefined: bool,
}

/// Rotates `v_hat` by the phase that minimizes its distance to `v_prev`.
pub fn phase_align(v_hat: &[C64], v_prev: &[C64]) -> PhaseAligned {
    let c = inner(v_hat, v_prev);
    let mag = c.norm();
    if mag < ORTHOGONAL_TOL {
        return PhaseAligned { v: v_hat.to_vec(), undefined: true };
    }
    let rot = c / mag;
    PhaseAligned { v: v_hat.iter().map(|z| z * rot).collect(), undefined: false }
}

/// `|| v v^H - w w^H ||_2` for unit vectors, i.e. the sine of the angle
/// between the two lines.
pub fn subspace_distance(v: &[C64], w: &[C64]) -> f64 {
    let c = inner(v, w).norm_sqr();
    (1.0 - c).max(0.0).sqrt()
}

/// Assigns candidate singular pairs (sorted by descending `lambda`) to
/// streams. Returns `perm` with `perm[l]` the candidate used for stream `l`.
/// Candidates whose singular values are within `threshold` (relative) of
/// their neighbour form a cluster; inside a cluster each stream, in
/// ascending order, takes the unused candidate closest to its previous
/// vector.
pub fn pair_streams(candidates: &[(f64, Vec<C64>)], previous: &[Vec<C64>], threshold: f64) -> Vec<usize> {
    let n = candidates.len().min(previous.len());
    let mut perm: Vec<usize> = (0..n).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && close(candidates[end - 1].0, candidates[end].0, threshold) {
            end += 1;
        }
        if end - start > 1 {
            let mut used = vec![false; end - start];
            for l in start..end {
                let mut best: Option<(usize, f64)> = None;
                for c in start..end {
                    if used[c - start] {
                        continue;
                    }
                    let d = subspace_distance(&candidates[c].1, &previous[l]);
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((c, d));
                    }
                }
                let (c, _) = best.expect("cluster has a free candidate");
                used[c - start] = true;
                perm[l] = c;
            }
        }
        start = end;
    }
    perm
}

fn close(hi: f64, lo: f64, threshold: f64) -> bool {
    if hi <= 0.0 {
        return true;
    }
    (hi - lo).abs() / hi < threshold
}
