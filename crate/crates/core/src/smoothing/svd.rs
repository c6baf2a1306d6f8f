use crate::linalg::canonical_columns;
use crate::{CMat, C64};

/// Thin SVD truncated to `L` streams.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: CMat,
    pub d: Vec<f64>,
    pub v: CMat,
}

/// Rotates column `j` of `v` so its largest-magnitude entry (lowest index on
/// ties) is real positive, applying the same rotation to column `j` of `u`.
pub(crate) fn normalize_phase(v: &mut CMat, u: &mut CMat, j: usize) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for i in 0..v.nrows() {
        let mag = v[(i, j)].norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let rot = v[(best, j)].conj() / best_mag;
    v.column_mut(j).iter_mut().for_each(|z| *z *= rot);
    u.column_mut(j).iter_mut().for_each(|z| *z *= rot);
    v[(best, j)] = C64::new(v[(best, j)].re, 0.0);
}

/// `H = U diag(D) V^H` restricted to the `streams` largest singular values,
/// sorted descending, with the phase convention of [`normalize_phase`].
/// The zero matrix maps to canonical basis columns.
pub fn svd_decompose(h: &CMat, streams: usize) -> Svd {
    let (nr, nt) = h.shape();
    assert!(streams <= nr.min(nt), "stream count exceeds channel rank bound");
    if h.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Svd {
            u: canonical_columns(nr, streams),
            d: vec![0.0; streams],
            v: canonical_columns(nt, streams),
        };
    }
    let svd = h.clone().svd(true, true);
    let u_full = svd.u.expect("requested U");
    let v_full = svd.v_t.expect("requested V^H").adjoint();
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let mut u = CMat::zeros(nr, streams);
    let mut v = CMat::zeros(nt, streams);
    let mut d = Vec::with_capacity(streams);
    for (j, &src) in order.iter().take(streams).enumerate() {
        u.set_column(j, &u_full.column(src));
        v.set_column(j, &v_full.column(src));
        d.push(s[src]);
        normalize_phase(&mut v, &mut u, j);
    }
    Svd { u, d, v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn diagonal() {
        let h = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)]));
        let s = svd_decompose(&h, 2);
        assert!((s.d[0] - 2.0).abs() < 1e-14 && (s.d[1] - 1.0).abs() < 1e-14);
        assert!(frobenius_norm(&(&s.v - canonical_columns(2, 2))) < 1e-14);
        assert!(frobenius_norm(&(&s.u - canonical_columns(2, 2))) < 1e-14);
    }

    #[test]
    fn zero_matrix_gives_canonical() {
        let s = svd_decompose(&CMat::zeros(3, 2), 2);
        assert_eq!(s.d, vec![0.0, 0.0]);
        assert_eq!(s.v, canonical_columns(2, 2));
        assert_eq!(s.u, canonical_columns(3, 2));
    }

    #[test]
    fn reconstructs_and_is_repeatable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let h = random(&mut rng, 2, 2);
            let s = svd_decompose(&h, 2);
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, s.d.iter().map(|&x| C64::new(x, 0.0))));
            let rec = &s.u * d * s.v.adjoint();
            assert!(frobenius_norm(&(rec - &h)) < 1e-10);
            assert_eq!(s, svd_decompose(&h, 2));
            for j in 0..2 {
                let col = s.v.column(j);
                let (i, _) = col.iter().enumerate().fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
                assert_eq!(col[i].im, 0.0);
                assert!(col[i].re > 0.0);
            }
        }
    }

    #[test]
    fn truncation_keeps_largest() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random(&mut rng, 4, 3);
        let full = svd_decompose(&h, 3);
        let one = svd_decompose(&h, 1);
        assert_eq!(one.d[0], full.d[0]);
        assert!(full.d[0] >= full.d[1] && full.d[1] >= full.d[2]);
    }
}
