use super::beamformer::ZF_FLOOR_REL;
use crate::linalg::{canonical_completion, column, from_columns, thin_qr};
use crate::{CMat, C64};

#[derive(Debug, Clone)]
pub struct OrthoIterOutput {
    pub v: CMat,
    /// Upper-triangular factor of the last QR step.
    pub r: CMat,
    pub d: Vec<f64>,
    /// A QR step hit a dependent column and completed `Q` canonically.
    pub breakdown: bool,
}

/// Subspace iteration on `A = H^H H` warm-started at `q0`.
pub fn orthogonal_iteration(h: &CMat, q0: &CMat, n_iter: usize) -> OrthoIterOutput {
    assert!(n_iter >= 1, "at least one iteration is required");
    let a = h.adjoint() * h;
    let mut q = q0.clone();
    let mut r = CMat::zeros(q0.ncols(), q0.ncols());
    let mut breakdown = false;
    for _ in 0..n_iter {
        let qr = thin_qr(&(&a * &q));
        q = qr.q;
        r = qr.r;
        breakdown |= qr.breakdown;
    }
    let d = (0..r.ncols()).map(|i| r[(i, i)].re.max(0.0).sqrt()).collect();
    OrthoIterOutput { v: q, r, d, breakdown }
}

#[derive(Debug, Clone)]
pub struct ReceiveBeamformer {
    pub u: CMat,
    /// Some stream fell below the singularity floor.
    pub degenerate: bool,
}

/// `U = H V diag(D)^{-1}`. Streams with `D` under the floor get a canonical
/// direction orthogonal to the others.
pub fn derive_receive_beamformer(h: &CMat, v: &CMat, d: &[f64]) -> ReceiveBeamformer {
    let nr = h.nrows();
    let max = d.iter().copied().fold(0.0, f64::max);
    let floor = ZF_FLOOR_REL * max;
    let hv = h * v;
    let mut cols: Vec<Option<Vec<C64>>> = d
        .iter()
        .enumerate()
        .map(|(l, &x)| (x > 0.0 && x >= floor).then(|| column(&hv, l).into_iter().map(|z| z / x).collect()))
        .collect();
    let degenerate = cols.iter().any(Option::is_none);
    for l in 0..cols.len() {
        if cols[l].is_none() {
            let basis: Vec<Vec<C64>> = cols.iter().flatten().cloned().collect();
            cols[l] = Some(canonical_completion(nr, &basis));
        }
    }
    let cols: Vec<Vec<C64>> = cols.into_iter().flatten().collect();
    ReceiveBeamformer { u: from_columns(nr, &cols), degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{canonical_columns, frobenius_norm};
    use crate::smoothing::{subspace_distance, svd_decompose};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
        CMat::from_fn(r, c, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn diagonal_one_step() {
        let out = orthogonal_iteration(&diag(&[2.0, 1.0]), &canonical_columns(2, 2), 1);
        assert!(frobenius_norm(&(&out.v - canonical_columns(2, 2))) < 1e-14);
        assert!(frobenius_norm(&(&out.r - diag(&[4.0, 1.0]))) < 1e-14);
        assert_eq!(out.d, vec![2.0, 1.0]);
    }

    #[test]
    fn fixed_point_at_exact_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random(&mut rng, 2, 2);
        let s = svd_decompose(&h, 2);
        let out = orthogonal_iteration(&h, &s.v, 1);
        for l in 0..2 {
            assert!((out.d[l] - s.d[l]).abs() < 1e-10);
            assert!(subspace_distance(&column(&out.v, l), &column(&s.v, l)) < 1e-7);
        }
    }

    #[test]
    fn rank_deficient_breaks_down() {
        let h = diag(&[1.0, 0.0]);
        let out = orthogonal_iteration(&h, &canonical_columns(2, 2), 1);
        assert!(out.breakdown);
        let g = out.v.adjoint() * &out.v;
        assert!(frobenius_norm(&(g - canonical_columns(2, 2))) < 1e-12);
    }

    #[test]
    fn receive_from_exact_triple() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let h = random(&mut rng, 3, 2);
        let s = svd_decompose(&h, 2);
        let rx = derive_receive_beamformer(&h, &s.v, &s.d);
        assert!(!rx.degenerate);
        let m = rx.u.adjoint() * &h * &s.v;
        assert!(frobenius_norm(&(m - diag(&s.d))) < 1e-8);
        let id = derive_receive_beamformer(&diag(&[2.0, 1.0]), &canonical_columns(2, 2), &[2.0, 1.0]);
        assert!(frobenius_norm(&(id.u - canonical_columns(2, 2))) < 1e-15);
    }

    #[test]
    fn receive_below_floor_completes() {
        let h = diag(&[1.0, 0.0]);
        let rx = derive_receive_beamformer(&h, &canonical_columns(2, 2), &[1.0, 0.0]);
        assert!(rx.degenerate);
        assert!(frobenius_norm(&(rx.u - canonical_columns(2, 2))) < 1e-15);
    }
}
