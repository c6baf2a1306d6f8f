//! Small dense complex linear-algebra helpers shared by the beamforming code.

use std::io::{self, Write};

use crate::{CMat, C64};

/// Relative tolerance under which a Gram-Schmidt residual is treated as zero.
const BREAKDOWN_TOL: f64 = 1e-12;

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral (operator 2-) norm.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Frobenius norm.
pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Inner product `a^H b`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    m.column(j).iter().copied().collect()
}

pub fn set_column(m: &mut CMat, j: usize, v: &[C64]) {
    for (i, z) in v.iter().enumerate() {
        m[(i, j)] = *z;
    }
}

/// Matrix with the given vectors as columns.
pub fn from_columns(rows: usize, cols: &[Vec<C64>]) -> CMat {
    let mut m = CMat::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        set_column(&mut m, j, c);
    }
    m
}

/// First `cols` columns of the identity.
pub fn canonical_columns(rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Removes the components of `v` along the orthonormal vectors `basis`
/// (two passes of classical Gram-Schmidt).
fn project_out(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, v);
            for (x, qi) in v.iter_mut().zip(q) {
                *x -= c * qi;
            }
        }
    }
}

/// Unit vector orthogonal to every vector in `basis`, chosen as the
/// projected canonical basis vector with the largest residual (lowest index
/// on ties).
pub fn canonical_completion(dim: usize, basis: &[Vec<C64>]) -> Vec<C64> {
    let mut best: Option<(f64, Vec<C64>)> = None;
    for i in 0..dim {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[i] = C64::new(1.0, 0.0);
        project_out(&mut e, basis);
        let r = norm(&e);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, e));
        }
    }
    let (r, mut e) = best.expect("dimension must be positive");
    e.iter_mut().for_each(|z| *z /= r);
    e
}

/// Thin QR factorisation with a real, nonnegative diagonal in `R`.
#[derive(Debug, Clone)]
pub struct ThinQr {
    pub q: CMat,
    pub r: CMat,
    /// Set when a column was numerically dependent and `Q` had to be
    /// completed with a canonical direction.
    pub breakdown: bool,
}

/// Modified Gram-Schmidt QR with reorthogonalisation.
pub fn thin_qr(b: &CMat) -> ThinQr {
    let (rows, cols) = b.shape();
    let scale = frobenius_norm(b).max(f64::MIN_POSITIVE);
    let mut q_cols: Vec<Vec<C64>> = Vec::with_capacity(cols);
    let mut r = CMat::zeros(cols, cols);
    let mut breakdown = false;
    for j in 0..cols {
        let mut v = column(b, j);
        for _pass in 0..2 {
            for (i, q) in q_cols.iter().enumerate() {
                let c = inner(q, &v);
                r[(i, j)] += c;
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv <= BREAKDOWN_TOL * scale {
            breakdown = true;
            q_cols.push(canonical_completion(rows, &q_cols));
        } else {
            r[(j, j)] = C64::new(nv, 0.0);
            v.iter_mut().for_each(|z| *z /= nv);
            q_cols.push(v);
        }
    }
    ThinQr { q: from_columns(rows, &q_cols), r, breakdown }
}

/// Writes complex values as interleaved little-endian `f32` pairs
/// (numpy `complex64` layout).
pub fn write_complex64<W: Write>(w: &mut W, values: impl IntoIterator<Item = C64>) -> io::Result<()> {
    for z in values {
        w.write_all(&(z.re as f32).to_le_bytes())?;
        w.write_all(&(z.im as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Reads interleaved little-endian `f32` pairs.
pub fn read_complex64(bytes: &[u8]) -> Vec<C64> {
    bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            C64::new(re as f64, im as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qr_reconstructs_and_is_orthonormal() {
        let b = CMat::from_row_slice(3, 2, &[c(1.0, 2.0), c(0.5, -1.0), c(-0.3, 0.1), c(2.0, 0.0), c(1.0, 1.0), c(0.0, -0.7)]);
        let qr = thin_qr(&b);
        assert!(!qr.breakdown);
        let err = frobenius_norm(&(&qr.q * &qr.r - &b));
        assert!(err < 1e-12, "{err}");
        let gram = qr.q.adjoint() * &qr.q;
        assert!(frobenius_norm(&(gram - canonical_columns(2, 2))) < 1e-12);
        for j in 0..2 {
            assert!(qr.r[(j, j)].im == 0.0 && qr.r[(j, j)].re > 0.0);
        }
    }

    #[test]
    fn qr_breakdown_completes_basis() {
        let b = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let qr = thin_qr(&b);
        assert!(qr.breakdown);
        let gram = qr.q.adjoint() * &qr.q;
        assert!(frobenius_norm(&(gram - canonical_columns(2, 2))) < 1e-12);
    }

    #[test]
    fn complex64_roundtrip() {
        let v = vec![c(1.5, -2.25), c(0.0, 3.0)];
        let mut buf = Vec::new();
        write_complex64(&mut buf, v.iter().copied()).unwrap();
        assert_eq!(buf.len(), 16);
        assert_eq!(read_complex64(&buf), v);
    }
}
