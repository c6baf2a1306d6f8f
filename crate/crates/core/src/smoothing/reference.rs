//! Singular vectors with the phase/sign conventions of the reference
//! LAPACK `zgesvd` driver (Householder bidiagonalization followed by the
//! bidiagonal QR sweep), for 2 x 2 channels. This is the output an
//! off-the-shelf numerical package returns; its phases jump between
//! neighbouring tones whenever a Householder sign flips.

use super::svd::{svd_decompose, Svd};
use crate::{CMat, C64};

const EPS: f64 = f64::EPSILON / 2.0;

/// Fortran `SIGN(a, b)`.
fn sign(a: f64, b: f64) -> f64 {
    if b.is_sign_negative() { -a.abs() } else { a.abs() }
}

/// Elementary reflector for a single complex entry: returns `(tau, beta)`
/// with `beta` real, as `zlarfg` with `n = 1`, and for `n = 2` also the
/// scaled tail.
fn reflector(alpha: C64, tail: Option<C64>) -> (C64, f64, Option<C64>) {
    let xnorm = tail.map_or(0.0, |x| x.norm());
    if xnorm == 0.0 && alpha.im == 0.0 {
        return (C64::new(0.0, 0.0), alpha.re, tail);
    }
    let beta = -sign((alpha.norm_sqr() + xnorm * xnorm).sqrt(), alpha.re);
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = (alpha - beta).inv();
    (tau, beta, tail.map(|x| x * scale))
}

/// SVD of the real upper-bidiagonal 2 x 2 matrix `[f g; 0 h]` (`dlasv2`):
/// `(ssmin, ssmax, snr, csr, snl, csl)`.
#[allow(clippy::many_single_char_names)]
fn dlasv2(f: f64, g: f64, h: f64) -> (f64, f64, f64, f64, f64, f64) {
    let (mut ft, mut fa, mut ht, mut ha) = (f, f.abs(), h, h.abs());
    let mut pmax = 1;
    let swap = ha > fa;
    if swap {
        pmax = 3;
        std::mem::swap(&mut ft, &mut ht);
        std::mem::swap(&mut fa, &mut ha);
    }
    let (gt, ga) = (g, g.abs());
    let (ssmin, ssmax, clt, crt, slt, srt);
    if ga == 0.0 {
        (ssmin, ssmax, clt, crt, slt, srt) = (ha, fa, 1.0, 1.0, 0.0, 0.0);
    } else {
        let mut small = true;
        let mut out = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        if ga > fa {
            pmax = 2;
            if fa / ga < EPS {
                small = false;
                let mn = if ha > 1.0 { fa / (ga / ha) } else { (fa / ga) * ha };
                out = (mn, ga, 1.0, ft / gt, ht / gt, 1.0);
            }
        }
        if small {
            let d = fa - ha;
            let l = if d == fa { 1.0 } else { d / fa };
            let m = gt / ft;
            let t = 2.0 - l;
            let (mm, tt) = (m * m, t * t);
            let s = (tt + mm).sqrt();
            let r = if l == 0.0 { m.abs() } else { (l * l + mm).sqrt() };
            let a = 0.5 * (s + r);
            let t = if mm == 0.0 {
                if l == 0.0 { sign(2.0, ft) * sign(1.0, gt) } else { gt / sign(d, ft) + m / t }
            } else {
                (m / (s + t) + m / (r + l)) * (1.0 + a)
            };
            let l = (t * t + 4.0).sqrt();
            let crt = 2.0 / l;
            let srt = t / l;
            out = (ha / a, fa * a, (crt + srt * m) / a, crt, (ht / ft) * srt / a, srt);
        }
        (ssmin, ssmax, clt, crt, slt, srt) = out;
    }
    let (csl, snl, csr, snr) = if swap { (srt, crt, slt, clt) } else { (clt, slt, crt, srt) };
    let tsign = match pmax {
        1 => sign(1.0, csr) * sign(1.0, csl) * sign(1.0, f),
        2 => sign(1.0, snr) * sign(1.0, csl) * sign(1.0, g),
        _ => sign(1.0, snr) * sign(1.0, snl) * sign(1.0, h),
    };
    (
        sign(ssmin, tsign * sign(1.0, f) * sign(1.0, h)),
        sign(ssmax, tsign),
        snr,
        csr,
        snl,
        csl,
    )
}

/// Thin SVD truncated to `streams`, with the reference-library phases for
/// 2 x 2 inputs. Other shapes use [`svd_decompose`].
pub fn reference_svd(h: &CMat, streams: usize) -> Svd {
    if h.shape() != (2, 2) {
        return svd_decompose(h, streams);
    }
    let c = C64::new;
    let one = c(1.0, 0.0);
    // Left reflector on column 1.
    let (tq1, d1, x) = reflector(h[(0, 0)], Some(h[(1, 0)]));
    let v = [one, x.expect("tail")];
    // Apply H1^H to column 2: y - conj(tau) v (v^H y).
    let y = [h[(0, 1)], h[(1, 1)]];
    let vy = v[0].conj() * y[0] + v[1].conj() * y[1];
    let y = [y[0] - tq1.conj() * v[0] * vy, y[1] - tq1.conj() * v[1] * vy];
    // Right reflector on the conjugated superdiagonal entry.
    let (tp1, e1, _) = reflector(y[0].conj(), None);
    let g1 = one - tp1;
    let (tq2, d2, _) = reflector(y[1] * g1, None);
    // Q = H1 H2, P^H = diag(1, conj(G1)).
    let h1 = |i: usize, j: usize| (if i == j { one } else { c(0.0, 0.0) }) - tq1 * v[i] * v[j].conj();
    let h2 = one - tq2;
    let mut u = CMat::from_fn(2, 2, |i, j| if j == 0 { h1(i, 0) } else { h1(i, 1) * h2 });
    let mut vt = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => one,
        (1, 1) => g1.conj(),
        _ => c(0.0, 0.0),
    });
    let mut d = [d1, d2];
    let tol = 10f64.max(100f64.min(EPS.powf(-0.125))) * EPS;
    let mu = if d1.abs() + e1.abs() > 0.0 { d2.abs() * (d1.abs() / (d1.abs() + e1.abs())) } else { 0.0 };
    let thresh = (tol * d1.abs().min(mu) / 2f64.sqrt()).max(24.0 * f64::MIN_POSITIVE);
    if e1.abs() > thresh {
        let (sn, sx, sinr, cosr, sinl, cosl) = dlasv2(d1, e1, d2);
        d = [sx, sn];
        for j in 0..2 {
            let (a, b) = (vt[(0, j)], vt[(1, j)]);
            vt[(0, j)] = a * cosr + b * sinr;
            vt[(1, j)] = b * cosr - a * sinr;
        }
        for i in 0..2 {
            let (a, b) = (u[(i, 0)], u[(i, 1)]);
            u[(i, 0)] = a * cosl + b * sinl;
            u[(i, 1)] = b * cosl - a * sinl;
        }
    }
    for (i, di) in d.iter_mut().enumerate() {
        if *di < 0.0 {
            *di = -*di;
            for j in 0..2 {
                vt[(i, j)] = -vt[(i, j)];
            }
        }
    }
    if d[0] < d[1] {
        d.swap(0, 1);
        vt.swap_rows(0, 1);
        u.swap_columns(0, 1);
    }
    let v = vt.adjoint();
    Svd {
        u: u.columns(0, streams).into_owned(),
        d: d[..streams].to_vec(),
        v: v.columns(0, streams).into_owned(),
    }
}
