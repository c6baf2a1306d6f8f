use super::svd::svd_decompose;
use crate::linalg::{frobenius_norm, singular_values, spectral_norm};
use crate::{CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WedinStatus {
    /// Separation conditions hold; the bound was evaluated.
    Evaluated,
    /// Separation conditions fail for the given `delta`.
    SeparationFailed,
    /// Invalid dimension or delta.
    NotApplicable,
    /// Only singular values were compared.
    WeylOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationDiagnostic {
    /// `||H2 - H1||_2`.
    pub delta_norm: f64,
    /// `|lambda_2^l - lambda_1^l|` for every stream.
    pub singular_value_gaps: Vec<f64>,
    pub separation_delta: Option<f64>,
    /// `sqrt(||sin Theta_V||_F^2 + ||sin Theta_U||_F^2)`.
    pub wedin_lhs: Option<f64>,
    /// Residual bound `sqrt(||R_R||_F^2 + ||R_L||_F^2) / delta`.
    pub wedin_rhs: Option<f64>,
    /// `sqrt(2 l) ||Delta H||_2 / delta`.
    pub wedin_crude_rhs: Option<f64>,
    pub status: WedinStatus,
    pub satisfied: bool,
}

/// Singular values move by at most the spectral norm of the perturbation.
pub fn weyl_check(h1: &CMat, h2: &CMat) -> PerturbationDiagnostic {
    assert_eq!(h1.shape(), h2.shape(), "shapes differ");
    let delta_norm = spectral_norm(&(h2 - h1));
    let s1 = singular_values(h1);
    let s2 = singular_values(h2);
    let gaps: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| (a - b).abs()).collect();
    let satisfied = gaps.iter().all(|g| *g <= delta_norm + 1e-12);
    PerturbationDiagnostic {
        delta_norm,
        singular_value_gaps: gaps,
        separation_delta: None,
        wedin_lhs: None,
        wedin_rhs: None,
        wedin_crude_rhs: None,
        status: WedinStatus::WeylOnly,
        satisfied,
    }
}

/// `||sin Theta(A, B)||_F^2` for matrices with orthonormal columns: the sum of
/// squared sines of the principal angles, `l - ||A^H B||_F^2`.
fn sin_theta_sq(a: &CMat, b: &CMat) -> f64 {
    let c = a.adjoint() * b;
    (a.ncols() as f64 - frobenius_norm(&c).powi(2)).max(0.0)
}

/// Bound on the rotation of the leading `l`-dimensional singular subspaces
/// between `h1` and `h2`, evaluated only when the separation conditions hold
/// for `delta`.
pub fn wedin_check(h1: &CMat, h2: &CMat, l: usize, delta: f64) -> PerturbationDiagnostic {
    let mut diag = weyl_check(h1, h2);
    diag.separation_delta = Some(delta);
    let rank = h1.nrows().min(h1.ncols());
    if l == 0 || l > rank || delta.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        diag.status = WedinStatus::NotApplicable;
        diag.satisfied = false;
        return diag;
    }
    let s1 = singular_values(h1);
    let k = svd_decompose(h2, rank);
    let separated = k.d[l - 1] >= delta
        && (0..l).all(|i| (l..rank).all(|j| (k.d[i] - s1[j]).abs() >= delta));
    if !separated {
        diag.status = WedinStatus::SeparationFailed;
        diag.satisfied = true;
        return diag;
    }
    let prev = svd_decompose(h1, rank);
    let vk = k.v.columns(0, l).into_owned();
    let uk = k.u.columns(0, l).into_owned();
    let vp = prev.v.columns(0, l).into_owned();
    let up = prev.u.columns(0, l).into_owned();
    let lam = CMat::from_diagonal(&nalgebra::DVector::from_iterator(l, k.d[..l].iter().map(|&x| C64::new(x, 0.0))));
    let rr = h1 * &vk - &uk * &lam;
    let rl = h1.adjoint() * &uk - &vk * &lam;
    let lhs = (sin_theta_sq(&vk, &vp) + sin_theta_sq(&uk, &up)).sqrt();
    let rhs = (frobenius_norm(&rr).powi(2) + frobenius_norm(&rl).powi(2)).sqrt() / delta;
    let crude = (2.0 * l as f64).sqrt() * diag.delta_norm / delta;
    diag.wedin_lhs = Some(lhs);
    diag.wedin_rhs = Some(rhs);
    diag.wedin_crude_rhs = Some(crude);
    diag.status = WedinStatus::Evaluated;
    diag.satisfied = diag.satisfied && lhs <= rhs + 1e-10 && rhs <= crude + 1e-10;
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
    }

    #[test]
    fn identical_inputs() {
        let h = diag(&[3.0, 1.0]);
        let w = weyl_check(&h, &h);
        assert_eq!(w.delta_norm, 0.0);
        assert!(w.singular_value_gaps.iter().all(|g| *g == 0.0));
        assert!(w.satisfied);
        let d = wedin_check(&h, &h, 1, 1.0);
        assert_eq!(d.status, WedinStatus::Evaluated);
        assert!(d.wedin_lhs.unwrap() < 1e-12);
        assert!(d.satisfied);
    }

    #[test]
    fn identity_shift() {
        let h = diag(&[3.0, 1.0]);
        let eps = 0.01;
        let h2 = &h + diag(&[eps, eps]);
        let w = weyl_check(&h, &h2);
        assert!(w.singular_value_gaps.iter().all(|g| *g <= eps + 1e-15));
    }

    #[test]
    fn off_diagonal_perturbation() {
        let h = diag(&[3.0, 1.0]);
        let mut h2 = h.clone();
        h2[(0, 1)] = C64::new(0.05, 0.02);
        h2[(1, 0)] = C64::new(-0.03, 0.01);
        let d = wedin_check(&h, &h2, 1, 1.0);
        assert_eq!(d.status, WedinStatus::Evaluated);
        assert!(d.wedin_lhs.unwrap() > 0.0);
        assert!(d.satisfied, "{d:?}");
    }

    #[test]
    fn separation_and_dimension_guards() {
        let h = diag(&[1.0, 0.99]);
        assert_eq!(wedin_check(&h, &h, 1, 0.5).status, WedinStatus::SeparationFailed);
        assert_eq!(wedin_check(&h, &h, 3, 0.5).status, WedinStatus::NotApplicable);
    }
}
