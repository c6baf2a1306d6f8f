use super::sweep::SmoothingMethod;

/// Per-tone operation counts of the orthogonal-iteration smoother.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopsBreakdown {
    pub gram: f64,
    pub multiply: f64,
    pub qr: f64,
    pub receive: f64,
}

impl FlopsBreakdown {
    pub fn orthogonal_iteration(nt: usize, nr: usize, n_iter: usize) -> Self {
        let (t, r, n) = (nt as f64, nr as f64, n_iter as f64);
        Self {
            gram: t * t * r + t * r - 0.5 * t * t - 0.5 * t,
            multiply: (2.0 * t.powi(3) - t * t) * n,
            qr: (4.0 / 3.0) * t.powi(3) * n,
            receive: 2.0 * t * t * r,
        }
    }

    pub fn total(&self) -> f64 {
        self.gram + self.multiply + self.qr + self.receive
    }
}

/// FLOPS per tone, rounded to the nearest integer. Unsmoothed SVD costs the
/// same as the phase-factor method (the direct SVD dominates both).
pub fn flops_estimate(nt: usize, nr: usize, method: SmoothingMethod) -> u64 {
    let total = match method {
        SmoothingMethod::OrthoIter(n) => FlopsBreakdown::orthogonal_iteration(nt, nr, n).total(),
        SmoothingMethod::PhaseFactor | SmoothingMethod::None => {
            let (t, r) = (nt as f64, nr as f64);
            4.0 * t * t * r + 8.0 * t * r * r + 9.0 * r.powi(3)
        }
    };
    total.round() as u64
}
