use crate::error::{check_bandwidth, check_tolerance, Result, SlepianError};
use crate::fft_kernels::nearest_odd;

/// Signal length, half-bandwidth, tolerance and subspace dimension.
///
/// `2 n w_prime` is the nearest odd integer to `2 n w`. The eigenvalue
/// condition on `k` is checked when an operator is built, not here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlepianParams {
    pub n: usize,
    pub w: f64,
    pub epsilon: f64,
    pub w_prime: f64,
    pub k: usize,
}

impl SlepianParams {
    pub fn new(n: usize, w: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(SlepianError::InvalidParameter("n must be positive".into()));
        }
        check_bandwidth(w)?;
        check_tolerance(epsilon)?;
        let num_cols = nearest_odd(2.0 * n as f64 * w)?;
        Ok(Self {
            n,
            w,
            epsilon,
            w_prime: num_cols as f64 / (2.0 * n as f64),
            k: default_k(n, w),
        })
    }

    pub fn with_k(mut self, k: usize) -> Result<Self> {
        if k > self.n {
            return Err(SlepianError::InvalidParameter(format!(
                "k = {k} exceeds n = {}",
                self.n
            )));
        }
        self.k = k;
        Ok(self)
    }

    /// `2 n w_prime`, the number of partial Fourier columns.
    pub fn num_cols(&self) -> usize {
        (2.0 * self.n as f64 * self.w_prime).round() as usize
    }
}

/// `round(2 n w)` with ties rounded up.
pub fn default_k(n: usize, w: f64) -> usize {
    ((2.0 * n as f64 * w + 0.5).floor() as usize).min(n)
}

/// Upper bound on the number of eigenvalues in `(eps, 1 - eps)`.
pub fn transition_count_bound(n: usize, eps: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    (8.0 / pi2 * (8.0 * n as f64).ln() + 12.0) * (15.0 / eps).ln()
}

/// Leading-order count of eigenvalues in `(eps, 1 - eps)` for large `n`.
pub fn transition_count_asymptotic(n: usize, eps: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    2.0 / pi2 * (n as f64).ln() * (1.0 / eps - 1.0).ln()
}

/// Rank budget of the low-rank part of `B - F F^*`.
pub fn low_rank_budget(n: usize, eps: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    (4.0 / pi2 * (8.0 * n as f64).ln() + 6.0) * (15.0 / eps).ln()
}

/// Budget on the inner dimension of the compressed factorization.
pub fn k_prime_budget(n: usize, w: f64, eps: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    (2.0 * n as f64 * w).ceil() + (12.0 / pi2 * (8.0 * n as f64).ln() + 18.0) * (15.0 / eps).ln()
}

/// Eigenvalue window `(lower, upper)` of the Tikhonov correction.
pub fn tikhonov_thresholds(eps: f64, alpha: f64) -> (f64, f64) {
    (alpha * (1.0 + alpha) * eps, 1.0 - eps / 3.0)
}

/// Rank budget of the Tikhonov correction.
pub fn tikhonov_rank_budget(n: usize, eps: f64, alpha: f64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    let (lower, _) = tikhonov_thresholds(eps, alpha);
    let floor = lower.min(eps / 3.0);
    (8.0 / pi2 * (8.0 * n as f64).ln() + 12.0) * (15.0 / floor).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = SlepianParams::new(64, 0.25, 1e-3).unwrap();
        assert_eq!(p.k, 32);
        assert_eq!(p.num_cols(), 33);
        assert!((p.w_prime - 33.0 / 128.0).abs() < 1e-15);

        let p = SlepianParams::new(100, 0.1, 1e-3).unwrap();
        assert_eq!(p.num_cols(), 21);
        assert_eq!(p.k, 20);

        assert_eq!(default_k(10, 0.125), 3);
        assert!(SlepianParams::new(64, 0.25, 0.5).is_err());
        assert!(SlepianParams::new(64, 0.25, 1e-3).unwrap().with_k(65).is_err());
    }
}
