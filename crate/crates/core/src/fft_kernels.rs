//! FFT-backed primitives: symmetric Toeplitz products through a circulant
//! embedding, and the partial Fourier matrix built from the lowest DFT
//! frequencies.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_bandwidth, check_len, Result, SlepianError};

/// First column of a symmetric Toeplitz matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSymbol {
    col: Vec<f64>,
}

impl ToeplitzSymbol {
    pub fn new(col: Vec<f64>) -> Result<Self> {
        if col.is_empty() {
            return Err(SlepianError::InvalidParameter(
                "Toeplitz symbol must have at least one entry".into(),
            ));
        }
        if col.iter().any(|c| !c.is_finite()) {
            return Err(SlepianError::InvalidParameter(
                "Toeplitz symbol entries must be finite".into(),
            ));
        }
        Ok(Self { col })
    }

    pub fn n(&self) -> usize {
        self.col.len()
    }

    pub fn col(&self) -> &[f64] {
        &self.col
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.col[i.abs_diff(j)])
    }
}

/// `sin(2 pi w m) / (pi m)` with the argument reduced modulo one period.
pub(crate) fn prolate_entry(w: f64, m: usize) -> f64 {
    if m == 0 {
        return 2.0 * w;
    }
    let turns = (w * m as f64).fract();
    (2.0 * PI * turns).sin() / (PI * m as f64)
}

/// Symbol of the prolate matrix `B[m, k] = sin(2 pi w (m - k)) / (pi (m - k))`.
pub fn prolate_symbol(n: usize, w: f64) -> Result<ToeplitzSymbol> {
    if n == 0 {
        return Err(SlepianError::InvalidParameter("n must be positive".into()));
    }
    check_bandwidth(w)?;
    ToeplitzSymbol::new((0..n).map(|m| prolate_entry(w, m)).collect())
}

/// Fast product with a symmetric Toeplitz matrix.
///
/// The matrix is embedded in a circulant of length `fft_len`, the smallest
/// power of two that is at least `2n`.
#[derive(Clone)]
pub struct ToeplitzOperator {
    symbol: ToeplitzSymbol,
    fft_len: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ToeplitzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzOperator")
            .field("n", &self.symbol.n())
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl ToeplitzOperator {
    pub fn new(symbol: ToeplitzSymbol) -> Self {
        let n = symbol.n();
        let fft_len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let mut spectrum = vec![Complex64::new(0.0, 0.0); fft_len];
        let col = symbol.col();
        spectrum[0] = Complex64::new(col[0], 0.0);
        for m in 1..n {
            spectrum[m] = Complex64::new(col[m], 0.0);
            spectrum[fft_len - m] = Complex64::new(col[m], 0.0);
        }
        forward.process(&mut spectrum);
        // fold the 1/L inverse normalization into the stored spectrum
        let scale = 1.0 / fft_len as f64;
        for s in spectrum.iter_mut() {
            *s *= scale;
        }

        Self {
            symbol,
            fft_len,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn prolate(n: usize, w: f64) -> Result<Self> {
        Ok(Self::new(prolate_symbol(n, w)?))
    }

    pub fn n(&self) -> usize {
        self.symbol.n()
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn symbol(&self) -> &ToeplitzSymbol {
        &self.symbol
    }

    /// Spectrum of the circulant embedding, scaled by `1 / fft_len`.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        check_len(n, x.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        buf[..n].copy_from_slice(x);
        self.circular_product(&mut buf);
        buf.truncate(n);
        Ok(buf)
    }

    /// Real input, real output.
    pub fn apply_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(n, x.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.circular_product(&mut buf);
        Ok(buf[..n].iter().map(|c| c.re).collect())
    }

    /// Applies the operator to two real vectors with one complex transform.
    pub fn apply_real_pair(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        check_len(n, x.len())?;
        check_len(n, y.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for i in 0..n {
            buf[i] = Complex64::new(x[i], y[i]);
        }
        self.circular_product(&mut buf);
        Ok((
            buf[..n].iter().map(|c| c.re).collect(),
            buf[..n].iter().map(|c| c.im).collect(),
        ))
    }

    fn circular_product(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= *s;
        }
        self.inverse.process(buf);
    }
}

/// Index of the nearest odd integer to `x`; exact midpoints round upward.
pub fn nearest_odd(x: f64) -> Result<usize> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SlepianError::InvalidParameter(format!(
            "nearest odd integer requested for {x}"
        )));
    }
    let below = 2.0 * ((x - 1.0) / 2.0).floor() + 1.0;
    let above = below + 2.0;
    let pick = if x - below < above - x { below } else { above };
    Ok(pick.max(1.0) as usize)
}

/// The `n x M` matrix whose columns are the unit DFT vectors at the `M`
/// lowest frequencies `k / n`, `|k| <= (M - 1) / 2`, with `M` odd.
#[derive(Clone)]
pub struct PartialFourier {
    n: usize,
    num_cols: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PartialFourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartialFourier")
            .field("n", &self.n)
            .field("num_cols", &self.num_cols)
            .finish()
    }
}

impl PartialFourier {
    pub fn new(n: usize, w: f64) -> Result<Self> {
        if n == 0 {
            return Err(SlepianError::InvalidParameter("n must be positive".into()));
        }
        check_bandwidth(w)?;
        let num_cols = nearest_odd(2.0 * n as f64 * w)?;
        if num_cols > n {
            return Err(SlepianError::InvalidParameter(format!(
                "2nW' = {num_cols} exceeds n = {n}; n too small for w = {w}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            num_cols,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn w_prime(&self) -> f64 {
        self.num_cols as f64 / (2.0 * self.n as f64)
    }

    fn half(&self) -> usize {
        (self.num_cols - 1) / 2
    }

    /// DFT bin of column `j`.
    fn bin(&self, j: usize) -> usize {
        let h = self.half();
        if j >= h {
            j - h
        } else {
            self.n - (h - j)
        }
    }

    /// Frequency `k / n` carried by column `j`.
    pub fn frequency(&self, j: usize) -> f64 {
        (j as f64 - self.half() as f64) / self.n as f64
    }

    /// `F^* x`.
    pub fn adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n, x.len())?;
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        Ok((0..self.num_cols).map(|j| buf[self.bin(j)] * scale).collect())
    }

    /// `F c`.
    pub fn apply(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.num_cols, c.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (j, &cj) in c.iter().enumerate() {
            buf[self.bin(j)] = cj;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / (self.n as f64).sqrt();
        for b in buf.iter_mut() {
            *b *= scale;
        }
        Ok(buf)
    }

    /// `F F^* x`.
    pub fn project(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply(&self.adjoint(x)?)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let scale = 1.0 / (self.n as f64).sqrt();
        DMatrix::from_fn(self.n, self.num_cols, |m, j| {
            let k = self.bin(j);
            // exact integer reduction of the phase m k / n
            let r = (m * k) % self.n;
            Complex64::from_polar(scale, 2.0 * PI * r as f64 / self.n as f64)
        })
    }
}

/// Entry `(m, k)` of `F F^*` as a function of `d = m - k`.
pub fn dirichlet_entry(n: usize, w_prime: f64, d: i64) -> f64 {
    let dm = d.rem_euclid(n as i64);
    if dm == 0 {
        return 2.0 * w_prime;
    }
    let num_cols = (2.0 * n as f64 * w_prime).round();
    let d = dm as f64;
    let nf = n as f64;
    // sin(2 pi W' d) with 2 n W' = num_cols, reduced exactly
    let turns = ((num_cols as i64 * dm) % (2 * n as i64)) as f64 / (2.0 * nf);
    (2.0 * PI * turns).sin() / (nf * (PI * d / nf).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nearest_odd_rounding() {
        assert_eq!(nearest_odd(32.0).unwrap(), 33);
        assert_eq!(nearest_odd(31.2).unwrap(), 31);
        assert_eq!(nearest_odd(31.9).unwrap(), 31);
        assert_eq!(nearest_odd(32.1).unwrap(), 33);
        assert_eq!(nearest_odd(0.3).unwrap(), 1);
        assert_eq!(nearest_odd(2.0).unwrap(), 3);
        assert!(nearest_odd(0.0).is_err());
    }

    #[test]
    fn symbol_rejects_bad_input() {
        assert!(prolate_symbol(0, 0.25).is_err());
        assert!(prolate_symbol(4, 0.5).is_err());
        assert!(prolate_symbol(4, 0.0).is_err());
        assert!(ToeplitzSymbol::new(vec![]).is_err());
        assert!(ToeplitzSymbol::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn two_by_two_example() {
        let op = ToeplitzOperator::prolate(2, 0.25).unwrap();
        let y = op.apply_real(&[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 1.0 / PI, epsilon = 1e-15);
        assert_eq!(op.fft_len(), 4);
    }

    #[test]
    fn dirichlet_matches_dense_projector() {
        let pf = PartialFourier::new(32, 0.25).unwrap();
        let f = pf.to_dense();
        let p = &f * f.adjoint();
        for m in 0..32 {
            for k in 0..32 {
                let d = m as i64 - k as i64;
                assert_abs_diff_eq!(p[(m, k)].re, dirichlet_entry(32, pf.w_prime(), d), epsilon = 1e-13);
                assert_abs_diff_eq!(p[(m, k)].im, 0.0, epsilon = 1e-13);
            }
        }
    }
}
