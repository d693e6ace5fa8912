//! Slepian vectors and eigenvalues.
//!
//! Vectors come from the symmetric tridiagonal matrix that commutes with the
//! prolate matrix: bisection on Sturm counts locates each tridiagonal
//! eigenvalue and inverse iteration produces the vector. The prolate
//! eigenvalue is then recovered from the vector itself.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{check_bandwidth, check_len, check_tolerance, Result, SlepianError};
use crate::fft_kernels::{prolate_symbol, ToeplitzOperator};
use crate::params::{default_k, SlepianParams};
use crate::quadrature::panel_rule;

/// Largest `n` accepted by the dense eigendecomposition oracle.
pub const DENSE_GUARD: usize = 4096;

/// Eigenvalues below this are recomputed from the band energy of the vector.
pub const REFINE_BELOW: f64 = 1e-3;

/// Longest vector for which band-energy refinement is attempted.
pub const BAND_ENERGY_MAX_N: usize = 16384;

const CLAMP_TOL: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-12;
const INVERSE_ITERATIONS: usize = 3;
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// `diag[m] = ((n - 1 - 2m) / 2)^2 * cos_w` up to rounding.
    cos_w: f64,
}

/// The tridiagonal matrix commuting with the `n x n` prolate matrix.
pub fn build_commuting_tridiagonal(n: usize, w: f64) -> Result<SymTridiagonal> {
    if n == 0 {
        return Err(SlepianError::InvalidParameter("n must be positive".into()));
    }
    check_bandwidth(w)?;
    let c = (2.0 * PI * w).cos();
    let diag = (0..n)
        .map(|m| {
            let h = (n as f64 - 1.0 - 2.0 * m as f64) / 2.0;
            h * h * c
        })
        .collect();
    let off = (0..n.saturating_sub(1))
        .map(|m| (m as f64 + 1.0) * (n as f64 - 1.0 - m as f64) / 2.0)
        .collect();
    Ok(SymTridiagonal { diag, off, cos_w: c })
}

impl SymTridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            t[(i, i + 1)] = e;
            t[(i + 1, i)] = e;
        }
        t
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::EPSILON * self.scale() * 1e-3;
        let mut count = 0;
        let mut d = self.diag[0] - x;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
        for i in 1..self.n() {
            let e = self.off[i - 1];
            d = (self.diag[i] - x) - e * e / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue `idx` in descending order, by bisection.
    pub fn eigenvalue_desc(&self, idx: usize) -> Result<f64> {
        let n = self.n();
        if idx >= n {
            return Err(SlepianError::InvalidParameter(format!(
                "eigenvalue index {idx} out of range for n = {n}"
            )));
        }
        let target = n - 1 - idx;
        let (g_lo, g_hi) = self.gershgorin();
        let pad = f64::EPSILON * self.scale() * 4.0 + f64::MIN_POSITIVE;
        let mut lo = g_lo - pad;
        let mut hi = g_hi + pad;
        let tol = 2.0 * f64::EPSILON * self.scale();
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for the eigenvalue closest to `mu`, by inverse
    /// iteration on a pivoted LU factorization of `T - mu I`.
    pub fn eigenvector(&self, mu: f64) -> Vec<f64> {
        let n = self.n();
        if n == 1 {
            return vec![1.0];
        }
        let lu = ShiftedLu::new(self, mu);
        let golden = 0.618_033_988_749_894_8;
        let mut x: Vec<f64> = (0..n)
            .map(|i| ((i as f64 + 1.0) * golden).fract() - 0.5)
            .collect();
        normalize(&mut x);
        for _ in 0..INVERSE_ITERATIONS {
            lu.solve(&mut x);
            normalize(&mut x);
        }
        for _ in 0..REFINEMENT_STEPS {
            self.refine(&mut x, &lu);
        }
        fix_sign(&mut x);
        x
    }

    /// One correction step `v <- v - (T - mu I)^+ r` with the residual
    /// `r = T v - mu v` evaluated in double-double arithmetic.
    ///
    /// Inverse iteration alone leaves errors of order `u ||T|| / gap`. The
    /// entries `h^2 cos(2 pi w)` are formed as exact products so the residual
    /// refers to one fixed matrix.
    fn refine(&self, v: &mut [f64], lu: &ShiftedLu) {
        let n = self.n();
        let tv: Vec<DoubleDouble> = (0..n)
            .map(|m| {
                let h = (n as f64 - 1.0 - 2.0 * m as f64) / 2.0;
                let d = two_prod(h * h, self.cos_w);
                let mut acc = DoubleDouble::ZERO;
                acc.add_prod(d.hi, v[m]);
                acc.add_prod(d.lo, v[m]);
                if m > 0 {
                    acc.add_prod(self.off[m - 1], v[m - 1]);
                }
                if m + 1 < n {
                    acc.add_prod(self.off[m], v[m + 1]);
                }
                acc
            })
            .collect();
        let mu: f64 = v.iter().zip(&tv).map(|(a, b)| a * b.value()).sum();
        let mut r: Vec<f64> = tv
            .into_iter()
            .zip(v.iter())
            .map(|(mut acc, &vm)| {
                acc.add_prod(-mu, vm);
                acc.value()
            })
            .collect();
        project_out(&mut r, v);
        lu.solve(&mut r);
        project_out(&mut r, v);
        for (vi, xi) in v.iter_mut().zip(&r) {
            *vi -= xi;
        }
        normalize(v);
    }
}

/// `x <- x - v (v^T x)` for unit `v`.
fn project_out(x: &mut [f64], v: &[f64]) {
    let along: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= along * vi;
    }
}

/// Unevaluated sum `hi + lo`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = fast_two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    fn add_prod(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        self.add(p);
        self.lo += e;
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    DoubleDouble {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

/// `T - mu I = P L U` for tridiagonal `T`, with `U` carrying two
/// superdiagonals.
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &SymTridiagonal, mu: f64) -> Self {
        let n = t.n();
        let tiny = f64::EPSILON * t.scale();
        let mut d: Vec<f64> = t.diag.iter().map(|&a| a - mu).collect();
        let mut du = t.off.clone();
        let dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut mult = vec![0.0; n - 1];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                mult[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                mult[i] = fact;
                swapped[i] = true;
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
            }
        }
        if d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        Self {
            d,
            du,
            du2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Makes the first entry above the sign tolerance positive.
pub fn fix_sign(x: &mut [f64]) {
    if let Some(&first) = x.iter().find(|v| v.abs() > SIGN_TOL) {
        if first < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn clamp_unit(lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda < -CLAMP_TOL || lambda > 1.0 + CLAMP_TOL {
        return Err(SlepianError::Numerical(format!(
            "eigenvalue {lambda} lies outside [0, 1]"
        )));
    }
    Ok(lambda.clamp(0.0, 1.0))
}

/// `v^T B v` through the fast Toeplitz product, clamped into [0, 1].
pub fn rayleigh_lambda(v: &[f64], b_op: &ToeplitzOperator) -> Result<f64> {
    check_len(b_op.n(), v.len())?;
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(SlepianError::InvalidParameter(format!(
            "expected a unit vector, got norm {}",
            norm2.sqrt()
        )));
    }
    let bv = b_op.apply_real(v)?;
    clamp_unit(v.iter().zip(&bv).map(|(a, b)| a * b).sum())
}

/// `2 * integral_0^w |V(f)|^2 df` where `V` is the DTFT of `v`.
///
/// Equals `v^T B v` but keeps relative accuracy for eigenvalues far below
/// machine epsilon. Each Gauss-Legendre panel spans at most 12 / (pi (n-1))
/// in frequency. Phases are reduced exactly, so every term is accurate to a
/// few ulps regardless of `n`.
pub fn band_energy(v: &[f64], w: f64) -> f64 {
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    let (gx, gw) = panel_rule();
    let span = if n > 1 { 12.0 / (PI * (n - 1) as f64) } else { w };
    let panels = (w / span).ceil().max(1.0) as usize;
    let half = 0.5 * w / panels as f64;

    const BLOCK: usize = 64;
    let blocks = n.div_ceil(BLOCK);
    let mut lo_tab = vec![Complex64::new(0.0, 0.0); BLOCK];
    let mut hi_tab = vec![Complex64::new(0.0, 0.0); blocks];

    let mut total = 0.0;
    for p in 0..panels {
        let mid = (2 * p + 1) as f64 * half;
        let mut panel = 0.0;
        for (x, wt) in gx.iter().zip(gw) {
            let f = mid + half * x;
            for (k, t) in lo_tab.iter_mut().enumerate() {
                *t = unit_phase(f, k);
            }
            for (b, t) in hi_tab.iter_mut().enumerate() {
                *t = unit_phase(f, b * BLOCK);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, chunk) in v.chunks(BLOCK).enumerate() {
                let mut inner = Complex64::new(0.0, 0.0);
                for (vk, t) in chunk.iter().zip(&lo_tab) {
                    inner += t * *vk;
                }
                acc += hi_tab[b] * inner;
            }
            panel += wt * acc.norm_sqr();
        }
        total += panel * half;
    }
    2.0 * total
}

/// `exp(-2 pi i f k)` with `f k` reduced modulo one using an exact product.
fn unit_phase(f: f64, k: usize) -> Complex64 {
    let kf = k as f64;
    let p = f * kf;
    let err = f.mul_add(kf, -p);
    let turns = (p - p.floor()) + err;
    let (s, c) = (2.0 * PI * turns).sin_cos();
    Complex64::new(c, -s)
}

/// Eigenvalues `lambda_k` with `lower < lambda_k < upper`, split at `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionEigenSet {
    pub n: usize,
    pub w: f64,
    pub lower: f64,
    pub upper: f64,
    pub k: usize,
    pub below_k: Vec<EigenPair>,
    pub at_or_above_k: Vec<EigenPair>,
}

impl TransitionEigenSet {
    pub fn len(&self) -> usize {
        self.below_k.len() + self.at_or_above_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &EigenPair> {
        self.below_k.iter().chain(&self.at_or_above_k)
    }
}

/// Computes and caches selected Slepian eigenpairs of one `(n, w)`.
#[derive(Debug, Clone)]
pub struct DpssSolver {
    w: f64,
    tri: SymTridiagonal,
    b_op: ToeplitzOperator,
    cache: BTreeMap<usize, EigenPair>,
}

impl DpssSolver {
    pub fn new(n: usize, w: f64) -> Result<Self> {
        Ok(Self {
            w,
            tri: build_commuting_tridiagonal(n, w)?,
            b_op: ToeplitzOperator::new(prolate_symbol(n, w)?),
            cache: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.tri.n()
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn b_op(&self) -> &ToeplitzOperator {
        &self.b_op
    }

    pub fn tridiagonal(&self) -> &SymTridiagonal {
        &self.tri
    }

    /// Eigenvalue of a unit vector from the Slepian family.
    pub fn lambda_of(&self, v: &[f64]) -> Result<f64> {
        let lambda = rayleigh_lambda(v, &self.b_op)?;
        if lambda < REFINE_BELOW && v.len() <= BAND_ENERGY_MAX_N {
            clamp_unit(band_energy(v, self.w))
        } else {
            Ok(lambda)
        }
    }

    /// Eigenpair `idx` in descending eigenvalue order.
    pub fn eigenpair(&mut self, idx: usize) -> Result<&EigenPair> {
        if !self.cache.contains_key(&idx) {
            let mu = self.tri.eigenvalue_desc(idx)?;
            let vector = self.tri.eigenvector(mu);
            let lambda = self.lambda_of(&vector)?;
            self.cache.insert(
                idx,
                EigenPair {
                    lambda,
                    vector,
                    index: idx,
                },
            );
        }
        Ok(&self.cache[&idx])
    }

    pub fn lambda(&mut self, idx: usize) -> Result<f64> {
        Ok(self.eigenpair(idx)?.lambda)
    }

    /// All eigenpairs with `lower < lambda < upper`, in index order.
    ///
    /// The search starts at `round(2 n w)` and walks outward until it meets
    /// an eigenvalue `>= upper` below and `<= lower` above.
    pub fn window(&mut self, lower: f64, upper: f64) -> Result<Vec<EigenPair>> {
        let n = self.n();
        if !(lower < upper) {
            return Ok(Vec::new());
        }
        let center = default_k(n, self.w).min(n - 1);
        let mut below = Vec::new();
        for idx in (0..center).rev() {
            let pair = self.eigenpair(idx)?;
            if pair.lambda >= upper {
                break;
            }
            if pair.lambda > lower {
                below.push(pair.clone());
            }
        }
        below.reverse();
        for idx in center..n {
            let pair = self.eigenpair(idx)?;
            if pair.lambda <= lower {
                break;
            }
            if pair.lambda < upper {
                below.push(pair.clone());
            }
        }
        Ok(below)
    }

    /// Eigenpairs with `eps < lambda < 1 - eps`, split at `k`.
    pub fn transition(&mut self, eps: f64, k: usize) -> Result<TransitionEigenSet> {
        check_tolerance(eps)?;
        let n = self.n();
        if k > n {
            return Err(SlepianError::InvalidParameter(format!(
                "k = {k} exceeds n = {n}"
            )));
        }
        if k > 0 {
            let lam = self.lambda(k - 1)?;
            if lam <= eps {
                return Err(SlepianError::PreconditionViolated(format!(
                    "lambda_{} = {lam:e} is not above eps = {eps:e}",
                    k - 1
                )));
            }
        }
        if k < n {
            let lam = self.lambda(k)?;
            if lam >= 1.0 - eps {
                return Err(SlepianError::PreconditionViolated(format!(
                    "lambda_{k} = {lam:e} is not below 1 - eps"
                )));
            }
        }
        let pairs = self.window(eps, 1.0 - eps)?;
        let (below_k, at_or_above_k) = pairs.into_iter().partition(|p| p.index < k);
        Ok(TransitionEigenSet {
            n,
            w: self.w,
            lower: eps,
            upper: 1.0 - eps,
            k,
            below_k,
            at_or_above_k,
        })
    }

    /// Number of eigenvalues `>= threshold`.
    pub fn count_at_least(&mut self, threshold: f64) -> Result<usize> {
        let n = self.n();
        let mut idx = default_k(n, self.w).min(n - 1);
        if self.lambda(idx)? >= threshold {
            while idx + 1 < n && self.lambda(idx + 1)? >= threshold {
                idx += 1;
            }
            Ok(idx + 1)
        } else {
            while idx > 0 && self.lambda(idx - 1)? < threshold {
                idx -= 1;
            }
            Ok(idx)
        }
    }
}

/// Transition eigenpairs for `params`, split at `params.k`.
pub fn transition_eigenpairs(params: &SlepianParams) -> Result<TransitionEigenSet> {
    DpssSolver::new(params.n, params.w)?.transition(params.epsilon, params.k)
}

/// Full Slepian basis from a dense eigendecomposition of the prolate matrix.
#[derive(Debug, Clone)]
pub struct DenseSlepian {
    /// Columns are the Slepian vectors in descending eigenvalue order.
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

pub fn dense_slepian_basis(n: usize, w: f64) -> Result<DenseSlepian> {
    if n > DENSE_GUARD {
        return Err(SlepianError::GuardExceeded {
            n,
            guard: DENSE_GUARD,
        });
    }
    let b = prolate_symbol(n, w)?.to_dense();
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut col);
        vectors.set_column(dst, &nalgebra::DVector::from_vec(col));
        values.push(eig.eigenvalues[src]);
    }
    Ok(DenseSlepian { vectors, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let t = build_commuting_tridiagonal(1, 0.3).unwrap();
        assert_eq!(t.diag, vec![0.0]);
        assert!(t.off.is_empty());
        let mut s = DpssSolver::new(1, 0.3).unwrap();
        let p = s.eigenpair(0).unwrap();
        assert_eq!(p.vector, vec![1.0]);
        assert!((p.lambda - 0.6).abs() < 1e-15);
    }

    #[test]
    fn sturm_counts_match_dense() {
        let t = build_commuting_tridiagonal(40, 0.2).unwrap();
        let eig = SymmetricEigen::new(t.to_dense());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (i, &e) in ev.iter().enumerate() {
            let got = t.eigenvalue_desc(i).unwrap();
            assert!((got - e).abs() <= 1e-9 * e.abs().max(1.0), "{i}: {got} vs {e}");
        }
    }

    #[test]
    fn two_point_closed_form() {
        let d = dense_slepian_basis(2, 0.25).unwrap();
        assert!((d.values[0] - (0.5 + 1.0 / PI)).abs() < 1e-15);
        assert!((d.values[1] - (0.5 - 1.0 / PI)).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_rejects_non_unit() {
        let op = ToeplitzOperator::prolate(4, 0.25).unwrap();
        assert!(rayleigh_lambda(&[1.0, 1.0, 0.0, 0.0], &op).is_err());
    }
}
