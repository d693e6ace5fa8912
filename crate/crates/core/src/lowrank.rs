//! Low-rank factors: the CF-ADI Hilbert factor, truncated Taylor factors,
//! the assembled correction `B - F F^* ~ L1 L2^H`, and the eigenvalue-window
//! corrections used by the fast operators.

use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::dpss::{EigenPair, TransitionEigenSet};
use crate::error::{check_len, check_tolerance, Result, SlepianError};
use crate::params::SlepianParams;

/// `left * right^H`, both `n x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankFactor<T: nalgebra::Scalar> {
    pub left: DMatrix<T>,
    pub right: DMatrix<T>,
}

impl<T> LowRankFactor<T>
where
    T: ComplexField + Copy,
{
    pub fn new(left: DMatrix<T>, right: DMatrix<T>) -> Result<Self> {
        if left.shape() != right.shape() {
            return Err(SlepianError::InvalidParameter(format!(
                "factor shapes differ: {:?} vs {:?}",
                left.shape(),
                right.shape()
            )));
        }
        Ok(Self { left, right })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            left: DMatrix::zeros(n, 0),
            right: DMatrix::zeros(n, 0),
        }
    }

    pub fn n(&self) -> usize {
        self.left.nrows()
    }

    pub fn rank(&self) -> usize {
        self.left.ncols()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        &self.left * self.right.adjoint()
    }

    /// `right^H x`.
    pub fn compress(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.n(), x.len())?;
        let xv = DVector::from_column_slice(x);
        Ok(self.right.ad_mul(&xv).as_slice().to_vec())
    }

    /// `left c`.
    pub fn expand(&self, c: &[T]) -> Result<Vec<T>> {
        check_len(self.rank(), c.len())?;
        let cv = DVector::from_column_slice(c);
        Ok((&self.left * cv).as_slice().to_vec())
    }

    /// `left (right^H x)`.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.expand(&self.compress(x)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    Elliptic,
    LogSpaced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiConfig {
    pub a: f64,
    pub b: f64,
    pub r: usize,
    pub shifts: Vec<f64>,
    pub mode: ShiftMode,
}

impl AdiConfig {
    /// Shifts for `[a, b]` with the iteration count that guarantees
    /// `max |phi|^2 <= delta`.
    pub fn new(a: f64, b: f64, delta: f64, mode: ShiftMode) -> Result<Self> {
        if !(a > 0.0 && a <= b) {
            return Err(SlepianError::InvalidParameter(format!(
                "need 0 < a <= b, got a = {a}, b = {b}"
            )));
        }
        let r = adi_rank(b / a, delta)?;
        let shifts = adi_shifts(a, b, r, mode)?;
        Ok(Self {
            a,
            b,
            r,
            shifts,
            mode,
        })
    }
}

/// `ceil(ln(4 kappa) ln(4 / delta) / pi^2)`.
pub fn adi_rank(kappa: f64, delta: f64) -> Result<usize> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(SlepianError::InvalidParameter(format!(
            "condition number must be >= 1, got {kappa}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(SlepianError::InvalidParameter(format!(
            "ADI tolerance must lie in (0, 1], got {delta}"
        )));
    }
    let r = ((4.0 * kappa).ln() * (4.0 / delta).ln() / (PI * PI)).ceil();
    Ok((r as usize).max(1))
}

/// ADI shift parameters `p_1 .. p_r`, all in `[a, b]`.
pub fn adi_shifts(a: f64, b: f64, r: usize, mode: ShiftMode) -> Result<Vec<f64>> {
    if !(a > 0.0 && a <= b && b.is_finite()) {
        return Err(SlepianError::InvalidParameter(format!(
            "need 0 < a <= b, got a = {a}, b = {b}"
        )));
    }
    if r == 0 {
        return Err(SlepianError::InvalidParameter("ADI rank must be >= 1".into()));
    }
    if a == b {
        return Ok(vec![a; r]);
    }
    let two_r = 2.0 * r as f64;
    let shifts = match mode {
        ShiftMode::LogSpaced => (1..=r)
            .map(|k| {
                let t = (2 * k - 1) as f64 / two_r;
                a.powf(t) * b.powf(1.0 - t)
            })
            .collect(),
        ShiftMode::Elliptic => {
            let kp = a / b;
            let big_k = elliptic_k_from_complement(kp);
            (1..=r)
                .map(|k| {
                    let t = (2 * k - 1) as f64 / two_r;
                    (b * jacobi_dn(t * big_k, kp)).clamp(a, b)
                })
                .collect()
        }
    };
    Ok(shifts)
}

/// Complete elliptic integral `K(k)` given the complementary modulus
/// `k' = sqrt(1 - k^2)`, by the arithmetic-geometric mean.
pub fn elliptic_k_from_complement(kp: f64) -> f64 {
    let mut a = 1.0;
    let mut b = kp;
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Jacobi `dn(u, k)` with `k' = sqrt(1 - k^2)`, by the descending Landen
/// (AGM) sequence.
pub fn jacobi_dn(u: f64, kp: f64) -> f64 {
    if kp >= 1.0 {
        return 1.0;
    }
    let k = ((1.0 - kp) * (1.0 + kp)).sqrt();
    let mut a = vec![1.0];
    let mut c = vec![k];
    let mut b = kp;
    while c.len() < 64 {
        let last = *a.last().unwrap();
        let cn = 0.5 * (last - b);
        let an = 0.5 * (last + b);
        b = (last * b).sqrt();
        a.push(an);
        c.push(cn);
        if cn.abs() <= f64::EPSILON * an {
            break;
        }
    }
    let steps = a.len() - 1;
    let big_k = PI / (2.0 * a[steps]);
    // dn is even with period 2K, and dn(K - u) dn(u) = k'
    let mut u = u.abs() % (2.0 * big_k);
    if u > big_k {
        u = 2.0 * big_k - u;
    }
    if u > 0.5 * big_k {
        return kp / landen_dn(big_k - u, &a, &c);
    }
    landen_dn(u, &a, &c)
}

fn landen_dn(u: f64, a: &[f64], c: &[f64]) -> f64 {
    let steps = a.len() - 1;
    if steps == 0 {
        return 1.0;
    }
    let mut phi = 2f64.powi(steps as i32) * a[steps] * u;
    let mut prev = phi;
    for i in (1..=steps).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    phi.cos() / (prev - phi).cos()
}

/// `prod_j (x - p_j) / (x + p_j)`.
pub fn adi_phi(x: f64, shifts: &[f64]) -> f64 {
    shifts.iter().map(|&p| (x - p) / (x + p)).product()
}

/// Low-rank CF-ADI factor `Z` of the solution of `A X + X A = B B^T` for
/// diagonal `A` and a single column `B`.
pub fn cfadi_solve(a_diag: &[f64], b_col: &[f64], shifts: &[f64]) -> Result<DMatrix<f64>> {
    check_len(a_diag.len(), b_col.len())?;
    if a_diag.iter().any(|&a| !(a > 0.0)) {
        return Err(SlepianError::InvalidParameter(
            "diagonal of A must be positive".into(),
        ));
    }
    if shifts.iter().any(|&p| !(p > 0.0)) {
        return Err(SlepianError::InvalidParameter("shifts must be positive".into()));
    }
    let n = a_diag.len();
    let r = shifts.len();
    let mut z = DMatrix::zeros(n, r);
    if r == 0 {
        return Ok(z);
    }
    let p1 = shifts[0];
    let s = (2.0 * p1).sqrt();
    for i in 0..n {
        z[(i, 0)] = s * b_col[i] / (a_diag[i] + p1);
    }
    for k in 1..r {
        let (p, q) = (shifts[k], shifts[k - 1]);
        let s = (p / q).sqrt();
        for i in 0..n {
            // (I - (p + q)(A + p)^{-1}) reduces to (a - q) / (a + p)
            z[(i, k)] = s * (a_diag[i] - q) / (a_diag[i] + p) * z[(i, k - 1)];
        }
    }
    Ok(z)
}

/// `Z` with `|| H - Z Z^T || <= delta_h` for the `n x n` Hilbert matrix
/// `H[m, k] = 1 / (m + k + 1)`.
pub fn hilbert_factor(n: usize, delta_h: f64) -> Result<DMatrix<f64>> {
    hilbert_factor_with(n, delta_h, ShiftMode::Elliptic)
}

pub fn hilbert_factor_with(n: usize, delta_h: f64, mode: ShiftMode) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(SlepianError::InvalidParameter("n must be positive".into()));
    }
    if !(delta_h > 0.0) {
        return Err(SlepianError::InvalidParameter(format!(
            "Hilbert tolerance must be positive, got {delta_h}"
        )));
    }
    // ||H|| <= pi, so the relative tolerance is delta_h / pi
    let delta = (delta_h / PI).min(1.0);
    let a = 0.5;
    let b = n as f64 - 0.5;
    let cfg = AdiConfig::new(a, b, delta, mode)?;
    let diag: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    cfadi_solve(&diag, &vec![1.0; n], &cfg.shifts)
}

/// `zeta(2k)`.
pub fn zeta_even(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(SlepianError::InvalidParameter("zeta_even needs k >= 1".into()));
    }
    Ok(1.0 + zeta_even_tail(k))
}

/// `zeta(2k) - 1`.
fn zeta_even_tail(k: usize) -> f64 {
    match k {
        1 => PI.powi(2) / 6.0 - 1.0,
        2 => PI.powi(4) / 90.0 - 1.0,
        3 => PI.powi(6) / 945.0 - 1.0,
        4 => PI.powi(8) / 9450.0 - 1.0,
        _ => {
            let p = 2 * k as i32;
            // tail after m terms is below m^(1 - 2k) / (2k - 1)
            let mut m = 2usize;
            while (m as f64).powi(1 - p) / (p - 1) as f64 > 1e-17 && m < 1_000_000 {
                m += 1;
            }
            (2..=m).rev().map(|j| (j as f64).powi(-p)).sum()
        }
    }
}

fn binomial_row(d: usize) -> Vec<f64> {
    let mut row = vec![1.0; d + 1];
    for j in 1..=d {
        row[j] = row[j - 1] * (d + 1 - j) as f64 / j as f64;
    }
    row
}

/// `V C V^T` with normalized monomials `V[m, j] = (m / n)^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorFactor {
    pub v: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// Number of series terms kept.
    pub terms: usize,
}

impl TaylorFactor {
    fn from_terms(n: usize, degrees: &[(usize, f64)], terms: usize) -> Self {
        let cols = degrees.iter().map(|&(d, _)| d + 1).max().unwrap_or(0);
        let nf = n as f64;
        let v = DMatrix::from_fn(n, cols, |m, j| (m as f64 / nf).powi(j as i32));
        let mut c = DMatrix::zeros(cols, cols);
        // ((m - l) / n)^d = sum_j binom(d, j) (m / n)^j (-l / n)^(d - j)
        for &(d, coef) in degrees {
            let row = binomial_row(d);
            for j in 0..=d {
                let sign = if (d - j) % 2 == 0 { 1.0 } else { -1.0 };
                c[(j, d - j)] += coef * row[j] * sign;
            }
        }
        Self { v, c, terms }
    }

    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.v * &self.c * self.v.transpose()
    }

    /// Factor pair `(V, V C^T)`.
    pub fn to_low_rank(&self) -> LowRankFactor<f64> {
        LowRankFactor {
            left: self.v.clone(),
            right: &self.v * self.c.transpose(),
        }
    }
}

pub fn taylor_rank_a1(delta_a: f64) -> usize {
    let r = ((2.0 / (3.0 * PI * delta_a)).ln() / (2.0 * 2f64.ln())).ceil();
    r.max(0.0) as usize
}

pub fn taylor_rank_b0(delta_b: f64) -> usize {
    let r = ((3.0 / (2.0 * delta_b)).ln() / (2.0 * (6.0 / PI).ln())).ceil();
    r.max(1.0) as usize
}

/// Truncated odd series for the smooth remainder
/// `A1[m, l] = 1/(pi d) - 1/(n sin(pi d / n)) - 1/(pi (d + n)) - 1/(pi (d - n))`,
/// `d = m - l`.
pub fn taylor_factor_a1(n: usize, delta_a: f64) -> Result<TaylorFactor> {
    if !(delta_a > 0.0 && delta_a < 8.0 / (3.0 * PI)) {
        return Err(SlepianError::InvalidParameter(format!(
            "delta_A must lie in (0, 8/(3 pi)), got {delta_a}"
        )));
    }
    let r_a = taylor_rank_a1(delta_a);
    let scale = 2.0 / (n as f64 * PI);
    let degrees: Vec<(usize, f64)> = (1..=r_a)
        .map(|k| {
            let z = zeta_even_tail(k);
            // 1 - (1 - 2^(1-2k)) zeta(2k), rearranged to avoid cancellation
            let coef = 2f64.powi(1 - 2 * k as i32) * (1.0 + z) - z;
            (2 * k - 1, scale * coef)
        })
        .collect();
    Ok(TaylorFactor::from_terms(n, &degrees, r_a))
}

/// Truncated even series for
/// `B0[m, l] = 2 sin(pi (w - w') d) / (pi d)`, `d = m - l`.
pub fn taylor_factor_b0(n: usize, w: f64, w_prime: f64, delta_b: f64) -> Result<TaylorFactor> {
    if (2.0 * n as f64 * (w_prime - w)).abs() > 1.0 + 1e-12 {
        return Err(SlepianError::InvalidParameter(format!(
            "|2 n (w' - w)| must not exceed 1 (n = {n}, w = {w}, w' = {w_prime})"
        )));
    }
    if !(delta_b > 0.0 && delta_b < 1.5) {
        return Err(SlepianError::InvalidParameter(format!(
            "delta_B must lie in (0, 3/2), got {delta_b}"
        )));
    }
    let r_b = taylor_rank_b0(delta_b);
    if w == w_prime {
        return Ok(TaylorFactor {
            v: DMatrix::zeros(n, 0),
            c: DMatrix::zeros(0, 0),
            terms: 0,
        });
    }
    let nf = n as f64;
    let s = PI * (w - w_prime) * nf;
    let mut degrees = Vec::with_capacity(r_b);
    let mut term = 2.0 / (nf * PI) * s;
    for k in 0..r_b {
        degrees.push((2 * k, term));
        let a = (2 * k + 2) as f64;
        term *= -s * s / (a * (a + 1.0));
    }
    Ok(TaylorFactor::from_terms(n, &degrees, r_b))
}

/// Dense `A1` (zero diagonal).
pub fn dense_a1(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |m, l| {
        if m == l {
            return 0.0;
        }
        let d = m as f64 - l as f64;
        1.0 / (PI * d) - 1.0 / (nf * (PI * d / nf).sin()) - 1.0 / (PI * (d + nf)) - 1.0 / (PI * (d - nf))
    })
}

/// Dense `B0`.
pub fn dense_b0(n: usize, w: f64, w_prime: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |m, l| {
        if m == l {
            return 2.0 * (w - w_prime);
        }
        let d = m as f64 - l as f64;
        2.0 * (PI * (w - w_prime) * d).sin() / (PI * d)
    })
}

/// Tolerance split of the three pieces of the `B - F F^*` correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBudget {
    pub hilbert: f64,
    pub a1: f64,
    pub b0: f64,
}

impl DeltaBudget {
    pub fn for_tolerance(eps: f64) -> Self {
        Self {
            hilbert: 4.0 * PI * eps / 15.0,
            a1: 7.0 * eps / 30.0,
            b0: 7.0 * eps / 30.0,
        }
    }
}

/// Modulation `exp(i 2 pi w' m)`.
pub fn modulation_a(n: usize, num_cols: usize) -> Vec<Complex64> {
    // 2 pi w' m = pi (num_cols m mod 2n) / n, reduced in integers
    let two_n = 2 * n as u128;
    (0..n)
        .map(|m| {
            let r = (num_cols as u128 * m as u128) % two_n;
            Complex64::from_polar(1.0, PI * r as f64 / n as f64)
        })
        .collect()
}

/// Modulation `exp(i pi (w + w') m)`.
pub fn modulation_b(n: usize, w: f64, w_prime: f64) -> Vec<Complex64> {
    let s = 0.5 * (w + w_prime);
    (0..n)
        .map(|m| {
            let mf = m as f64;
            let p = s * mf;
            let err = s.mul_add(mf, -p);
            let turns = (p - p.floor()) + err;
            Complex64::from_polar(1.0, 2.0 * PI * turns)
        })
        .collect()
}

/// `L1 L2^H ~ B - F F^*` with its certified spectral-norm error.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionFactor {
    pub factor: LowRankFactor<Complex64>,
    pub bound: f64,
    pub hilbert_rank: usize,
    pub a1_rank: usize,
    pub b0_rank: usize,
}

pub fn assemble_l(params: &SlepianParams) -> Result<CorrectionFactor> {
    check_tolerance(params.epsilon)?;
    let n = params.n;
    let budget = DeltaBudget::for_tolerance(params.epsilon);
    let z = hilbert_factor(n, budget.hilbert)?;
    let ta = taylor_factor_a1(n, budget.a1)?;
    let tb = taylor_factor_b0(n, params.w, params.w_prime, budget.b0)?;
    let da = modulation_a(n, params.num_cols());
    let db = modulation_b(n, params.w, params.w_prime);

    let rh = z.ncols();
    let ra = ta.rank();
    let rb = tb.rank();
    let rank = 4 * rh + 2 * ra + 2 * rb;
    let mut l1 = DMatrix::<Complex64>::zeros(n, rank);
    let mut l2 = DMatrix::<Complex64>::zeros(n, rank);

    let c_hilbert = Complex64::new(0.0, -1.0 / (2.0 * PI)); // 1 / (2 pi i)
    let c_half_i = Complex64::new(0.0, -0.5); // 1 / (2 i)
    let half = Complex64::new(0.5, 0.0);

    let va_ct = &ta.v * ta.c.transpose();
    let vb_ct = &tb.v * tb.c.transpose();

    for m in 0..n {
        let a = da[m];
        let ac = a.conj();
        let b = db[m];
        let bc = b.conj();
        let jm = n - 1 - m;
        let mut col = 0;
        for j in 0..rh {
            let zm = z[(m, j)];
            let zj = z[(jm, j)];
            l1[(m, col)] = c_hilbert * a * zm;
            l2[(m, col)] = a * zj;
            l1[(m, col + rh)] = -c_hilbert * a * zj;
            l2[(m, col + rh)] = a * zm;
            l1[(m, col + 2 * rh)] = -c_hilbert * ac * zm;
            l2[(m, col + 2 * rh)] = ac * zj;
            l1[(m, col + 3 * rh)] = c_hilbert * ac * zj;
            l2[(m, col + 3 * rh)] = ac * zm;
            col += 1;
        }
        col = 4 * rh;
        for j in 0..ra {
            let v = ta.v[(m, j)];
            let vc = va_ct[(m, j)];
            l1[(m, col + j)] = c_half_i * a * v;
            l2[(m, col + j)] = a * vc;
            l1[(m, col + ra + j)] = -c_half_i * ac * v;
            l2[(m, col + ra + j)] = ac * vc;
        }
        col += 2 * ra;
        for j in 0..rb {
            let v = tb.v[(m, j)];
            let vc = vb_ct[(m, j)];
            l1[(m, col + j)] = half * b * v;
            l2[(m, col + j)] = b * vc;
            l1[(m, col + rb + j)] = half * bc * v;
            l2[(m, col + rb + j)] = bc * vc;
        }
    }

    Ok(CorrectionFactor {
        factor: LowRankFactor { left: l1, right: l2 },
        bound: params.epsilon,
        hilbert_rank: rh,
        a1_rank: ra,
        b0_rank: rb,
    })
}

fn columns_from<F>(set: &TransitionEigenSet, mut weight: F) -> Result<LowRankFactor<f64>>
where
    F: FnMut(&EigenPair, bool) -> Result<(f64, f64)>,
{
    let n = set.n;
    let r = set.len();
    let mut left = DMatrix::zeros(n, r);
    let mut right = DMatrix::zeros(n, r);
    for (col, pair) in set.iter().enumerate() {
        let (lw, rw) = weight(pair, pair.index < set.k)?;
        for (i, &v) in pair.vector.iter().enumerate() {
            left[(i, col)] = lw * v;
            right[(i, col)] = rw * v;
        }
    }
    Ok(LowRankFactor { left, right })
}

/// `(U1, U2)` with `|| S_K S_K^T - B - U1 U2^T || <= eps`.
pub fn build_u_projection(set: &TransitionEigenSet) -> Result<LowRankFactor<f64>> {
    columns_from(set, |p, below| {
        Ok(if below {
            let s = (1.0 - p.lambda).sqrt();
            (s, s)
        } else {
            let s = p.lambda.sqrt();
            (-s, s)
        })
    })
}

/// `(U3, U4)` with `|| B_K^+ - B - U3 U4^T || <= 3 eps`.
pub fn build_u_pinv(set: &TransitionEigenSet) -> Result<LowRankFactor<f64>> {
    columns_from(set, |p, below| {
        if below {
            if !(p.lambda > 0.0) {
                return Err(SlepianError::Numerical(format!(
                    "eigenvalue {} of index {} is not positive",
                    p.lambda, p.index
                )));
            }
            let s = (1.0 / p.lambda - p.lambda).max(0.0).sqrt();
            Ok((s, s))
        } else {
            let s = p.lambda.sqrt();
            Ok((-s, s))
        }
    })
}

/// `lambda / (lambda^2 + alpha) - lambda / (1 + alpha)`, written so that it
/// stays nonnegative on [0, 1].
pub fn tikhonov_weight(lambda: f64, alpha: f64) -> f64 {
    lambda * (1.0 - lambda) * (1.0 + lambda) / ((lambda * lambda + alpha) * (1.0 + alpha))
}

/// Symmetric `U5` with `|| (B^2 + alpha I)^{-1} B - B / (1 + alpha) - U5 U5^T || <= eps`
/// when `pairs` holds every eigenpair in the Tikhonov window.
pub fn build_u_tikhonov(n: usize, pairs: &[EigenPair], alpha: f64) -> Result<LowRankFactor<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SlepianError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut u = DMatrix::zeros(n, pairs.len());
    for (col, p) in pairs.iter().enumerate() {
        check_len(n, p.vector.len())?;
        let g = tikhonov_weight(p.lambda, alpha);
        if g < -1e-14 {
            return Err(SlepianError::Numerical(format!(
                "negative Tikhonov weight {g} at index {}",
                p.index
            )));
        }
        let s = g.max(0.0).sqrt();
        for (i, &v) in p.vector.iter().enumerate() {
            u[(i, col)] = s * v;
        }
    }
    Ok(LowRankFactor {
        left: u.clone(),
        right: u,
    })
}
