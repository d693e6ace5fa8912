//! Dense reference computations for the test suites.
//!
//! Everything here is built from closed-form matrix entries and general
//! dense linear algebra. Nothing calls into the fast library, so agreement
//! between the two is evidence rather than tautology.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub fn prolate(n: usize, w: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| {
        let d = a as f64 - b as f64;
        if a == b {
            2.0 * w
        } else {
            (2.0 * PI * w * d).sin() / (PI * d)
        }
    })
}

/// Nearest odd integer to `2 n w`, ties upward.
pub fn num_cols(n: usize, w: f64) -> usize {
    let x = 2.0 * n as f64 * w;
    let below = 2.0 * ((x - 1.0) / 2.0).floor() + 1.0;
    let above = below + 2.0;
    if x - below < above - x {
        below as usize
    } else {
        above as usize
    }
}

/// Columns `e^{2 pi i k t / n} / sqrt(n)` for `k = -(m-1)/2 ..= (m-1)/2`.
pub fn partial_fourier(n: usize, m: usize) -> DMatrix<Complex64> {
    let half = (m as i64 - 1) / 2;
    DMatrix::from_fn(n, m, |t, j| {
        let k = j as i64 - half;
        let phase = 2.0 * PI * ((k * t as i64).rem_euclid(n as i64)) as f64 / n as f64;
        Complex64::from_polar(1.0 / (n as f64).sqrt(), phase)
    })
}

/// `F F^*` as the explicit sum over frequencies, once per offset `a - b`.
pub fn partial_fourier_projector(n: usize, m: usize) -> DMatrix<f64> {
    let half = (m as i64 - 1) / 2;
    let ni = n as i64;
    let by_offset: Vec<f64> = (1 - ni..ni)
        .map(|d| {
            (-half..=half)
                .map(|k| (2.0 * PI * ((k * d).rem_euclid(ni)) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |a, b| by_offset[(a as i64 - b as i64 + ni - 1) as usize])
}

pub fn hilbert(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| 1.0 / (a + b + 1) as f64)
}

pub fn flip(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| if a + b + 1 == n { 1.0 } else { 0.0 })
}

/// `1/(pi d) - 1/(n sin(pi d / n))`, zero on the diagonal.
pub fn a0_exact(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            return 0.0;
        }
        let d = a as f64 - b as f64;
        1.0 / (PI * d) - 1.0 / (nf * (PI * d / nf).sin())
    })
}

/// `a0_exact` minus the two Hilbert-like terms `1/(pi (d +- n))`.
pub fn a1_exact(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let mut a = a0_exact(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = i as f64 - j as f64;
                a[(i, j)] -= 1.0 / (PI * (d + nf)) + 1.0 / (PI * (d - nf));
            }
        }
    }
    a
}

pub fn b0_exact(n: usize, w: f64, w_prime: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            return 2.0 * (w - w_prime);
        }
        let d = a as f64 - b as f64;
        2.0 * (PI * (w - w_prime) * d).sin() / (PI * d)
    })
}

pub fn diag_phase(n: usize, rate: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::from_polar(1.0, rate * a as f64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Solution of `A X + X A = b b^T` for diagonal positive `A`.
pub fn lyapunov_diagonal(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| b[i] * b[j] / (a[i] + a[j]))
}

/// Upper bound on `||E||_2`: spectral radius of the symmetric part plus the
/// Frobenius norm of the antisymmetric part. Equal to the norm when `E` is
/// symmetric.
pub fn norm2_bound(e: &DMatrix<f64>) -> f64 {
    let sym = (e + e.transpose()) * 0.5;
    let anti = (e - e.transpose()) * 0.5;
    spectral_radius_sym(&sym) + anti.norm()
}

/// Complex analogue of [`norm2_bound`], through the real symmetric embedding
/// `[[X, -Y], [Y, X]]` of the Hermitian part `X + iY`.
pub fn norm2_bound_complex(e: &DMatrix<Complex64>) -> f64 {
    let herm = (e + e.adjoint()) * Complex64::new(0.5, 0.0);
    let anti = (e - e.adjoint()) * Complex64::new(0.5, 0.0);
    let n = e.nrows();
    let mut emb = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = herm[(i, j)];
            emb[(i, j)] = z.re;
            emb[(i + n, j + n)] = z.re;
            emb[(i + n, j)] = z.im;
            emb[(i, j + n)] = -z.im;
        }
    }
    spectral_radius_sym(&emb) + anti.norm()
}

fn spectral_radius_sym(s: &DMatrix<f64>) -> f64 {
    s.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Eigenvalues of the dense prolate matrix, descending.
pub fn prolate_eigenvalues(n: usize, w: f64) -> Vec<f64> {
    let mut ev: Vec<f64> = prolate(n, w).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Gauss-Legendre rule on [-1, 1] from the Jacobi matrix eigenproblem.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(npts, npts, |i, k| {
        if i + 1 == k || k + 1 == i {
            let m = i.max(k) as f64;
            m / (4.0 * m * m - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let e = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..npts)
        .map(|i| (e.eigenvalues[i], 2.0 * e.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `2 int_0^w |sum_t v_t e^{2 pi i f t}|^2 df`, the fraction of energy of
/// `v` inside the band, by composite 40-point Gauss-Legendre quadrature.
pub fn band_energy(v: &[f64], w: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let n = v.len();
    let panels = ((w * PI * n as f64) / 8.0).ceil().max(1.0) as usize;
    let h = w / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        for (x, wt) in rule.0.iter().zip(&rule.1) {
            let f = h * (p as f64 + 0.5 * (x + 1.0));
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &vt) in v.iter().enumerate() {
                let phase = (f * (2 * t) as f64 - f * (n - 1) as f64).rem_euclid(2.0);
                let (s, c) = (PI * phase).sin_cos();
                re += vt * c;
                im += vt * s;
            }
            total += wt * 0.5 * h * (re * re + im * im);
        }
    }
    2.0 * total
}

/// The commuting tridiagonal matrix, assembled densely.
pub fn commuting_tridiagonal(n: usize, w: f64) -> DMatrix<f64> {
    let c = (2.0 * PI * w).cos();
    let nf = n as f64;
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            let h = (nf - 1.0 - 2.0 * a as f64) / 2.0;
            h * h * c
        } else if a + 1 == b {
            (a as f64 + 1.0) * (nf - 1.0 - a as f64) / 2.0
        } else if b + 1 == a {
            (b as f64 + 1.0) * (nf - 1.0 - b as f64) / 2.0
        } else {
            0.0
        }
    })
}

/// Slepian vectors (columns, descending eigenvalue) and their eigenvalues.
pub struct Basis {
    pub vectors: DMatrix<f64>,
    pub lambdas: Vec<f64>,
}

impl Basis {
    /// Dense eigenvectors of the commuting tridiagonal matrix with Rayleigh
    /// quotients against the dense prolate matrix.
    pub fn new(n: usize, w: f64) -> Self {
        Self::build(n, w, false)
    }

    /// As [`Basis::new`], with the vectors that matter for ill-conditioned
    /// spectral functions refined against an exactly evaluated residual and
    /// small eigenvalues recomputed by band-energy quadrature.
    pub fn accurate(n: usize, w: f64) -> Self {
        Self::build(n, w, true)
    }

    fn build(n: usize, w: f64, accurate: bool) -> Self {
        let t = commuting_tridiagonal(n, w);
        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let b = prolate(n, w);
        let rule = gauss_legendre(40);
        let mut vectors = DMatrix::zeros(n, n);
        let mut lambdas = Vec::with_capacity(n);
        let mut negligible = false;
        for (col, &o) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(o).into_owned();
            let mut lam = (v.transpose() * &b * &v)[(0, 0)];
            if accurate && !negligible {
                if lam > 1e-14 && lam < 1.0 - 1e-7 {
                    refine(n, w, &t, &mut v);
                    lam = (v.transpose() * &b * &v)[(0, 0)];
                }
                if lam < 1e-3 {
                    lam = band_energy(v.as_slice(), w, &rule);
                    negligible = lam < 1e-22;
                }
            } else if negligible {
                lam = 0.0;
            }
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    v.neg_mut();
                }
            }
            vectors.set_column(col, &v);
            lambdas.push(lam);
        }
        Self { vectors, lambdas }
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// `sum_i f(i, lambda_i) v_i v_i^T`.
    pub fn spectral(&self, f: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (i, &lam) in self.lambdas.iter().enumerate() {
            let s = f(i, lam);
            scaled.column_mut(i).scale_mut(s);
        }
        scaled * self.vectors.transpose()
    }

    pub fn projection(&self, k: usize) -> DMatrix<f64> {
        let vk = self.vectors.columns(0, k);
        &vk * vk.transpose()
    }

    pub fn pinv(&self, k: usize) -> DMatrix<f64> {
        self.spectral(|i, lam| if i < k { 1.0 / lam } else { 0.0 })
    }

    pub fn tikhonov(&self, alpha: f64) -> DMatrix<f64> {
        self.spectral(|_, lam| lam / (lam * lam + alpha))
    }

    /// Number of eigenvalues in the open interval `(eps, 1 - eps)`.
    pub fn transition_count(&self, eps: f64) -> usize {
        self.lambdas.iter().filter(|&&l| l > eps && l < 1.0 - eps).count()
    }
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Sum of products with compensated accumulation.
fn compensated_dot(terms: &[(f64, f64)]) -> f64 {
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for &(a, b) in terms {
        let (p, e) = two_prod(a, b);
        let s = hi + p;
        let bb = s - hi;
        lo += (hi - (s - bb)) + (p - bb) + e;
        hi = s;
    }
    hi + lo
}

/// Two corrections from the bordered system
/// `[[T - mu I, v], [v^T, 0]] [x; s] = [r; 0]`.
fn refine(n: usize, w: f64, t: &DMatrix<f64>, v: &mut DVector<f64>) {
    let c = (2.0 * PI * w).cos();
    let nf = n as f64;
    for _ in 0..2 {
        let mu = (v.transpose() * t * &*v)[(0, 0)];
        let mut rhs = DVector::zeros(n + 1);
        for m in 0..n {
            let h = (nf - 1.0 - 2.0 * m as f64) / 2.0;
            let (dh, dl) = two_prod(h * h, c);
            let mut terms = vec![(dh, v[m]), (dl, v[m]), (-mu, v[m])];
            if m > 0 {
                terms.push((m as f64 * (nf - m as f64) / 2.0, v[m - 1]));
            }
            if m + 1 < n {
                terms.push(((m as f64 + 1.0) * (nf - 1.0 - m as f64) / 2.0, v[m + 1]));
            }
            rhs[m] = compensated_dot(&terms);
        }
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(t);
        for i in 0..n {
            a[(i, i)] -= mu;
            a[(i, n)] = v[i];
            a[(n, i)] = v[i];
        }
        let x = a.lu().solve(&rhs).expect("bordered system is nonsingular");
        *v -= x.rows(0, n);
        let norm = v.norm();
        *v /= norm;
    }
}
