//! The fast operators: projection onto the leading Slepian subspace, its
//! compressed factorization, the truncated pseudoinverse and the Tikhonov
//! solve. Each is a prolate (or partial Fourier) part plus low-rank factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dpss::{dense_slepian_basis, DpssSolver, EigenPair, DENSE_GUARD};
use crate::error::{check_len, Result, SlepianError};
use crate::fft_kernels::{PartialFourier, ToeplitzOperator};
use crate::lowrank::{
    assemble_l, build_u_pinv, build_u_projection, build_u_tikhonov, LowRankFactor,
};
use crate::params::{tikhonov_thresholds, SlepianParams};

pub use crate::params::{k_prime_budget, low_rank_budget, tikhonov_rank_budget, transition_count_bound};

/// `scale * B + left right^T`, all real.
#[derive(Debug, Clone)]
struct CorrectedToeplitz {
    b_op: ToeplitzOperator,
    scale: f64,
    u: LowRankFactor<f64>,
}

impl CorrectedToeplitz {
    fn apply_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.b_op.apply_real(x)?;
        if self.scale != 1.0 {
            for v in y.iter_mut() {
                *v *= self.scale;
            }
        }
        if self.u.rank() > 0 {
            let corr = self.u.apply(x)?;
            for (a, b) in y.iter_mut().zip(corr) {
                *a += b;
            }
        }
        Ok(y)
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.b_op.n(), x.len())?;
        let re: Vec<f64> = x.iter().map(|c| c.re).collect();
        let im: Vec<f64> = x.iter().map(|c| c.im).collect();
        let (mut yr, mut yi) = self.b_op.apply_real_pair(&re, &im)?;
        if self.scale != 1.0 {
            yr.iter_mut().chain(yi.iter_mut()).for_each(|v| *v *= self.scale);
        }
        if self.u.rank() > 0 {
            for (y, v) in [(&mut yr, &re), (&mut yi, &im)] {
                for (a, b) in y.iter_mut().zip(self.u.apply(v)?) {
                    *a += b;
                }
            }
        }
        Ok(yr
            .into_iter()
            .zip(yi)
            .map(|(r, i)| Complex64::new(r, i))
            .collect())
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.b_op.symbol().to_dense() * self.scale + self.u.to_dense()
    }
}

fn solver_for(params: &SlepianParams) -> Result<DpssSolver> {
    DpssSolver::new(params.n, params.w)
}

fn check_solver(params: &SlepianParams, solver: &DpssSolver) -> Result<()> {
    if solver.n() != params.n || solver.w() != params.w {
        return Err(SlepianError::InvalidParameter(
            "eigen solver was built for different (n, w)".into(),
        ));
    }
    Ok(())
}

fn check_factor<T: nalgebra::ComplexField + Copy>(n: usize, u: &LowRankFactor<T>) -> Result<()> {
    check_len(n, u.n())?;
    check_len(u.left.ncols(), u.right.ncols())
}

/// `x -> B x + U1 U2^T x`, within `eps ||x||` of the projection onto the
/// leading `k` Slepian vectors.
#[derive(Debug, Clone)]
pub struct FastProjector {
    params: SlepianParams,
    inner: CorrectedToeplitz,
    error_bound: f64,
}

impl FastProjector {
    pub fn new(params: &SlepianParams) -> Result<Self> {
        Self::with_solver(params, &mut solver_for(params)?)
    }

    pub fn with_solver(params: &SlepianParams, solver: &mut DpssSolver) -> Result<Self> {
        check_solver(params, solver)?;
        let set = solver.transition(params.epsilon, params.k)?;
        let u = build_u_projection(&set)?;
        Ok(Self {
            params: *params,
            inner: CorrectedToeplitz {
                b_op: solver.b_op().clone(),
                scale: 1.0,
                u,
            },
            error_bound: params.epsilon,
        })
    }

    pub fn from_parts(params: &SlepianParams, u: LowRankFactor<f64>, error_bound: f64) -> Result<Self> {
        check_factor(params.n, &u)?;
        Ok(Self {
            params: *params,
            inner: CorrectedToeplitz {
                b_op: ToeplitzOperator::prolate(params.n, params.w)?,
                scale: 1.0,
                u,
            },
            error_bound,
        })
    }

    pub fn params(&self) -> &SlepianParams {
        &self.params
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn factor(&self) -> &LowRankFactor<f64> {
        &self.inner.u
    }

    pub fn rank(&self) -> usize {
        self.inner.u.rank()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_real(x)
    }

    pub fn project_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.inner.apply(x)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.inner.to_dense()
    }
}

/// `y -> B^+_K y` up to `3 eps ||y||`, as `B y + U3 U4^T y`.
#[derive(Debug, Clone)]
pub struct FastPseudoinverse {
    params: SlepianParams,
    inner: CorrectedToeplitz,
    error_bound: f64,
}

impl FastPseudoinverse {
    pub fn new(params: &SlepianParams) -> Result<Self> {
        Self::with_solver(params, &mut solver_for(params)?)
    }

    pub fn with_solver(params: &SlepianParams, solver: &mut DpssSolver) -> Result<Self> {
        check_solver(params, solver)?;
        let set = solver.transition(params.epsilon, params.k)?;
        let u = build_u_pinv(&set)?;
        Ok(Self {
            params: *params,
            inner: CorrectedToeplitz {
                b_op: solver.b_op().clone(),
                scale: 1.0,
                u,
            },
            error_bound: 3.0 * params.epsilon,
        })
    }

    pub fn from_parts(params: &SlepianParams, u: LowRankFactor<f64>, error_bound: f64) -> Result<Self> {
        check_factor(params.n, &u)?;
        Ok(Self {
            params: *params,
            inner: CorrectedToeplitz {
                b_op: ToeplitzOperator::prolate(params.n, params.w)?,
                scale: 1.0,
                u,
            },
            error_bound,
        })
    }

    pub fn params(&self) -> &SlepianParams {
        &self.params
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn factor(&self) -> &LowRankFactor<f64> {
        &self.inner.u
    }

    pub fn rank(&self) -> usize {
        self.inner.u.rank()
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_real(y)
    }

    pub fn apply_complex(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.inner.apply(y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.inner.to_dense()
    }
}

/// `y -> (B^2 + alpha I)^{-1} B y` up to `eps ||y||`, as
/// `B y / (1 + alpha) + U5 U5^T y`.
#[derive(Debug, Clone)]
pub struct FastTikhonov {
    params: SlepianParams,
    alpha: f64,
    inner: CorrectedToeplitz,
    error_bound: f64,
}

impl FastTikhonov {
    pub fn new(params: &SlepianParams, alpha: f64) -> Result<Self> {
        Self::with_solver(params, alpha, &mut solver_for(params)?)
    }

    pub fn with_solver(params: &SlepianParams, alpha: f64, solver: &mut DpssSolver) -> Result<Self> {
        check_solver(params, solver)?;
        let pairs = tikhonov_window(solver, params.epsilon, alpha)?;
        let u = build_u_tikhonov(params.n, &pairs, alpha)?;
        Self::assemble(params, alpha, solver.b_op().clone(), u, params.epsilon)
    }

    pub fn from_parts(
        params: &SlepianParams,
        alpha: f64,
        u: LowRankFactor<f64>,
        error_bound: f64,
    ) -> Result<Self> {
        check_factor(params.n, &u)?;
        let b_op = ToeplitzOperator::prolate(params.n, params.w)?;
        Self::assemble(params, alpha, b_op, u, error_bound)
    }

    fn assemble(
        params: &SlepianParams,
        alpha: f64,
        b_op: ToeplitzOperator,
        u: LowRankFactor<f64>,
        error_bound: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SlepianError::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            params: *params,
            alpha,
            inner: CorrectedToeplitz {
                b_op,
                scale: 1.0 / (1.0 + alpha),
                u,
            },
            error_bound,
        })
    }

    pub fn params(&self) -> &SlepianParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn factor(&self) -> &LowRankFactor<f64> {
        &self.inner.u
    }

    pub fn rank(&self) -> usize {
        self.inner.u.rank()
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_real(y)
    }

    pub fn apply_complex(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.inner.apply(y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.inner.to_dense()
    }
}

/// Eigenpairs with `alpha (1 + alpha) eps < lambda < 1 - eps / 3`.
pub fn tikhonov_window(solver: &mut DpssSolver, eps: f64, alpha: f64) -> Result<Vec<EigenPair>> {
    crate::error::check_tolerance(eps)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SlepianError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let (lower, upper) = tikhonov_thresholds(eps, alpha);
    solver.window(lower, upper)
}

/// Compressed representation `T1 T2^H` of the projection, with
/// `T1 = [F, L1, U1]` and `T2 = [F, L2, U2]`; accurate to `2 eps`.
#[derive(Debug, Clone)]
pub struct FastFactorization {
    params: SlepianParams,
    pf: PartialFourier,
    l: LowRankFactor<Complex64>,
    u: LowRankFactor<f64>,
    error_bound: f64,
}

impl FastFactorization {
    pub fn new(params: &SlepianParams) -> Result<Self> {
        Self::with_solver(params, &mut solver_for(params)?)
    }

    pub fn with_solver(params: &SlepianParams, solver: &mut DpssSolver) -> Result<Self> {
        check_solver(params, solver)?;
        let set = solver.transition(params.epsilon, params.k)?;
        let u = build_u_projection(&set)?;
        let l = assemble_l(params)?.factor;
        Self::from_parts(params, l, u, 2.0 * params.epsilon)
    }

    pub fn from_parts(
        params: &SlepianParams,
        l: LowRankFactor<Complex64>,
        u: LowRankFactor<f64>,
        error_bound: f64,
    ) -> Result<Self> {
        check_factor(params.n, &l)?;
        check_factor(params.n, &u)?;
        Ok(Self {
            params: *params,
            pf: PartialFourier::new(params.n, params.w)?,
            l,
            u,
            error_bound,
        })
    }

    pub fn params(&self) -> &SlepianParams {
        &self.params
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn correction(&self) -> &LowRankFactor<Complex64> {
        &self.l
    }

    pub fn projection_factor(&self) -> &LowRankFactor<f64> {
        &self.u
    }

    pub fn partial_fourier(&self) -> &PartialFourier {
        &self.pf
    }

    /// Inner dimension `2 n w' + r1 + r2`.
    pub fn k_prime(&self) -> usize {
        self.pf.num_cols() + self.l.rank() + self.u.rank()
    }

    /// `T2^H x`.
    pub fn compress(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.params.n, x.len())?;
        let mut out = self.pf.adjoint(x)?;
        out.extend(self.l.compress(x)?);
        let re = DVector::from_iterator(x.len(), x.iter().map(|c| c.re));
        let im = DVector::from_iterator(x.len(), x.iter().map(|c| c.im));
        let cr = self.u.right.tr_mul(&re);
        let ci = self.u.right.tr_mul(&im);
        out.extend(cr.iter().zip(ci.iter()).map(|(&r, &i)| Complex64::new(r, i)));
        Ok(out)
    }

    pub fn compress_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.compress(&xc)
    }

    /// `T1 c`.
    pub fn decompress(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.k_prime(), c.len())?;
        let nf = self.pf.num_cols();
        let nl = self.l.rank();
        let mut y = self.pf.apply(&c[..nf])?;
        if nl > 0 {
            for (a, b) in y.iter_mut().zip(self.l.expand(&c[nf..nf + nl])?) {
                *a += b;
            }
        }
        let cu = &c[nf + nl..];
        if !cu.is_empty() {
            let cr = DVector::from_iterator(cu.len(), cu.iter().map(|v| v.re));
            let ci = DVector::from_iterator(cu.len(), cu.iter().map(|v| v.im));
            let yr = &self.u.left * cr;
            let yi = &self.u.left * ci;
            for (i, a) in y.iter_mut().enumerate() {
                *a += Complex64::new(yr[i], yi[i]);
            }
        }
        Ok(y)
    }

    pub fn round_trip(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.decompress(&self.compress(x)?)
    }

    /// Dense `T1 T2^H`.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let f = self.pf.to_dense();
        let u = self.u.to_dense().map(|v| Complex64::new(v, 0.0));
        &f * f.adjoint() + self.l.to_dense() + u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Projector = 1,
    Factorization = 2,
    Pseudoinverse = 3,
    Tikhonov = 4,
}

impl OperatorKind {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Self::Projector),
            2 => Some(Self::Factorization),
            3 => Some(Self::Pseudoinverse),
            4 => Some(Self::Tikhonov),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum FastOperator {
    Projector(FastProjector),
    Factorization(FastFactorization),
    Pseudoinverse(FastPseudoinverse),
    Tikhonov(FastTikhonov),
}

impl FastOperator {
    /// Builds an operator of `kind`; `alpha` is used only for Tikhonov.
    pub fn build(kind: OperatorKind, params: &SlepianParams, alpha: f64) -> Result<Self> {
        Ok(match kind {
            OperatorKind::Projector => Self::Projector(FastProjector::new(params)?),
            OperatorKind::Factorization => Self::Factorization(FastFactorization::new(params)?),
            OperatorKind::Pseudoinverse => Self::Pseudoinverse(FastPseudoinverse::new(params)?),
            OperatorKind::Tikhonov => Self::Tikhonov(FastTikhonov::new(params, alpha)?),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        match self {
            Self::Projector(_) => OperatorKind::Projector,
            Self::Factorization(_) => OperatorKind::Factorization,
            Self::Pseudoinverse(_) => OperatorKind::Pseudoinverse,
            Self::Tikhonov(_) => OperatorKind::Tikhonov,
        }
    }

    pub fn params(&self) -> &SlepianParams {
        match self {
            Self::Projector(p) => p.params(),
            Self::Factorization(f) => f.params(),
            Self::Pseudoinverse(p) => p.params(),
            Self::Tikhonov(t) => t.params(),
        }
    }

    /// Tikhonov weight, or 0 for the other kinds.
    pub fn alpha(&self) -> f64 {
        match self {
            Self::Tikhonov(t) => t.alpha(),
            _ => 0.0,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            Self::Projector(p) => p.error_bound(),
            Self::Factorization(f) => f.error_bound(),
            Self::Pseudoinverse(p) => p.error_bound(),
            Self::Tikhonov(t) => t.error_bound(),
        }
    }

    /// Applies the operator; the factorization applies its round trip.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        match self {
            Self::Projector(p) => p.project_complex(x),
            Self::Factorization(f) => f.round_trip(x),
            Self::Pseudoinverse(p) => p.apply_complex(x),
            Self::Tikhonov(t) => t.apply_complex(x),
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Projector(p) => p.project(x),
            Self::Pseudoinverse(p) => p.apply(x),
            Self::Tikhonov(t) => t.apply(x),
            Self::Factorization(f) => Ok(f.round_trip(&to_complex(x))?.iter().map(|c| c.re).collect()),
        }
    }
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseKind {
    Projection,
    Pinv,
    Tikhonov { alpha: f64 },
}

/// Exact operator from a dense eigendecomposition of the prolate matrix.
pub fn dense_reference(kind: DenseKind, params: &SlepianParams) -> Result<DMatrix<f64>> {
    let n = params.n;
    if n > DENSE_GUARD {
        return Err(SlepianError::GuardExceeded { n, guard: DENSE_GUARD });
    }
    let basis = dense_slepian_basis(n, params.w)?;
    let weights: Vec<f64> = match kind {
        DenseKind::Projection => (0..n).map(|i| if i < params.k { 1.0 } else { 0.0 }).collect(),
        DenseKind::Pinv => basis
            .values
            .iter()
            .enumerate()
            .map(|(i, &l)| if i < params.k { 1.0 / l } else { 0.0 })
            .collect(),
        DenseKind::Tikhonov { alpha } => {
            if !(alpha > 0.0) {
                return Err(SlepianError::InvalidParameter(format!(
                    "alpha must be positive, got {alpha}"
                )));
            }
            basis
                .values
                .iter()
                .map(|&l| l / (l * l + alpha))
                .collect()
        }
    };
    let s = &basis.vectors;
    let mut scaled = s.clone();
    for (j, &wj) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(wj);
    }
    Ok(scaled * s.transpose())
}
