//! Fourier extension of a non-periodic function on `[-1, 1]` to a period
//! `[-T, T]`, compared against the plain Fourier series on `[-1, 1]`.
//!
//! With `N = 2M + 1` and `W = 1 / (2T)` the extension coefficients solve
//! `B_{N,W} g = y`, where `y_m = (2T)^(-1/2) * int_{-1}^{1} f(t) e^{-i pi m t / T} dt`
//! and the approximation is `(2T)^(-1/2) * sum_m g_m e^{i pi m t / T}`.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use fastslepian::dpss::DpssSolver;
use fastslepian::fft_kernels::prolate_symbol;
use fastslepian::{FastPseudoinverse, FastTikhonov, SlepianParams};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{CliError, CliResult};
use crate::grid::{experiment_rng, streams};
use crate::output::{fmt_f64, Table};

pub const EXTENSION_HEADER: [&str; 4] = ["M", "method", "rel_rms", "seconds"];

/// `a exp(-|t - mu| / sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// `slope * t + constant + sum of bumps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub slope: f64,
    pub constant: f64,
    pub bumps: Vec<Bump>,
}

const SAMPLE_BLOCK: usize = 64;

impl TestFunction {
    /// Amplitudes and centers uniform in `[-1, 1]`, widths uniform in
    /// `[1e-3, 1e-1]`, drawn in that order per bump.
    pub fn random<R: Rng>(rng: &mut R, slope: f64, count: usize) -> Self {
        let bumps = (0..count)
            .map(|_| Bump {
                amplitude: rng.gen_range(-1.0..=1.0),
                center: rng.gen_range(-1.0..=1.0),
                width: rng.gen_range(1e-3..=1e-1),
            })
            .collect();
        Self {
            slope,
            constant: 0.0,
            bumps,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            slope: 0.0,
            constant: c,
            bumps: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.slope * t + self.constant;
        for b in &self.bumps {
            v += b.amplitude * (-(t - b.center).abs() / b.width).exp();
        }
        v
    }

    /// Samples at `start + k * step`, `k < len`.
    ///
    /// Within a block that lies on one side of a bump center the exponential
    /// is one `exp` at the block edge times a per-bump table of powers.
    pub fn sample_uniform(&self, start: f64, step: f64, len: usize) -> Vec<f64> {
        let node = |k: usize| start + k as f64 * step;
        let mut out: Vec<f64> = (0..len).map(|k| self.slope * node(k) + self.constant).collect();
        let mut table = [0.0; SAMPLE_BLOCK];
        for b in &self.bumps {
            for (i, t) in table.iter_mut().enumerate() {
                *t = (-(i as f64) * step / b.width).exp();
            }
            for lo in (0..len).step_by(SAMPLE_BLOCK) {
                let hi = (lo + SAMPLE_BLOCK).min(len);
                let block = &mut out[lo..hi];
                let (t0, t1) = (node(lo), node(hi - 1));
                if t0 >= b.center {
                    let edge = b.amplitude * (-(t0 - b.center) / b.width).exp();
                    if edge == 0.0 {
                        break;
                    }
                    for (o, p) in block.iter_mut().zip(&table) {
                        *o += edge * p;
                    }
                } else if t1 < b.center {
                    let edge = b.amplitude * (-(b.center - t1) / b.width).exp();
                    let last = hi - 1 - lo;
                    for (i, o) in block.iter_mut().enumerate() {
                        *o += edge * table[last - i];
                    }
                } else {
                    for (i, o) in block.iter_mut().enumerate() {
                        *o += b.amplitude * (-(node(lo + i) - b.center).abs() / b.width).exp();
                    }
                }
            }
        }
        out
    }
}

/// Quadrature FFT length `2^(13 + floor(log2 M))`.
pub fn quad_len(m: usize) -> usize {
    1usize << (13 + m.max(1).ilog2())
}

/// `(2T)^(-1/2) * int_{-1}^{1} f(t) e^{-i pi m t / T} dt` for `m = -M..=M`.
///
/// Trapezoid rule on the nodes `-T + 2Tk/len` inside `[-1, 1]`, evaluated for
/// all `m` by one FFT, plus trapezoid panels from the outermost nodes to `+-1`.
pub fn coefficient_integrals(f: &TestFunction, t_ext: f64, m: usize, len: usize) -> Vec<Complex64> {
    assert!(t_ext >= 1.0 && len > 2 * m);
    let h = 2.0 * t_ext / len as f64;
    let node = |k: usize| -t_ext + k as f64 * h;
    let mut ka = ((t_ext - 1.0) / h).ceil() as usize;
    while node(ka) < -1.0 {
        ka += 1;
    }
    while ka > 0 && node(ka - 1) >= -1.0 {
        ka -= 1;
    }
    let mut kb = (((t_ext + 1.0) / h).floor() as usize).min(len - 1);
    while node(kb) > 1.0 {
        kb -= 1;
    }
    while kb + 1 < len && node(kb + 1) <= 1.0 {
        kb += 1;
    }
    let (ta, tb) = (node(ka), node(kb));
    let samples = f.sample_uniform(ta, h, kb - ka + 1);

    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (dst, &s) in buf[ka..=kb].iter_mut().zip(&samples) {
        *dst = Complex64::new(s, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let (fa, fb) = (samples[0], samples[samples.len() - 1]);
    let (f_lo, f_hi) = (f.eval(-1.0), f.eval(1.0));
    let (da, db) = (ta + 1.0, 1.0 - tb);
    let scale = 1.0 / (2.0 * t_ext).sqrt();
    let mi = m as i64;
    (-mi..=mi)
        .map(|j| {
            let phase = |t: f64| Complex64::from_polar(1.0, -PI * j as f64 * t / t_ext);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let riemann = buf[j.rem_euclid(len as i64) as usize] * (h * sign);
            let (pa, pb) = (phase(ta) * fa, phase(tb) * fb);
            let ends = -(pa + pb) * (0.5 * h)
                + (phase(-1.0) * f_lo + pa) * (0.5 * da)
                + (pb + phase(1.0) * f_hi) * (0.5 * db);
            (riemann + ends) * scale
        })
        .collect()
}

/// `Re sum_j c_j e^{i pi (j - M) t / T} * scale` at each `t`.
pub fn evaluate_series(coeffs: &[Complex64], t_ext: f64, scale: f64, ts: &[f64]) -> Vec<f64> {
    let m = (coeffs.len() / 2) as f64;
    ts.iter()
        .map(|&t| {
            let step = Complex64::from_polar(1.0, PI * t / t_ext);
            let mut z = Complex64::from_polar(1.0, -PI * m * t / t_ext);
            let mut acc = 0.0;
            for c in coeffs {
                acc += (c * z).re;
                z *= step;
            }
            acc * scale
        })
        .collect()
}

pub fn rel_rms(approx: &[f64], exact: &[f64]) -> f64 {
    let num: f64 = approx.iter().zip(exact).map(|(a, e)| (a - e).powi(2)).sum();
    let den: f64 = exact.iter().map(|e| e * e).sum();
    (num / den).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionChoice {
    Random { slope: f64, count: usize },
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierExtensionConfig {
    pub t_ext: f64,
    pub m_values: Vec<usize>,
    pub pinv_threshold: f64,
    pub fast_eps: f64,
    pub alpha: f64,
    pub eval_points: usize,
    /// Exact methods are skipped when `2M + 1` exceeds this.
    pub dense_guard: usize,
    pub function: FunctionChoice,
}

impl Default for FourierExtensionConfig {
    fn default() -> Self {
        Self {
            t_ext: 1.5,
            m_values: vec![5, 10, 20, 40, 80, 160, 320, 640],
            pinv_threshold: 1e-4,
            fast_eps: 1e-5,
            alpha: 1e-8,
            eval_points: 10_000,
            dense_guard: 8192,
            function: FunctionChoice::Random {
                slope: 5.0,
                count: 500,
            },
        }
    }
}

impl FourierExtensionConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if !(self.t_ext > 1.0 && self.t_ext.is_finite()) {
            return bad(format!("extension half-period must exceed 1, got {}", self.t_ext));
        }
        if !(self.pinv_threshold > 0.0 && self.pinv_threshold < 1.0) {
            return bad(format!("pinv threshold must lie in (0, 1), got {}", self.pinv_threshold));
        }
        if !(self.fast_eps > 0.0 && self.fast_eps < 0.5) {
            return bad(format!("fast tolerance must lie in (0, 1/2), got {}", self.fast_eps));
        }
        if !(self.fast_eps < self.pinv_threshold) {
            return bad("fast tolerance must be below the pinv threshold".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return bad("truncation orders must be positive".into());
        }
        if self.eval_points < 2 {
            return bad("need at least 2 evaluation points".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fourier,
    ExtExactPinv,
    ExtFastPinv,
    ExtExactTik,
    ExtFastTik,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fourier => "fourier",
            Self::ExtExactPinv => "ext_exact_pinv",
            Self::ExtFastPinv => "ext_fast_pinv",
            Self::ExtExactTik => "ext_exact_tik",
            Self::ExtFastTik => "ext_fast_tik",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionRow {
    pub m: usize,
    pub method: Method,
    pub rel_rms: f64,
    /// Quadrature plus solve; one-time factorizations are excluded.
    pub seconds: f64,
}

struct DenseEig {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl DenseEig {
    fn new(n: usize, w: f64) -> CliResult<Self> {
        let eig = SymmetricEigen::new(prolate_symbol(n, w)?.to_dense());
        Ok(Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// `V diag(g(lambda)) V^T y`.
    fn apply(&self, g: impl Fn(f64) -> f64, y: &[Complex64]) -> Vec<Complex64> {
        let n = y.len();
        let rhs = DMatrix::from_fn(n, 2, |i, j| if j == 0 { y[i].re } else { y[i].im });
        let mut c = self.vectors.tr_mul(&rhs);
        for (mut row, &l) in c.row_iter_mut().zip(&self.values) {
            row *= g(l);
        }
        let x = &self.vectors * c;
        (0..n).map(|i| Complex64::new(x[(i, 0)], x[(i, 1)])).collect()
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub fn build_function(cfg: &FourierExtensionConfig, seed: u64) -> TestFunction {
    match cfg.function {
        FunctionChoice::Random { slope, count } => {
            TestFunction::random(&mut experiment_rng(seed, streams::FOURIER_EXTENSION), slope, count)
        }
        FunctionChoice::Constant(c) => TestFunction::constant(c),
    }
}

/// Rows for each `M` in the order fourier, exact pinv, fast pinv, exact
/// Tikhonov, fast Tikhonov.
pub fn fourier_extension(cfg: &FourierExtensionConfig, seed: u64) -> CliResult<Vec<ExtensionRow>> {
    cfg.validate()?;
    let f = build_function(cfg, seed);
    let p = cfg.eval_points;
    let ts: Vec<f64> = (0..p).map(|i| -1.0 + 2.0 * i as f64 / (p - 1) as f64).collect();
    let exact: Vec<f64> = ts.iter().map(|&t| f.eval(t)).collect();
    let w = 1.0 / (2.0 * cfg.t_ext);
    let ext_scale = 1.0 / (2.0 * cfg.t_ext).sqrt();

    let mut rows = Vec::new();
    for &m in &cfg.m_values {
        let n = 2 * m + 1;
        let len = quad_len(m);
        let mut push = |method: Method, coeffs: &[Complex64], t_ext: f64, scale: f64, seconds: f64| {
            let approx = evaluate_series(coeffs, t_ext, scale, &ts);
            rows.push(ExtensionRow {
                m,
                method,
                rel_rms: rel_rms(&approx, &exact),
                seconds,
            });
        };

        let (series, secs) = timed(|| coefficient_integrals(&f, 1.0, m, len));
        push(Method::Fourier, &series, 1.0, 1.0 / 2f64.sqrt(), secs);

        let (y, quad_secs) = timed(|| coefficient_integrals(&f, cfg.t_ext, m, len));

        let dense = if n <= cfg.dense_guard { Some(DenseEig::new(n, w)?) } else { None };
        let mut solver = DpssSolver::new(n, w)?;
        let k = solver.count_at_least(cfg.pinv_threshold)?;
        let params = SlepianParams::new(n, w, cfg.fast_eps)?.with_k(k)?;
        let pinv = FastPseudoinverse::with_solver(&params, &mut solver)?;
        let tik = FastTikhonov::with_solver(&params, cfg.alpha, &mut solver)?;

        if let Some(eig) = &dense {
            let thr = cfg.pinv_threshold;
            let (g, secs) = timed(|| eig.apply(|l| if l >= thr { 1.0 / l } else { 0.0 }, &y));
            push(Method::ExtExactPinv, &g, cfg.t_ext, ext_scale, quad_secs + secs);
        }
        let (g, secs) = timed(|| pinv.apply_complex(&y));
        push(Method::ExtFastPinv, &g?, cfg.t_ext, ext_scale, quad_secs + secs);
        if let Some(eig) = &dense {
            let alpha = cfg.alpha;
            let (g, secs) = timed(|| eig.apply(|l| l / (l * l + alpha), &y));
            push(Method::ExtExactTik, &g, cfg.t_ext, ext_scale, quad_secs + secs);
        }
        let (g, secs) = timed(|| tik.apply_complex(&y));
        push(Method::ExtFastTik, &g?, cfg.t_ext, ext_scale, quad_secs + secs);
    }
    Ok(rows)
}

pub fn extension_table(rows: &[ExtensionRow]) -> Table {
    let mut table = Table::new(&EXTENSION_HEADER);
    for r in rows {
        table.push(vec![
            r.m.to_string(),
            r.method.to_string(),
            fmt_f64(r.rel_rms),
            fmt_f64(r.seconds),
        ]);
    }
    table
}
