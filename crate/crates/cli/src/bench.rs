use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use fastslepian::persist::{load_operator, operator_to_bytes, save_operator};
use fastslepian::{FastOperator, FastProjector, OperatorKind, SlepianParams};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{CliError, CliResult};
use crate::grid::{experiment_rng, streams, ExperimentGrid};
use crate::output::{fmt_f64, fmt_opt, Table};

pub const BENCH_HEADER: [&str; 7] = [
    "mode",
    "n",
    "w",
    "eps",
    "setup_seconds",
    "apply_seconds",
    "dense_apply_seconds",
];

pub const DEFAULT_DENSE_GUARD: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Project,
    Factorize,
    Pinv,
    Tikhonov,
}

impl BenchMode {
    pub const ALL: [BenchMode; 4] = [Self::Project, Self::Factorize, Self::Pinv, Self::Tikhonov];

    pub fn kind(self) -> OperatorKind {
        match self {
            Self::Project => OperatorKind::Projector,
            Self::Factorize => OperatorKind::Factorization,
            Self::Pinv => OperatorKind::Pseudoinverse,
            Self::Tikhonov => OperatorKind::Tikhonov,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Project => "project",
            Self::Factorize => "factorize",
            Self::Pinv => "pinv",
            Self::Tikhonov => "tikhonov",
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchMode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CliError::Validation(format!("unknown bench mode {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub grid: ExperimentGrid,
    pub modes: Vec<BenchMode>,
    /// Tikhonov weight.
    pub alpha: f64,
    /// Largest `n` that gets a dense timing.
    pub dense_guard: usize,
    /// When set, every operator is saved here and checked to reload
    /// byte-identically.
    pub factor_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub mode: BenchMode,
    pub n: usize,
    pub w: f64,
    pub eps: f64,
    pub setup_seconds: f64,
    pub apply_seconds: f64,
    pub dense_apply_seconds: Option<f64>,
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Dense matrix of the exact map the operator approximates; the
/// factorization is compared against its projection target.
fn dense_matrix(op: &FastOperator) -> CliResult<DMatrix<f64>> {
    Ok(match op {
        FastOperator::Projector(p) => p.to_dense(),
        FastOperator::Pseudoinverse(p) => p.to_dense(),
        FastOperator::Tikhonov(t) => t.to_dense(),
        FastOperator::Factorization(f) => FastProjector::new(f.params())?.to_dense(),
    })
}

pub fn bench_point(cfg: &BenchConfig, mode: BenchMode, n: usize, w: f64, eps: f64) -> CliResult<BenchRow> {
    let params = SlepianParams::new(n, w, eps)?;
    let trials = cfg.grid.trials;
    let mut setup = Vec::with_capacity(trials);
    let mut op = None;
    for _ in 0..trials {
        let (built, secs) = timed(|| FastOperator::build(mode.kind(), &params, cfg.alpha));
        setup.push(secs);
        op = Some(built?);
    }
    let op = op.expect("trials >= 1");

    if let Some(dir) = &cfg.factor_dir {
        let path = dir.join(format!("{}_n{}_w{}_eps{}.fslt", mode.name(), n, w, eps));
        save_operator(&op, &path)?;
        let on_disk = std::fs::read(&path)?;
        if operator_to_bytes(&load_operator(&path)?) != on_disk {
            return Err(CliError::Validation(format!(
                "{} did not reload byte-identically",
                path.display()
            )));
        }
    }

    let mut rng = experiment_rng(cfg.grid.seed, streams::BENCH);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut apply = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (y, secs) = timed(|| op.apply_real(&x));
        y?;
        apply.push(secs);
    }

    let dense_apply_seconds = if n <= cfg.dense_guard {
        let m = dense_matrix(&op)?;
        let xv = DVector::from_column_slice(&x);
        let mut times = Vec::with_capacity(trials);
        for _ in 0..trials {
            let (y, secs) = timed(|| &m * &xv);
            std::hint::black_box(y);
            times.push(secs);
        }
        Some(median(times))
    } else {
        None
    };

    Ok(BenchRow {
        mode,
        n,
        w,
        eps,
        setup_seconds: median(setup),
        apply_seconds: median(apply),
        dense_apply_seconds,
    })
}

/// One row per grid point and mode, grid-major.
pub fn bench(cfg: &BenchConfig) -> CliResult<Table> {
    let mut table = Table::new(&BENCH_HEADER);
    for (n, w, eps) in cfg.grid.points() {
        for &mode in &cfg.modes {
            let r = bench_point(cfg, mode, n, w, eps)?;
            table.push(vec![
                r.mode.to_string(),
                r.n.to_string(),
                fmt_f64(r.w),
                fmt_f64(r.eps),
                fmt_f64(r.setup_seconds),
                fmt_f64(r.apply_seconds),
                fmt_opt(r.dense_apply_seconds),
            ]);
        }
    }
    Ok(table)
}
