use std::f64::consts::PI;

use fastslepian::dpss::{DpssSolver, DENSE_GUARD};
use fastslepian::operators::{dense_reference, DenseKind};
use fastslepian::{FastProjector, FastPseudoinverse, SlepianParams};
use nalgebra::DVector;

use crate::error::CliResult;
use crate::output::{fmt_f64, fmt_opt, Table};

pub const PREDICT_HEADER: [&str; 9] = [
    "n",
    "w",
    "eps",
    "k",
    "b_norm",
    "a_norm",
    "a_max_abs",
    "residual",
    "dense_deviation",
];

/// Right-hand side for predicting sample `n` from samples `0..n`:
/// `b[m] = sin(2 pi w (n - m)) / (pi (n - m))`.
pub fn prediction_rhs(n: usize, w: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            let d = (n - m) as f64;
            (2.0 * PI * w * d).sin() / (PI * d)
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictRow {
    pub n: usize,
    pub w: f64,
    pub eps: f64,
    pub k: usize,
    pub b_norm: f64,
    pub a_norm: f64,
    pub a_max_abs: f64,
    /// `|| P_K (B a - b) ||` with `P_K` the fast projector.
    pub residual: f64,
    /// `|| a - a_dense || / || b ||`, where the dense oracle is available.
    pub dense_deviation: Option<f64>,
    pub coefficients: Vec<f64>,
}

/// Prediction filter `a = B_K^+ b` by the fast pseudoinverse.
pub fn linear_predict(
    n: usize,
    w: f64,
    eps: f64,
    k: Option<usize>,
    dense_guard: usize,
) -> CliResult<PredictRow> {
    let mut params = SlepianParams::new(n, w, eps)?;
    if let Some(k) = k {
        params = params.with_k(k)?;
    }
    let mut solver = DpssSolver::new(n, w)?;
    let pinv = FastPseudoinverse::with_solver(&params, &mut solver)?;
    let proj = FastProjector::with_solver(&params, &mut solver)?;
    let b = prediction_rhs(n, w);
    let a = pinv.apply(&b)?;
    let ba = solver.b_op().apply_real(&a)?;
    let diff: Vec<f64> = ba.iter().zip(&b).map(|(x, y)| x - y).collect();
    let residual = norm(&proj.project(&diff)?);
    let b_norm = norm(&b);

    let dense_deviation = if n <= dense_guard.min(DENSE_GUARD) {
        let dense = dense_reference(DenseKind::Pinv, &params)? * DVector::from_column_slice(&b);
        let dev: Vec<f64> = a.iter().zip(dense.iter()).map(|(x, y)| x - y).collect();
        Some(norm(&dev) / b_norm)
    } else {
        None
    };

    Ok(PredictRow {
        n,
        w,
        eps,
        k: params.k,
        b_norm,
        a_norm: norm(&a),
        a_max_abs: a.iter().fold(0.0, |m, v| m.max(v.abs())),
        residual,
        dense_deviation,
        coefficients: a,
    })
}

pub fn predict_table(row: &PredictRow) -> Table {
    let mut table = Table::new(&PREDICT_HEADER);
    table.push(vec![
        row.n.to_string(),
        fmt_f64(row.w),
        fmt_f64(row.eps),
        row.k.to_string(),
        fmt_f64(row.b_norm),
        fmt_f64(row.a_norm),
        fmt_f64(row.a_max_abs),
        fmt_f64(row.residual),
        fmt_opt(row.dense_deviation),
    ]);
    table
}
