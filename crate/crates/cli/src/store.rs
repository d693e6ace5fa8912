use std::path::Path;

use fastslepian::persist::{load_operator, operator_to_bytes, save_operator};
use fastslepian::{FastOperator, SlepianParams};
use rand::Rng;

use crate::bench::BenchMode;
use crate::error::{CliError, CliResult};
use crate::grid::{experiment_rng, streams};
use crate::output::{fmt_f64, Table};

pub const STORE_HEADER: [&str; 9] = [
    "kind",
    "n",
    "w",
    "eps",
    "k",
    "alpha",
    "error_bound",
    "bytes",
    "verified",
];

fn mode_of(op: &FastOperator) -> BenchMode {
    BenchMode::ALL
        .into_iter()
        .find(|m| m.kind() == op.kind())
        .expect("every kind has a mode")
}

fn summary(op: &FastOperator, bytes: usize, verified: Option<bool>) -> Table {
    let p = op.params();
    let mut table = Table::new(&STORE_HEADER);
    table.push(vec![
        mode_of(op).to_string(),
        p.n.to_string(),
        fmt_f64(p.w),
        fmt_f64(p.epsilon),
        p.k.to_string(),
        fmt_f64(op.alpha()),
        fmt_f64(op.error_bound()),
        bytes.to_string(),
        verified.map(|v| v.to_string()).unwrap_or_default(),
    ]);
    table
}

/// Builds the operator and writes its factor file.
pub fn precompute(
    mode: BenchMode,
    params: &SlepianParams,
    alpha: f64,
    path: &Path,
) -> CliResult<(FastOperator, Table)> {
    let op = FastOperator::build(mode.kind(), params, alpha)?;
    save_operator(&op, path)?;
    let bytes = std::fs::metadata(path)?.len() as usize;
    let table = summary(&op, bytes, None);
    Ok((op, table))
}

/// Loads a factor file. With `verify`, rebuilds the operator from the stored
/// parameters and requires identical bytes and bit-identical application to
/// a seeded random vector.
pub fn load_check(path: &Path, verify: bool, seed: u64) -> CliResult<(FastOperator, Table)> {
    let op = load_operator(path)?;
    let bytes = operator_to_bytes(&op);
    let verified = if verify {
        let rebuilt = FastOperator::build(op.kind(), op.params(), op.alpha())?;
        let mut rng = experiment_rng(seed, streams::LOAD_CHECK);
        let x: Vec<f64> = (0..op.params().n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let same_apply = op
            .apply_real(&x)?
            .iter()
            .zip(&rebuilt.apply_real(&x)?)
            .all(|(a, b)| a.to_bits() == b.to_bits());
        let ok = same_apply && operator_to_bytes(&rebuilt) == bytes;
        if !ok {
            return Err(CliError::Validation(format!(
                "{} does not match the operator rebuilt from its header",
                path.display()
            )));
        }
        Some(true)
    } else {
        None
    };
    let table = summary(&op, bytes.len(), verified);
    Ok((op, table))
}
