//! Binary factor files.
//!
//! Layout, all little-endian: magic `FSLT`, version `u32`, `n u64`, `w f64`,
//! `epsilon f64`, `alpha f64` (0 unless Tikhonov), `k u64`, kind `u8`,
//! error bound `f64`, one `(rank u64, flag u8)` descriptor per factor matrix
//! (flag 0 real, 1 complex), then each matrix column-major with complex
//! entries stored as interleaved `(re, im)`.
//!
//! Factor matrices per kind: projector and pseudoinverse store `left`,
//! `right`; factorization stores `L1`, `L2`, `U1`, `U2`; Tikhonov stores the
//! single symmetric factor. Prolate and partial Fourier parts are rebuilt
//! from `(n, w)`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::error::SlepianError;
use crate::lowrank::LowRankFactor;
use crate::operators::{
    FastFactorization, FastOperator, FastProjector, FastPseudoinverse, FastTikhonov, OperatorKind,
};
use crate::params::SlepianParams;

pub const MAGIC: [u8; 4] = *b"FSLT";
pub const FORMAT_VERSION: u32 = 1;

/// Refuse descriptors that would allocate more than this many f64 values.
const MAX_VALUES: u64 = 1 << 34;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("file is truncated")]
    Truncated,

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error(transparent)]
    Invalid(#[from] SlepianError),
}

enum Block<'a> {
    Real(&'a DMatrix<f64>),
    Complex(&'a DMatrix<Complex64>),
}

fn blocks(op: &FastOperator) -> Vec<Block<'_>> {
    match op {
        FastOperator::Projector(p) => vec![Block::Real(&p.factor().left), Block::Real(&p.factor().right)],
        FastOperator::Pseudoinverse(p) => vec![Block::Real(&p.factor().left), Block::Real(&p.factor().right)],
        FastOperator::Tikhonov(t) => vec![Block::Real(&t.factor().left)],
        FastOperator::Factorization(f) => vec![
            Block::Complex(&f.correction().left),
            Block::Complex(&f.correction().right),
            Block::Real(&f.projection_factor().left),
            Block::Real(&f.projection_factor().right),
        ],
    }
}

fn expected_flags(kind: OperatorKind) -> &'static [u8] {
    match kind {
        OperatorKind::Projector | OperatorKind::Pseudoinverse => &[0, 0],
        OperatorKind::Tikhonov => &[0],
        OperatorKind::Factorization => &[1, 1, 0, 0],
    }
}

pub fn write_operator<W: Write>(op: &FastOperator, mut out: W) -> Result<(), PersistError> {
    let p = op.params();
    out.write_all(&MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(p.n as u64).to_le_bytes())?;
    out.write_all(&p.w.to_le_bytes())?;
    out.write_all(&p.epsilon.to_le_bytes())?;
    out.write_all(&op.alpha().to_le_bytes())?;
    out.write_all(&(p.k as u64).to_le_bytes())?;
    out.write_all(&[op.kind().code()])?;
    out.write_all(&op.error_bound().to_le_bytes())?;
    let blocks = blocks(op);
    for b in &blocks {
        let (rank, flag) = match b {
            Block::Real(m) => (m.ncols(), 0u8),
            Block::Complex(m) => (m.ncols(), 1u8),
        };
        out.write_all(&(rank as u64).to_le_bytes())?;
        out.write_all(&[flag])?;
    }
    for b in &blocks {
        match b {
            Block::Real(m) => {
                for v in m.as_slice() {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            Block::Complex(m) => {
                for v in m.as_slice() {
                    out.write_all(&v.re.to_le_bytes())?;
                    out.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn save_operator(op: &FastOperator, path: impl AsRef<Path>) -> Result<(), PersistError> {
    let file = File::create(path)?;
    write_operator(op, BufWriter::new(file))
}

pub fn operator_to_bytes(op: &FastOperator) -> Vec<u8> {
    let mut buf = Vec::new();
    write_operator(op, &mut buf).expect("writing to memory cannot fail");
    buf
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], PersistError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => PersistError::Truncated,
            _ => PersistError::Io(e),
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_operator<R: Read>(input: R) -> Result<FastOperator, PersistError> {
    let mut r = Reader { inner: input };
    let magic = r.bytes::<4>()?;
    if magic != MAGIC {
        return Err(PersistError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let n = r.u64()?;
    let w = r.f64()?;
    let epsilon = r.f64()?;
    let alpha = r.f64()?;
    let k = r.u64()?;
    let code = r.u8()?;
    let kind = OperatorKind::from_code(code)
        .ok_or_else(|| PersistError::Malformed(format!("unknown operator kind {code}")))?;
    let error_bound = r.f64()?;

    let n = usize::try_from(n).map_err(|_| PersistError::Malformed(format!("n = {n} too large")))?;
    let k = usize::try_from(k).map_err(|_| PersistError::Malformed(format!("k = {k} too large")))?;
    let params = SlepianParams::new(n, w, epsilon)?.with_k(k)?;

    let flags = expected_flags(kind);
    let mut ranks = Vec::with_capacity(flags.len());
    for &want in flags {
        let rank = r.u64()?;
        let flag = r.u8()?;
        if flag != want {
            return Err(PersistError::Malformed(format!(
                "factor flag {flag} where {want} was expected"
            )));
        }
        let fits = rank
            .checked_mul(n as u64)
            .and_then(|v| v.checked_mul(1 + flag as u64))
            .is_some_and(|v| v <= MAX_VALUES);
        if !fits {
            return Err(PersistError::Malformed(format!("rank {rank} too large")));
        }
        ranks.push(rank as usize);
    }

    let op = match kind {
        OperatorKind::Projector | OperatorKind::Pseudoinverse | OperatorKind::Tikhonov => {
            let left = read_real(&mut r, n, ranks[0])?;
            let right = if kind == OperatorKind::Tikhonov {
                left.clone()
            } else {
                read_real(&mut r, n, ranks[1])?
            };
            let u = LowRankFactor::new(left, right)?;
            match kind {
                OperatorKind::Projector => {
                    FastOperator::Projector(FastProjector::from_parts(&params, u, error_bound)?)
                }
                OperatorKind::Pseudoinverse => {
                    FastOperator::Pseudoinverse(FastPseudoinverse::from_parts(&params, u, error_bound)?)
                }
                _ => FastOperator::Tikhonov(FastTikhonov::from_parts(&params, alpha, u, error_bound)?),
            }
        }
        OperatorKind::Factorization => {
            let l1 = read_complex(&mut r, n, ranks[0])?;
            let l2 = read_complex(&mut r, n, ranks[1])?;
            let l = LowRankFactor::new(l1, l2)?;
            let u1 = read_real(&mut r, n, ranks[2])?;
            let u2 = read_real(&mut r, n, ranks[3])?;
            let u = LowRankFactor::new(u1, u2)?;
            FastOperator::Factorization(FastFactorization::from_parts(&params, l, u, error_bound)?)
        }
    };
    let mut extra = [0u8; 1];
    loop {
        match r.inner.read(&mut extra) {
            Ok(0) => break,
            Ok(_) => return Err(PersistError::Malformed("trailing bytes after the last factor".into())),
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(PersistError::Io(e)),
        }
    }
    Ok(op)
}

fn read_real<R: Read>(r: &mut Reader<R>, n: usize, rank: usize) -> Result<DMatrix<f64>, PersistError> {
    let mut data = Vec::with_capacity(n * rank);
    for _ in 0..n * rank {
        data.push(r.f64()?);
    }
    Ok(DMatrix::from_vec(n, rank, data))
}

fn read_complex<R: Read>(
    r: &mut Reader<R>,
    n: usize,
    rank: usize,
) -> Result<DMatrix<Complex64>, PersistError> {
    let mut data = Vec::with_capacity(n * rank);
    for _ in 0..n * rank {
        let re = r.f64()?;
        let im = r.f64()?;
        data.push(Complex64::new(re, im));
    }
    Ok(DMatrix::from_vec(n, rank, data))
}

pub fn load_operator(path: impl AsRef<Path>) -> Result<FastOperator, PersistError> {
    let file = File::open(path)?;
    read_operator(BufReader::new(file))
}
