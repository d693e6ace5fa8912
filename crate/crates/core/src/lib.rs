//! Fast projections, factorizations and least-squares solves for the Slepian
//! basis, built from "circulant plus low rank" decompositions of the prolate
//! matrix.

pub mod dpss;
pub mod error;
pub mod fft_kernels;
pub mod lowrank;
pub mod operators;
pub mod params;
pub mod persist;
pub mod quadrature;

pub use error::{Result, SlepianError};
pub use operators::{
    FastFactorization, FastOperator, FastProjector, FastPseudoinverse, FastTikhonov, OperatorKind,
};
pub use params::SlepianParams;
