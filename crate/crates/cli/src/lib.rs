//! Experiment driver for the fastslepian library. Every command produces a
//! CSV [`output::Table`].

pub mod bench;
pub mod error;
pub mod fourier_ext;
pub mod gap;
pub mod grid;
pub mod output;
pub mod predict;
pub mod store;

pub use error::{CliError, CliResult};
pub use grid::ExperimentGrid;
