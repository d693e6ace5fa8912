use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Parameter sweep shared by the grid-driven commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub n_values: Vec<usize>,
    pub w_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn new(
        n_values: Vec<usize>,
        w_values: Vec<f64>,
        eps_values: Vec<f64>,
        trials: usize,
        seed: u64,
    ) -> CliResult<Self> {
        if n_values.is_empty() || w_values.is_empty() || eps_values.is_empty() {
            return Err(CliError::Validation("grid lists must be non-empty".into()));
        }
        if let Some(n) = n_values.iter().find(|&&n| n < 2) {
            return Err(CliError::Validation(format!("n must be at least 2, got {n}")));
        }
        if let Some(w) = w_values.iter().find(|&&w| !(w > 0.0 && w < 0.5)) {
            return Err(CliError::Validation(format!("w must lie in (0, 1/2), got {w}")));
        }
        if let Some(e) = eps_values.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return Err(CliError::Validation(format!("eps must lie in (0, 1/2), got {e}")));
        }
        if trials == 0 {
            return Err(CliError::Validation("trials must be at least 1".into()));
        }
        Ok(Self {
            n_values,
            w_values,
            eps_values,
            trials,
            seed,
        })
    }

    /// Grid points in `(n, w, eps)` order, `eps` varying fastest.
    pub fn points(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &n in &self.n_values {
            for &w in &self.w_values {
                for &eps in &self.eps_values {
                    out.push((n, w, eps));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n_values.len() * self.w_values.len() * self.eps_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Stream ids that keep the random draws of different experiments apart.
pub mod streams {
    pub const FOURIER_EXTENSION: u64 = 1;
    pub const BENCH: u64 = 2;
    pub const LOAD_CHECK: u64 = 3;
}

/// ChaCha8 generator seeded from `seed` on its own `stream`.
pub fn experiment_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
