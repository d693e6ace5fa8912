use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fastslepian::SlepianParams;
use fastslepian_cli::bench::{bench, BenchConfig, BenchMode, DEFAULT_DENSE_GUARD};
use fastslepian_cli::fourier_ext::{extension_table, fourier_extension, FourierExtensionConfig, FunctionChoice};
use fastslepian_cli::gap::gap_count;
use fastslepian_cli::output::Table;
use fastslepian_cli::predict::{linear_predict, predict_table};
use fastslepian_cli::store::{load_check, precompute};
use fastslepian_cli::{CliResult, ExperimentGrid};

/// Experiments with fast Slepian projections and prolate solves.
///
/// Every command writes one CSV table with a header row. Exit status is 0 on
/// success, 1 on invalid input and 2 on I/O failure.
#[derive(Debug, Parser)]
#[command(name = "fslt", version)]
struct Cli {
    /// Seed of the ChaCha8 generator behind all random draws.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the CSV here instead of to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Largest size that gets a dense comparison.
    #[arg(long, global = true, default_value_t = DEFAULT_DENSE_GUARD)]
    dense_guard: usize,

    /// Repetitions per timing; the median is reported.
    #[arg(long, global = true, default_value_t = 5)]
    trials: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count eigenvalues of the prolate matrix inside (eps, 1 - eps).
    ///
    /// Columns: n, w, eps, count (eigenvalues strictly inside the window),
    /// cor1_bound ((8/pi^2 log(8n) + 12) log(15/eps)), asymptotic
    /// (2/pi^2 log(n) log(1/eps - 1)).
    GapCount {
        #[arg(long, value_delimiter = ',', default_values_t = [16, 64, 256, 1024, 4096, 16384, 65536])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25])]
        w: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-6, 1e-9, 1e-12])]
        eps: Vec<f64>,
    },

    /// Time setup and application of the fast operators.
    ///
    /// Columns: mode (project, factorize, pinv or tikhonov), n, w, eps,
    /// setup_seconds, apply_seconds, dense_apply_seconds (dense n x n
    /// matrix-vector product for the same map; empty above --dense-guard).
    /// All times are medians over --trials.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [256, 1024, 4096, 16384, 65536])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25])]
        w: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-6, 1e-9, 1e-12])]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values = ["project", "factorize", "pinv", "tikhonov"])]
        modes: Vec<BenchMode>,
        /// Tikhonov weight.
        #[arg(long, default_value_t = 1e-8)]
        alpha: f64,
        /// Save every operator here and check that it reloads byte-identically.
        #[arg(long)]
        factor_dir: Option<PathBuf>,
    },

    /// Fourier series versus Fourier extension of a test function on [-1, 1].
    ///
    /// Columns: M (truncation order, 2M + 1 terms), method (fourier,
    /// ext_exact_pinv, ext_fast_pinv, ext_exact_tik, ext_fast_tik), rel_rms
    /// (relative RMS error on a uniform grid of [-1, 1]), seconds (coefficient
    /// quadrature plus solve, one-time factorizations excluded).
    FourierExt {
        #[arg(long = "m", value_delimiter = ',', default_values_t = [5, 10, 20, 40, 80, 160, 320, 640])]
        m_values: Vec<usize>,
        /// Extension half-period T.
        #[arg(long, default_value_t = 1.5)]
        t_ext: f64,
        /// Exact pseudoinverse drops eigenvalues below this.
        #[arg(long, default_value_t = 1e-4)]
        pinv_threshold: f64,
        /// Tolerance of the fast methods.
        #[arg(long, default_value_t = 1e-5)]
        fast_eps: f64,
        /// Tikhonov weight.
        #[arg(long, default_value_t = 1e-8)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        eval_points: usize,
        /// Replace the random test function with this constant.
        #[arg(long)]
        constant: Option<f64>,
    },

    /// Prediction filter a = B_K^+ b for sample n from samples 0..n.
    ///
    /// Columns: n, w, eps, k, b_norm, a_norm, a_max_abs, residual (norm of
    /// B a - b projected on the top-k Slepian subspace), dense_deviation
    /// (norm of a minus the dense solution over norm of b; empty above the
    /// dense guard).
    LinearPredict {
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        w: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Subspace dimension; defaults to round(2 n w).
        #[arg(long)]
        k: Option<usize>,
    },

    /// Build an operator and save its factors.
    ///
    /// Columns: kind, n, w, eps, k, alpha, error_bound, bytes, verified
    /// (empty).
    Precompute {
        /// One of project, factorize, pinv, tikhonov.
        #[arg(long)]
        kind: BenchMode,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.25)]
        w: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Subspace dimension; defaults to round(2 n w).
        #[arg(long)]
        k: Option<usize>,
        /// Tikhonov weight.
        #[arg(long, default_value_t = 1e-8)]
        alpha: f64,
        /// Factor file to write.
        path: PathBuf,
    },

    /// Load a factor file and report its header.
    ///
    /// Columns as for precompute; verified is true when --verify rebuilt an
    /// identical operator.
    LoadCheck {
        /// Factor file to read.
        path: PathBuf,
        /// Rebuild the operator from the header and compare bytes and output.
        #[arg(long)]
        verify: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let table: Table = match cli.command {
        Command::GapCount { n, w, eps } => gap_count(&ExperimentGrid::new(n, w, eps, cli.trials, cli.seed)?)?,
        Command::Bench {
            n,
            w,
            eps,
            modes,
            alpha,
            factor_dir,
        } => {
            if let Some(dir) = &factor_dir {
                std::fs::create_dir_all(dir)?;
            }
            bench(&BenchConfig {
                grid: ExperimentGrid::new(n, w, eps, cli.trials, cli.seed)?,
                modes,
                alpha,
                dense_guard: cli.dense_guard,
                factor_dir,
            })?
        }
        Command::FourierExt {
            m_values,
            t_ext,
            pinv_threshold,
            fast_eps,
            alpha,
            eval_points,
            constant,
        } => {
            let mut cfg = FourierExtensionConfig {
                t_ext,
                m_values,
                pinv_threshold,
                fast_eps,
                alpha,
                eval_points,
                dense_guard: cli.dense_guard,
                ..FourierExtensionConfig::default()
            };
            if let Some(c) = constant {
                cfg.function = FunctionChoice::Constant(c);
            }
            extension_table(&fourier_extension(&cfg, cli.seed)?)
        }
        Command::LinearPredict { n, w, eps, k } => predict_table(&linear_predict(n, w, eps, k, cli.dense_guard)?),
        Command::Precompute {
            kind,
            n,
            w,
            eps,
            k,
            alpha,
            path,
        } => {
            let mut params = SlepianParams::new(n, w, eps)?;
            if let Some(k) = k {
                params = params.with_k(k)?;
            }
            precompute(kind, &params, alpha, &path)?.1
        }
        Command::LoadCheck { path, verify } => load_check(&path, verify, cli.seed)?.1,
    };
    match &cli.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            table.write(&mut file)?;
            file.flush()?;
        }
        None => table.write(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

