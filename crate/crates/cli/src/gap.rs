use fastslepian::dpss::DpssSolver;
use fastslepian::params::{transition_count_asymptotic, transition_count_bound};

use crate::error::CliResult;
use crate::grid::ExperimentGrid;
use crate::output::{fmt_f64, Table};

pub const GAP_HEADER: [&str; 6] = ["n", "w", "eps", "count", "cor1_bound", "asymptotic"];

/// Number of eigenvalues in `(eps, 1 - eps)` per grid point, next to the
/// certified bound and the large-`n` asymptote.
pub fn gap_count(grid: &ExperimentGrid) -> CliResult<Table> {
    let mut table = Table::new(&GAP_HEADER);
    for &n in &grid.n_values {
        for &w in &grid.w_values {
            let mut solver = DpssSolver::new(n, w)?;
            for &eps in &grid.eps_values {
                let count = solver.window(eps, 1.0 - eps)?.len();
                table.push(vec![
                    n.to_string(),
                    fmt_f64(w),
                    fmt_f64(eps),
                    count.to_string(),
                    fmt_f64(transition_count_bound(n, eps)),
                    fmt_f64(transition_count_asymptotic(n, eps)),
                ]);
            }
        }
    }
    Ok(table)
}
