//! Cross-product sweep over the CoBA damping parameters `(M, a)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{BenchError, Result};
use crate::run::run;

/// Damping scales swept in the reference protocol.
pub const M_GRID: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Damping exponents swept in the reference protocol.
pub const A_GRID: [f64; 4] = [1.0 + 1e-4, 1.0 + 1e-5, 1.0 + 1e-6, 1.0 + 1e-7];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub damping: f64,
    pub exponent: f64,
    pub final_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridOutcome {
    pub best: RunConfig,
    pub best_cell: GridCell,
    /// Every cell, in `M`-major grid order.
    pub cells: Vec<GridCell>,
}

impl GridOutcome {
    /// `M,a,final_loss` table, one row per cell.
    pub fn table(&self) -> String {
        let mut out = String::from("M,a,final_loss\n");
        for c in &self.cells {
            let _ = writeln!(out, "{:?},{:?},{:.16e}", c.damping, c.exponent, c.final_loss);
        }
        out
    }
}

/// Smaller loss wins, then smaller `M`, then smaller `a`. NaN losses lose.
fn better(a: &GridCell, b: &GridCell) -> bool {
    let key = |c: &GridCell| if c.final_loss.is_nan() { f64::INFINITY } else { c.final_loss };
    (key(a), a.damping, a.exponent)
        .partial_cmp(&(key(b), b.damping, b.exponent))
        .is_some_and(|o| o.is_lt())
}

pub fn select_best(cells: &[GridCell]) -> Option<GridCell> {
    cells.iter().copied().reduce(|best, c| if better(&c, &best) { c } else { best })
}

/// Runs every `(M, a)` pair on up to `jobs` threads and keeps the best.
pub fn grid_search(base: &RunConfig, m_grid: &[f64], a_grid: &[f64], jobs: usize) -> Result<GridOutcome> {
    if m_grid.is_empty() || a_grid.is_empty() {
        return Err(BenchError::Input("grids must be nonempty".into()));
    }
    let configs: Vec<RunConfig> = m_grid
        .iter()
        .flat_map(|&m| a_grid.iter().map(move |&a| (m, a)))
        .map(|(m, a)| {
            let mut c = base.clone();
            c.hyper.damping = m;
            c.hyper.damping_exponent = a;
            c
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::Input(e.to_string()))?;
    let cells = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                run(c).map(|r| GridCell {
                    damping: c.hyper.damping,
                    exponent: c.hyper.damping_exponent,
                    final_loss: r.summary.final_loss,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let best_cell = select_best(&cells).expect("nonempty grid");
    let best = configs[cells.iter().position(|c| *c == best_cell).expect("cell present")].clone();
    Ok(GridOutcome { best, best_cell, cells })
}
