//! Experiment runner for CoBA and its baselines.
//!
//! [`run`] executes one configuration and returns its per-step trace and
//! summary; [`grid_search`] sweeps the damping parameters; [`emit_plots`]
//! draws comparison charts. Outputs are CSV, JSON and SVG.

pub mod config;
pub mod error;
pub mod grid;
pub mod plot;
pub mod record;
pub mod run;

pub use config::{ClockMode, FeasibleSpec, ProblemFamily, RunConfig};
pub use error::{BenchError, Result};
pub use grid::{grid_search, GridCell, GridOutcome};
pub use plot::emit_plots;
pub use record::{rows_from_csv, rows_to_csv, write_record};
pub use run::{run, run_on, Row, RunRecord, Summary};
