use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use coba::OptimizerName;
use coba_bench::grid::{A_GRID, M_GRID};
use coba_bench::record::output_root;
use coba_bench::{emit_plots, grid_search, run, write_record, RunConfig, RunRecord};

#[derive(Parser)]
#[command(name = "coba-bench", version, about = "Run CoBA and its baselines on synthetic problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimizer and write its CSV trace and JSON summary.
    Run(Overrides),
    /// Sweep the damping parameters (M, a) and report the best cell.
    Grid {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated damping scales.
        #[arg(long = "M-grid", value_delimiter = ',', default_values_t = M_GRID)]
        m_grid: Vec<f64>,
        /// Comma-separated damping exponents.
        #[arg(long = "a-grid", value_delimiter = ',', default_values_t = A_GRID)]
        a_grid: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run several optimizers on the same problem and draw comparison charts.
    Compare {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated optimizer names; defaults to the full roster.
        #[arg(long, value_delimiter = ',')]
        opts: Vec<String>,
    },
}

#[derive(Args)]
struct Overrides {
    /// Flat `key = value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    opt: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long = "T")]
    steps: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// `constant` or `sqrt`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    beta1: Option<String>,
    #[arg(long)]
    beta2: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "M")]
    damping: Option<String>,
    #[arg(long = "a")]
    exponent: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// `full`, `box:B` or `ball:r`.
    #[arg(long)]
    feasible: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    theory: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `monotonic` or `logical`.
    #[arg(long)]
    clock: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    allow_degenerate: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("opt", &self.opt),
            ("problem", &self.problem),
            ("dim", &self.dim),
            ("classes", &self.classes),
            ("hidden", &self.hidden),
            ("T", &self.steps),
            ("epochs", &self.epochs),
            ("seed", &self.seed),
            ("schedule", &self.schedule),
            ("alpha", &self.alpha),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("eps", &self.eps),
            ("M", &self.damping),
            ("a", &self.exponent),
            ("lambda", &self.lambda),
            ("feasible", &self.feasible),
            ("theory", &self.theory),
            ("out", &self.out),
            ("clock", &self.clock),
            ("allow_degenerate", &self.allow_degenerate),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

fn report(record: &RunRecord, config: &RunConfig) -> Result<()> {
    let dir = output_root(config.out.as_deref());
    let (csv, json) = write_record(record, &dir, &config.stem())?;
    let s = &record.summary;
    print!("{}: final loss {:.6e}", s.optimizer, s.final_loss);
    if let Some(acc) = s.final_accuracy {
        print!(", accuracy {acc:.4}");
    }
    if let Some(report) = &s.theory {
        let b = &report.bound;
        print!(", regret {:.6e} vs bound {:.6e}", b.regret, b.total());
        print!(", checks {}", if report.all_hold() { "pass" } else { "FAIL" });
    }
    println!("\n  {}\n  {}", csv.display(), json.display());
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let mut all_passed = true;
    match cli.command {
        Command::Run(o) => {
            let config = o.resolve()?;
            let record = run(&config)?;
            report(&record, &config)?;
            all_passed = record.passed();
        }
        Command::Grid { overrides, m_grid, a_grid, jobs } => {
            let base = overrides.resolve()?;
            let outcome = grid_search(&base, &m_grid, &a_grid, jobs)?;
            let dir = output_root(base.out.as_deref());
            let table = dir.join(format!("grid-{}.csv", base.stem()));
            coba_bench::record::write_atomic(&table, outcome.table().as_bytes())?;
            print!("{}", outcome.table());
            println!(
                "best: M = {:?}, a = {:?}, final loss {:.6e}\n  {}",
                outcome.best_cell.damping,
                outcome.best_cell.exponent,
                outcome.best_cell.final_loss,
                table.display()
            );
        }
        Command::Compare { overrides, opts } => {
            let base = overrides.resolve()?;
            let names: Vec<String> = if opts.is_empty() {
                OptimizerName::ROSTER.iter().map(|s| s.to_string()).collect()
            } else {
                opts
            };
            let mut records = Vec::with_capacity(names.len());
            for name in &names {
                let mut config = base.clone();
                config.set("opt", name)?;
                let record = run(&config)?;
                report(&record, &config)?;
                all_passed &= record.passed();
                records.push(record);
            }
            let dir = output_root(base.out.as_deref()).join(format!("compare-{}-s{}", base.problem, base.seed));
            for path in emit_plots(&records, &dir)? {
                println!("  {}", path.display());
            }
        }
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
