//! CSV traces, JSON summaries and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::run::{Row, RunRecord, Summary};

pub const CSV_HEADER: [&str; 9] =
    ["t", "alpha_t", "loss", "cum_loss", "regret", "accuracy", "gamma", "dnorm", "wall_clock_ns"];

/// Environment variable that overrides the output root.
pub const OUT_ENV: &str = "COBA_BENCH_OUT";
pub const DEFAULT_OUT: &str = "results";

/// `COBA_BENCH_OUT` if set, else `configured`, else `results`.
pub fn output_root(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root),
        _ => configured.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf),
    }
}

/// Seventeen significant digits: enough to read every `f64` back exactly.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

pub fn rows_to_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            float(r.alpha_t),
            float(r.loss),
            float(r.cum_loss),
            optional(r.regret),
            optional(r.accuracy),
            float(r.gamma),
            float(r.dnorm),
            r.wall_clock_ns.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| BenchError::Io(e.into_error()))
}

pub fn rows_from_csv(bytes: &[u8]) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::Input(format!("unexpected CSV header: {header:?}")));
    }
    let field = |rec: &csv::StringRecord, i: usize| -> Result<f64> {
        rec[i]
            .parse()
            .map_err(|_| BenchError::Input(format!("bad number `{}` in column {}", &rec[i], CSV_HEADER[i])))
    };
    let opt = |rec: &csv::StringRecord, i: usize| -> Result<Option<f64>> {
        if rec[i].is_empty() {
            Ok(None)
        } else {
            field(rec, i).map(Some)
        }
    };
    let int = |rec: &csv::StringRecord, i: usize| -> Result<u64> {
        rec[i]
            .parse()
            .map_err(|_| BenchError::Input(format!("bad integer `{}` in column {}", &rec[i], CSV_HEADER[i])))
    };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(Row {
                t: int(&rec, 0)?,
                alpha_t: field(&rec, 1)?,
                loss: field(&rec, 2)?,
                cum_loss: field(&rec, 3)?,
                regret: opt(&rec, 4)?,
                accuracy: opt(&rec, 5)?,
                gamma: field(&rec, 6)?,
                dnorm: field(&rec, 7)?,
                wall_clock_ns: int(&rec, 8)?,
            })
        })
        .collect()
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| BenchError::Input(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn summary_to_json(summary: &Summary) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(summary)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`; returns both paths.
pub fn write_record(record: &RunRecord, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_atomic(&csv_path, &rows_to_csv(&record.rows)?)?;
    write_atomic(&json_path, &summary_to_json(&record.summary)?)?;
    Ok((csv_path, json_path))
}
