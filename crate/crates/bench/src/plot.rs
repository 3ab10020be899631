//! SVG line charts of loss and accuracy against epochs and elapsed time.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{BenchError, Result};
use crate::run::RunRecord;

const SIZE: (u32, u32) = (900, 560);
const PALETTE: [RGBColor; 10] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
    RGBColor(188, 189, 34),
    RGBColor(23, 190, 207),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Metric {
    Loss,
    Accuracy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Epoch,
    Seconds,
}

/// One polyline per record: per-epoch mean loss or closing accuracy.
fn series(record: &RunRecord, metric: Metric, axis: Axis) -> Vec<(f64, f64)> {
    let per_epoch = record.summary.steps_per_epoch.max(1) as usize;
    record
        .rows
        .chunks(per_epoch)
        .filter_map(|chunk| {
            let last = chunk.last()?;
            let x = match axis {
                Axis::Epoch => last.t as f64 / per_epoch as f64,
                Axis::Seconds => last.wall_clock_ns as f64 * 1e-9,
            };
            let y = match metric {
                Metric::Loss => chunk.iter().map(|r| r.loss).sum::<f64>() / chunk.len() as f64,
                Metric::Accuracy => last.accuracy?,
            };
            y.is_finite().then_some((x, y))
        })
        .collect()
}

fn bounds(all: &[Vec<(f64, f64)>], metric: Metric) -> ((f64, f64), (f64, f64)) {
    let points = all.iter().flatten();
    let (mut x1, mut y0, mut y1) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if metric == Metric::Accuracy {
        return ((0.0, x1.max(1e-9)), (0.0, 1.0));
    }
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    let pad = ((y1 - y0) * 0.05).max(1e-12);
    ((0.0, x1.max(1e-9)), (y0 - pad, y1 + pad))
}

fn draw(path: &Path, records: &[RunRecord], metric: Metric, axis: Axis) -> Result<()> {
    let plot_err = |e: &dyn std::fmt::Display| BenchError::Plot(e.to_string());
    let all: Vec<_> = records.iter().map(|r| series(r, metric, axis)).collect();
    let ((x0, x1), (y0, y1)) = bounds(&all, metric);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(&e))?;
    chart
        .configure_mesh()
        .x_desc(match axis {
            Axis::Epoch => "epoch",
            Axis::Seconds => "elapsed seconds",
        })
        .y_desc(match metric {
            Metric::Loss => "loss",
            Metric::Accuracy => "accuracy",
        })
        .draw()
        .map_err(|e| plot_err(&e))?;
    for (i, (record, points)) in records.iter().zip(all).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(2)))
            .map_err(|e| plot_err(&e))?
            .label(record.summary.optimizer.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| plot_err(&e))?;
    root.present().map_err(|e| plot_err(&e))?;
    Ok(())
}

/// File names written by [`emit_plots`], in order.
pub const PLOT_FILES: [&str; 4] =
    ["loss_vs_epoch.svg", "loss_vs_seconds.svg", "accuracy_vs_epoch.svg", "accuracy_vs_seconds.svg"];

/// Writes the four comparison charts into `out`, one series per record.
pub fn emit_plots(records: &[RunRecord], out: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(BenchError::Input("no records to plot".into()));
    }
    std::fs::create_dir_all(out)?;
    let plan = [
        (Metric::Loss, Axis::Epoch),
        (Metric::Loss, Axis::Seconds),
        (Metric::Accuracy, Axis::Epoch),
        (Metric::Accuracy, Axis::Seconds),
    ];
    let mut written = Vec::with_capacity(4);
    for (name, (metric, axis)) in PLOT_FILES.iter().zip(plan) {
        let path = out.join(name);
        let tmp = out.join(format!(".{name}.{}.tmp", std::process::id()));
        draw(&tmp, records, metric, axis)?;
        std::fs::rename(&tmp, &path)?;
        written.push(path);
    }
    Ok(written)
}
