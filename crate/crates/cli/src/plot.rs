//! SVG plots of result files.
//!
//! Plots are rendered into memory first, so a malformed or empty input never
//! leaves a file behind.

use std::fs;
use std::path::Path;

use nlpl::calculus::{read_dump, Region};
use nlpl::horizon::SWEEP_CSV_HEADER;
use plotters::prelude::*;

use crate::error::CliError;

const SIZE: (u32, u32) = (720, 480);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Relative eigenvalue error against δ on log-log axes, from a sweep CSV.
    SweepError,
    /// Line plot (1D, collar shaded) or heat map (2D) of a field dump.
    Field,
}

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Plot(e.to_string())
}

/// Renders `input` as `kind` and writes the SVG to `output`.
pub fn emit_plot(input: &Path, kind: PlotKind, output: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let svg = match kind {
        PlotKind::SweepError => sweep_error_svg(&text)?,
        PlotKind::Field => field_svg(&text)?,
    };
    fs::write(output, svg).map_err(|e| CliError::io(output, e))
}

/// `(δ, |λ − λ_ref| / λ_ref)` for every data row of a sweep CSV.
pub fn sweep_errors(csv: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some(h) if h.trim() == SWEEP_CSV_HEADER => {}
        Some(h) => return Err(CliError::Plot(format!("unexpected sweep header {h:?}"))),
        None => return Err(CliError::Plot("empty sweep table".into())),
    }
    let cols: Vec<&str> = SWEEP_CSV_HEADER.split(',').collect();
    let col = |name: &str| cols.iter().position(|c| *c == name).expect("header column");
    let (d, l, r) = (col("delta"), col("lambda"), col("ref_lambda"));
    let mut out = Vec::new();
    for line in lines {
        let fields: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Plot(format!("malformed sweep row {line:?}")))?;
        if fields.len() != cols.len() {
            return Err(CliError::Plot(format!("sweep row has {} columns", fields.len())));
        }
        out.push((fields[d], ((fields[l] - fields[r]) / fields[r]).abs()));
    }
    if out.is_empty() {
        return Err(CliError::Plot("sweep table has no rows".into()));
    }
    Ok(out)
}

/// Log-axis bounds padded by a quarter decade.
fn log_range(values: impl Iterator<Item = f64>) -> std::ops::Range<f64> {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    let pad = 10f64.powf(0.25);
    lo / pad..hi * pad
}

pub fn sweep_error_svg(csv: &str) -> Result<String, CliError> {
    let points: Vec<(f64, f64)> = sweep_errors(csv)?.into_iter().filter(|(d, e)| *d > 0.0 && *e > 0.0).collect();
    if points.is_empty() {
        return Err(CliError::Plot("no positive errors to draw on log axes".into()));
    }
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(16)
            .caption("eigenvalue error vs horizon", ("sans-serif", 20))
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(
                log_range(points.iter().map(|p| p.0)).log_scale(),
                log_range(points.iter().map(|p| p.1)).log_scale(),
            )
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("delta")
            .y_desc("relative error")
            .x_label_formatter(&|v| format!("{v:.3e}"))
            .y_label_formatter(&|v| format!("{v:.1e}"))
            .draw()
            .map_err(plot_err)?;
        chart.draw_series(LineSeries::new(points.clone(), &BLUE)).map_err(plot_err)?;
        chart
            .draw_series(points.iter().map(|p| Circle::new(*p, 4, BLUE.filled())))
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(buf)
}

pub fn field_svg(dump: &str) -> Result<String, CliError> {
    let d = read_dump::<f64>(dump)?;
    if d.components.len() != 1 {
        return Err(CliError::Plot("only scalar fields are plotted".into()));
    }
    let grid = &d.grid;
    let values = &d.components[0];
    let shown: Vec<usize> = (0..grid.len()).filter(|i| grid.region(*i) != Region::Exterior).collect();
    if shown.is_empty() {
        return Err(CliError::Plot("field has no nodes in the domain or collar".into()));
    }
    match grid.dim() {
        1 => line_svg(grid, values, &shown),
        _ => heat_svg(grid, values, &shown),
    }
}

fn line_svg(grid: &nlpl::calculus::Grid<f64>, values: &[f64], shown: &[usize]) -> Result<String, CliError> {
    let h = grid.h();
    let pts: Vec<(f64, f64)> = shown.iter().map(|i| (grid.node(*i)[0], values[*i])).collect();
    let (x0, x1) = (pts[0].0 - h / 2.0, pts[pts.len() - 1].0 + h / 2.0);
    let (ylo, yhi) = pts.iter().fold((0.0f64, 0.0f64), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let pad = 0.05 * (yhi - ylo).max(1e-300);
    let (y0, y1) = (ylo - pad, yhi + pad);
    // contiguous collar runs, as x intervals
    let mut collar: Vec<(f64, f64)> = Vec::new();
    for i in shown {
        if grid.region(*i) != Region::Collar {
            continue;
        }
        let x = grid.node(*i)[0];
        match collar.last_mut() {
            Some(run) if (x - h / 2.0 - run.1).abs() <= 1e-9 * h => run.1 = x + h / 2.0,
            _ => collar.push((x - h / 2.0, x + h / 2.0)),
        }
    }
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(16)
            .caption("eigenfunction (collar shaded)", ("sans-serif", 20))
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc("x").y_desc("u").draw().map_err(plot_err)?;
        chart
            .draw_series(
                collar
                    .iter()
                    .map(|(a, b)| Rectangle::new([(*a, y0), (*b, y1)], RGBColor(200, 200, 200).mix(0.6).filled())),
            )
            .map_err(plot_err)?;
        chart.draw_series(LineSeries::new(pts, &BLUE)).map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(buf)
}

fn heat_svg(grid: &nlpl::calculus::Grid<f64>, values: &[f64], shown: &[usize]) -> Result<String, CliError> {
    let h = grid.h();
    let scale = shown.iter().fold(0.0f64, |m, i| m.max(values[*i].abs())).max(1e-300);
    let xs = shown.iter().map(|i| grid.node(*i)[0]);
    let ys = shown.iter().map(|i| grid.node(*i)[1]);
    let bounds = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let (x0, x1) = bounds(&mut xs.into_iter());
    let (y0, y1) = bounds(&mut ys.into_iter());
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(16)
            .caption("field (red > 0, blue < 0; collar outlined)", ("sans-serif", 20))
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(x0 - h / 2.0..x1 + h / 2.0, y0 - h / 2.0..y1 + h / 2.0)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc("x").y_desc("y").draw().map_err(plot_err)?;
        chart
            .draw_series(shown.iter().map(|i| {
                let [x, y] = grid.node(*i);
                let t = values[*i] / scale;
                let fade = |c: f64| (255.0 * (1.0 - c.abs())).round() as u8;
                let color = if t >= 0.0 {
                    RGBColor(255, fade(t), fade(t))
                } else {
                    RGBColor(fade(t), fade(t), 255)
                };
                let cell = [(x - h / 2.0, y - h / 2.0), (x + h / 2.0, y + h / 2.0)];
                if grid.region(*i) == Region::Collar {
                    Rectangle::new(cell, RGBColor(120, 120, 120).stroke_width(1))
                } else {
                    Rectangle::new(cell, color.filled())
                }
            }))
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    Ok(buf)
}
