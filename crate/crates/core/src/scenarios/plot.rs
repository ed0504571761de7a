use std::path::Path;

use plotters::coord::Shift;
use plotters::prelude::*;

use super::ScenarioError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotFormat {
    /// Axes, captions and labels.
    Svg,
    /// Curves and frames only: the bitmap backend is built without a font stack.
    Png,
}

impl PlotFormat {
    pub fn from_path(path: &Path) -> Option<PlotFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "svg" => Some(PlotFormat::Svg),
            "png" => Some(PlotFormat::Png),
            _ => None,
        }
    }
}

pub const DEFAULT_COLUMNS: [&str; 3] = ["E_total", "S_total", "F_shifted"];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn load(csv: &Path, columns: &[String]) -> Result<Vec<Series>, ScenarioError> {
    let text = std::fs::read_to_string(csv).map_err(|e| ScenarioError::Io { path: csv.to_path_buf(), source: e })?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let t = col("t").ok_or_else(|| ScenarioError::Plot(format!("{} has no `t` column", csv.display())))?;
    let mut wanted = Vec::new();
    for c in columns {
        let i = col(c).ok_or_else(|| ScenarioError::Plot(format!("no column `{c}` in {}", csv.display())))?;
        wanted.push((c.clone(), i));
    }
    let mut out: Vec<Series> = wanted.iter().map(|(n, _)| Series { name: n.clone(), points: Vec::new() }).collect();
    for (ln, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let num = |i: usize| cells.get(i).and_then(|c| c.parse::<f64>().ok());
        let tv = num(t).ok_or_else(|| ScenarioError::Plot(format!("line {}: bad time", ln + 2)))?;
        for (s, (_, i)) in out.iter_mut().zip(&wanted) {
            if let Some(v) = num(*i).filter(|v| v.is_finite()) {
                s.points.push((tv, v));
            }
        }
    }
    Ok(out)
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

fn draw<DB: DrawingBackend>(root: DrawingArea<DB, Shift>, series: &[Series], labels: bool) -> Result<(), String>
where
    DB::ErrorType: 'static,
{
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let panels = root.split_evenly((series.len().max(1), 1));
    for (k, (s, area)) in series.iter().zip(panels).enumerate() {
        let (x0, x1) = range(s.points.iter().map(|p| p.0));
        let (y0, y1) = range(s.points.iter().map(|p| p.1));
        let colour = Palette99::pick(k).to_rgba();
        if labels {
            let mut chart = ChartBuilder::on(&area)
                .caption(&s.name, ("sans-serif", 16))
                .margin(8)
                .x_label_area_size(28)
                .y_label_area_size(70)
                .build_cartesian_2d(x0..x1, y0..y1)
                .map_err(|e| e.to_string())?;
            chart.configure_mesh().x_desc("t").draw().map_err(|e| e.to_string())?;
            chart.draw_series(LineSeries::new(s.points.iter().copied(), colour.stroke_width(2))).map_err(|e| e.to_string())?;
        } else {
            let mut chart =
                ChartBuilder::on(&area).margin(8).build_cartesian_2d(x0..x1, y0..y1).map_err(|e| e.to_string())?;
            chart
                .plotting_area()
                .draw(&Rectangle::new([(x0, y0), (x1, y1)], BLACK.stroke_width(1)))
                .map_err(|e| e.to_string())?;
            chart.draw_series(LineSeries::new(s.points.iter().copied(), colour.stroke_width(2))).map_err(|e| e.to_string())?;
        }
    }
    root.present().map_err(|e| e.to_string())
}

/// Plot the named columns of a record CSV against `t`, one panel per column.
/// The format follows the output extension.
pub fn plot_records(csv: &Path, out: &Path, columns: &[String]) -> Result<PlotFormat, ScenarioError> {
    let format = PlotFormat::from_path(out)
        .ok_or_else(|| ScenarioError::Plot(format!("unsupported image extension on {}; use .svg or .png", out.display())))?;
    let columns: Vec<String> =
        if columns.is_empty() { DEFAULT_COLUMNS.iter().map(|s| s.to_string()).collect() } else { columns.to_vec() };
    let mut series = load(csv, &columns)?;
    series.retain(|s| !s.points.is_empty());
    if series.is_empty() {
        return Err(ScenarioError::Plot("no finite values in the requested columns".into()));
    }
    let size = (900, 260 * series.len() as u32);
    let result = match format {
        PlotFormat::Svg => draw(SVGBackend::new(out, size).into_drawing_area(), &series, true),
        PlotFormat::Png => draw(BitMapBackend::new(out, size).into_drawing_area(), &series, false),
    };
    result.map_err(ScenarioError::Plot)?;
    Ok(format)
}
