//! Sweep artifacts: the per-cell CSV table and the SVG summary chart.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{OperatorKind, Representation};
use super::sweep::{aggregate, AggregatePoint, SweepCell};
use crate::error::{Error, Result};
use crate::navsim::World;

const CSV_COLUMNS: &str = "world,representation,operator,normalize,gamma,beta,epsilon,seed,\
                           batch_size,success_fraction,iterations,converged,wall_time_s,error";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Write the sweep table. Columns are fixed, rows arrive pre-sorted by
/// (γ, β, seed) from the sweep; all numbers use shortest round-trip
/// formatting, so identical tables produce byte-identical files.
pub fn write_csv(cells: &[SweepCell], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for c in cells {
        let error = c
            .error
            .as_deref()
            .unwrap_or("")
            .replace(',', ";")
            .replace('\n', " ");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.world,
            c.representation,
            c.operator,
            c.normalize,
            c.gamma,
            opt(c.beta),
            opt(c.epsilon),
            c.seed,
            c.batch_size,
            opt(c.success_fraction),
            c.iterations,
            c.converged,
            opt(c.wall_time_s),
            error
        )
        .expect("write to string");
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Parse a sweep table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepCell>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty CSV", path.display())))?;
    if header != CSV_COLUMNS {
        return Err(Error::Data(format!(
            "{}: unexpected CSV header {header:?}",
            path.display()
        )));
    }
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        cells.push(parse_row(line).ok_or_else(|| {
            Error::Data(format!("{}: bad row on line {}", path.display(), i + 2))
        })?);
    }
    Ok(cells)
}

fn parse_row(line: &str) -> Option<SweepCell> {
    let fields: Vec<&str> = line.splitn(14, ',').collect();
    if fields.len() != 14 {
        return None;
    }
    let opt_f64 = |s: &str| -> Option<Option<f64>> {
        if s.is_empty() {
            Some(None)
        } else {
            s.parse::<f64>().ok().map(Some)
        }
    };
    Some(SweepCell {
        world: fields[0].parse::<World>().ok()?,
        representation: fields[1].parse::<Representation>().ok()?,
        operator: fields[2].parse::<OperatorKind>().ok()?,
        normalize: fields[3].parse::<bool>().ok()?,
        gamma: fields[4].parse::<f64>().ok()?,
        beta: opt_f64(fields[5])?,
        epsilon: opt_f64(fields[6])?,
        seed: fields[7].parse::<u64>().ok()?,
        batch_size: fields[8].parse::<usize>().ok()?,
        success_fraction: opt_f64(fields[9])?,
        iterations: fields[10].parse::<usize>().ok()?,
        converged: fields[11].parse::<bool>().ok()?,
        wall_time_s: opt_f64(fields[12])?,
        error: if fields[13].is_empty() {
            None
        } else {
            Some(fields[13].to_string())
        },
    })
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 250.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn series_label(p: &AggregatePoint) -> String {
    let mut label = format!("{} {}", p.representation, p.operator);
    if let Some(beta) = p.beta {
        let _ = write!(label, " beta={beta}");
    }
    if let Some(epsilon) = p.epsilon {
        let _ = write!(label, " epsilon={epsilon}");
    }
    if p.normalize {
        label.push_str(" norm");
    }
    label
}

/// Render a line chart: x = γ, y = mean success fraction with symmetric
/// error bars (± population std, clamped to [0, 1]), one series per
/// (representation, operator, β/ε, normalize).
pub fn render_chart(cells: &[SweepCell], path: &Path) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Config("cannot render a chart from an empty table".into()));
    }
    let points = aggregate(cells);
    let gammas: Vec<f64> = {
        let mut g: Vec<f64> = points.iter().map(|p| p.gamma).collect();
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g.dedup();
        g
    };
    let (gamma_min, gamma_max) = (gammas[0], *gammas.last().unwrap());
    let span = if gamma_max > gamma_min {
        gamma_max - gamma_min
    } else {
        0.1
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |gamma: f64| MARGIN_LEFT + (gamma - gamma_min) / span * plot_w;
    let y_px = |v: f64| MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    // Series in deterministic order.
    let mut series: Vec<(String, Vec<&AggregatePoint>)> = Vec::new();
    for p in &points {
        let label = series_label(p);
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push(p),
            None => series.push((label, vec![p])),
        }
    }
    series.sort_by(|a, b| a.0.cmp(&b.0));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Axes.
    let x0 = MARGIN_LEFT;
    let x1 = MARGIN_LEFT + plot_w;
    let y0 = MARGIN_TOP + plot_h;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        svg,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>"
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let y = y_px(tick);
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{tick}</text>",
            x0 - 9.0,
            y + 4.0
        );
    }
    for &gamma in &gammas {
        let x = x_px(gamma);
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{gamma}</text>",
            y0 + 20.0
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">discount factor gamma</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">fraction of successful trajectories</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    for (s, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let mut pts = pts.clone();
        pts.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).unwrap());

        let polyline: Vec<String> = pts
            .iter()
            .filter(|p| p.cells_ok > 0)
            .map(|p| format!("{:.2},{:.2}", x_px(p.gamma), y_px(p.mean)))
            .collect();
        if polyline.len() > 1 {
            let _ = writeln!(
                svg,
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                polyline.join(" ")
            );
        }
        for p in pts.iter().filter(|p| p.cells_ok > 0) {
            let x = x_px(p.gamma);
            let (lo, hi) = (y_px(p.mean - p.std), y_px(p.mean + p.std));
            let _ = writeln!(
                svg,
                "  <line x1=\"{x:.2}\" y1=\"{lo:.2}\" x2=\"{x:.2}\" y2=\"{hi:.2}\" \
                 stroke=\"{color}\"/>"
            );
            for cap in [lo, hi] {
                let _ = writeln!(
                    svg,
                    "  <line x1=\"{:.2}\" y1=\"{cap:.2}\" x2=\"{:.2}\" y2=\"{cap:.2}\" \
                     stroke=\"{color}\"/>",
                    x - 3.0,
                    x + 3.0
                );
            }
            let _ = writeln!(
                svg,
                "  <circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                y_px(p.mean)
            );
        }

        // Legend entry.
        let ly = MARGIN_TOP + 10.0 + s as f64 * 18.0;
        let lx = WIDTH - MARGIN_RIGHT + 20.0;
        let _ = writeln!(
            svg,
            "  <line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.5\" class=\"legend\"/>",
            lx + 22.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.2}\" y=\"{:.2}\">{label}</text>",
            lx + 28.0,
            ly + 4.0
        );
    }

    let _ = writeln!(svg, "</svg>");
    fs::write(path, svg).map_err(|e| Error::io(path.display().to_string(), e))
}
