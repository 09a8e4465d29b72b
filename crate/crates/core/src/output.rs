//! CSV and SVG artifacts.
//!
//! Numbers are written with 12 significant digits in scientific notation,
//! independent of locale, so repeated runs produce identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flow::FlowSeries;
use crate::scenario::{ScenarioConfig, ScenarioResult, VariantResult};

pub const SERIES_HEADER: [&str; 5] = ["t", "S_target", "S_target_frozen", "T_cum_bits", "T_rate_bits_per_time"];

/// `x` with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // also folds -0.0
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

fn to_csv(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Csv(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_number(x))).map_err(|e| Error::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// One flow as CSV with the [`SERIES_HEADER`] columns.
pub fn series_csv(s: &FlowSeries) -> Result<String> {
    let header: Vec<String> = SERIES_HEADER.iter().map(|h| h.to_string()).collect();
    to_csv(
        &header,
        (0..s.len()).map(|k| vec![s.times[k], s.s_target[k], s.s_target_frozen[k], s.cumulative[k], s.rate[k]]),
    )
}

/// Cumulative flow of every series, plus the requested sums, side by side.
pub fn summary_csv(v: &VariantResult, sums: &[Vec<String>]) -> Result<String> {
    let first = v.series.first().ok_or_else(|| Error::Csv("no series".into()))?;
    let mut header = vec!["t".to_string()];
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for s in &v.series {
        header.push(format!("T[{}]", s.label));
        columns.push(s.cumulative.clone());
    }
    for sum in sums {
        let parts: Vec<&FlowSeries> = sum
            .iter()
            .map(|l| v.get(l).ok_or_else(|| Error::Config(format!("unknown flow `{l}`"))))
            .collect::<Result<_>>()?;
        header.push(sum.iter().map(|l| format!("T[{l}]")).collect::<Vec<_>>().join("+"));
        columns.push((0..first.len()).map(|k| parts.iter().map(|p| p.cumulative[k]).sum()).collect());
    }
    to_csv(
        &header,
        (0..first.len()).map(|k| std::iter::once(first.times[k]).chain(columns.iter().map(|c| c[k])).collect()),
    )
}

/// File-name form of a flow label: `AB->C` becomes `AB-to-C`.
pub fn flow_file_stem(label: &str) -> String {
    label.replace("->", "-to-")
}

/// Writes every CSV (and SVG when requested) of `result` into `dir`.
pub fn write_outputs(cfg: &ScenarioConfig, result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, csv: String| -> Result<()> {
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, &csv)?;
        written.push(path);
        if cfg.outputs.svg {
            let path = dir.join(format!("{name}.svg"));
            std::fs::write(&path, plot_csv(&csv, &name)?)?;
            written.push(path);
        }
        Ok(())
    };
    for v in &result.variants {
        let stem = v.stem(&result.name);
        for s in &v.series {
            emit(format!("{stem}_{}", flow_file_stem(&s.label)), series_csv(s)?)?;
        }
        if cfg.outputs.summary {
            emit(format!("{stem}_summary"), summary_csv(v, &cfg.sums)?)?;
        }
    }
    Ok(written)
}

/// Parsed numeric CSV: a header and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> =
        r.headers().map_err(|e| Error::Csv(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() < 2 {
        return Err(Error::Csv(format!(
            "need a time column and at least one series, found {} column(s)",
            header.len()
        )));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::Csv(format!("row {} has {} fields, expected {}", line + 2, rec.len(), header.len())));
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 =
                field.trim().parse().map_err(|_| Error::Csv(format!("row {}: `{field}` is not a number", line + 2)))?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(Table { header, columns })
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 190.0, 40.0, 55.0); // left, right, top, bottom

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{:.4}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Multi-series line plot of a CSV whose first column is time.
pub fn plot_csv(text: &str, title: &str) -> Result<String> {
    let table = parse_csv(text)?;
    let t = &table.columns[0];
    let (t0, t1) = (t[0], *t.last().expect("non-empty"));
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for c in &table.columns[1..] {
        for &v in c.iter().filter(|v| v.is_finite()) {
            y0 = y0.min(v);
            y1 = y1.max(v);
        }
    }
    if !y0.is_finite() {
        return Err(Error::Csv("no finite values to plot".into()));
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let t1 = if t1 > t0 { t1 } else { t0 + 1.0 };
    let (ml, mr, mt, mb) = MARGIN;
    let (pw, ph) = (WIDTH - ml - mr, HEIGHT - mt - mb);
    let sx = |x: f64| ml + (x - t0) / (t1 - t0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        ml + pw / 2.0,
        escape(title)
    );
    for x in ticks(t0, t1) {
        let px = sx(x);
        let _ = writeln!(svg, r##"<line x1="{px:.2}" y1="{mt}" x2="{px:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##, mt + ph);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            mt + ph + 18.0,
            tick_label(x)
        );
    }
    for y in ticks(y0, y1) {
        let py = sy(y);
        let _ = writeln!(svg, r##"<line x1="{ml}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e5e5e5"/>"##, ml + pw);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            ml - 6.0,
            py + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(svg, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, ml + pw / 2.0, HEIGHT - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">bits</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );
    for (k, (name, col)) in table.header[1..].iter().zip(&table.columns[1..]).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = t
            .iter()
            .zip(col)
            .filter(|(_, v)| v.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = mt + 10.0 + 20.0 * k as f64;
        let lx = ml + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads `input` and writes its plot to `output`.
pub fn plot(input: &Path, output: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
    let title = input.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    std::fs::write(output, plot_csv(&text, title)?)?;
    Ok(())
}
