//! CSV, JSON and SVG renderings of a study result.
//!
//! All writers are byte-deterministic: numbers use the shortest decimal that
//! round-trips, `+inf` is written as `inf`, and nothing time- or
//! environment-dependent ends up in the output.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::power::{PowerEstimate, StudyResult};
use crate::stats::{StatValue, StatisticKind};

pub const CSV_HEADER: [&str; 14] = [
    "statistic",
    "alternative",
    "n",
    "reps",
    "c_liberal",
    "alpha_liberal",
    "c_conservative",
    "alpha_conservative",
    "power_liberal",
    "power_conservative",
    "power_interpolated",
    "std_err",
    "null_source",
    "seed",
];

pub fn write_csv<W: std::io::Write>(result: &StudyResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    let seed = result.provenance.master_seed.to_string();
    for e in &result.grid {
        w.write_record([
            e.statistic.name().to_string(),
            e.alternative.clone(),
            e.n.to_string(),
            e.reps.to_string(),
            e.bracket.c_liberal.to_string(),
            e.bracket.alpha_liberal.to_string(),
            e.bracket.c_conservative.to_string(),
            e.bracket.alpha_conservative.to_string(),
            e.power_liberal.to_string(),
            e.power_conservative.to_string(),
            e.power_interpolated.to_string(),
            e.std_err.to_string(),
            e.null_source.label().to_string(),
            seed.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &StudyResult, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(result, std::io::BufWriter::new(file))
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub statistic: StatisticKind,
    pub alternative: String,
    pub n: u64,
    pub reps: u64,
    pub c_liberal: StatValue,
    pub alpha_liberal: f64,
    pub c_conservative: StatValue,
    pub alpha_conservative: f64,
    pub power_liberal: f64,
    pub power_conservative: f64,
    pub power_interpolated: f64,
    pub std_err: f64,
    pub null_source: String,
    pub seed: u64,
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse("unexpected CSV header".into()));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::Parse(format!("column {}: `{}`", CSV_HEADER[i], field(i))))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|_| Error::Parse(format!("column {}: `{}`", CSV_HEADER[i], field(i))))
        };
        rows.push(CsvRow {
            statistic: field(0).parse()?,
            alternative: field(1).to_string(),
            n: int(2)?,
            reps: int(3)?,
            c_liberal: field(4).parse()?,
            alpha_liberal: num(5)?,
            c_conservative: field(6).parse()?,
            alpha_conservative: num(7)?,
            power_liberal: num(8)?,
            power_conservative: num(9)?,
            power_interpolated: num(10)?,
            std_err: num(11)?,
            null_source: field(12).to_string(),
            seed: int(13)?,
        });
    }
    Ok(rows)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn to_json(result: &StudyResult) -> Result<String> {
    let mut text = serde_json::to_string_pretty(result)?;
    text.push('\n');
    Ok(text)
}

pub fn emit_json(result: &StudyResult, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(result)?)?;
    Ok(())
}

pub fn from_json(text: &str) -> Result<StudyResult> {
    Ok(serde_json::from_str(text)?)
}

/// A power-versus-sample-size figure for one alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub alternative: String,
    pub title: String,
    pub sample_sizes: Vec<u64>,
    /// One power per sample size, in legend order.
    pub series: Vec<(StatisticKind, Vec<f64>)>,
}

impl FigureSpec {
    /// Builds the figure for `alternative` from a study grid. Series follow
    /// the statistic order of the study; values are clipped to `[0, 1]`.
    pub fn from_result(result: &StudyResult, alternative: &str) -> Result<Self> {
        let sizes = result.provenance.sample_sizes.clone();
        let mut series = Vec::new();
        for &kind in &result.provenance.statistics {
            let powers = sizes
                .iter()
                .map(|&n| {
                    result
                        .get(kind, alternative, n)
                        .map(|e: &PowerEstimate| e.power_interpolated.clamp(0.0, 1.0))
                        .ok_or_else(|| Error::Lookup {
                            alternative: alternative.to_string(),
                            n,
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            series.push((kind, powers));
        }
        Ok(FigureSpec {
            alternative: alternative.to_string(),
            title: format!("Power for a uniform null and {alternative} alternative"),
            sample_sizes: sizes,
            series,
        })
    }

    pub fn file_name(&self) -> String {
        format!("power_{}.svg", self.alternative)
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 430.0;

const PALETTE: [&str; 13] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#843c39",
];

fn colour(kind: StatisticKind) -> &'static str {
    let i = StatisticKind::STUDY
        .iter()
        .position(|&k| k == kind)
        .unwrap_or_else(|| {
            10 + [
                StatisticKind::Neyman,
                StatisticKind::Wilks,
                StatisticKind::Kullback,
            ]
            .iter()
            .position(|&k| k == kind)
            .unwrap_or(0)
        });
    PALETTE[i]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(spec: &FigureSpec) -> String {
    let (x_min, x_max) = match (spec.sample_sizes.first(), spec.sample_sizes.last()) {
        (Some(&a), Some(&b)) if a < b => (a as f64, b as f64),
        (Some(&a), _) => (a as f64 - 1.0, a as f64 + 1.0),
        _ => (0.0, 1.0),
    };
    let x = |n: u64| LEFT + (n as f64 - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let y = |p: f64| BOTTOM - p.clamp(0.0, 1.0) * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + RIGHT) / 2.0,
        escape(&spec.title)
    );

    // Grid and y ticks.
    for i in 0..=10 {
        let p = i as f64 / 10.0;
        let yy = y(p);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{yy:.2}" x2="{RIGHT:.2}" y2="{yy:.2}" stroke="#e0e0e0"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.1}</text>"#,
            LEFT - 8.0,
            yy + 4.0
        );
    }
    for &n in &spec.sample_sizes {
        let xx = x(n);
        let _ = writeln!(
            s,
            r##"<line x1="{xx:.2}" y1="{BOTTOM:.2}" x2="{xx:.2}" y2="{:.2}" stroke="#000000"/>"##,
            BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{xx:.2}" y="{:.2}" text-anchor="middle">{n}</text>"#,
            BOTTOM + 20.0
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{LEFT:.2},{TOP:.2} {LEFT:.2},{BOTTOM:.2} {RIGHT:.2},{BOTTOM:.2}" fill="none" stroke="#000000"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Sample size N</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 45.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Power</text>"#,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    for (kind, powers) in &spec.series {
        let c = colour(*kind);
        let points: Vec<String> = spec
            .sample_sizes
            .iter()
            .zip(powers)
            .map(|(&n, &p)| format!("{:.2},{:.2}", x(n), y(p)))
            .collect();
        let _ = writeln!(s, r#"<g class="series" data-statistic="{}">"#, kind.name());
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        for (&n, &p) in spec.sample_sizes.iter().zip(powers) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}" data-power="{}"/>"#,
                x(n),
                y(p),
                p.clamp(0.0, 1.0)
            );
        }
        let _ = writeln!(s, "</g>");
    }

    // Legend.
    let lx = RIGHT + 25.0;
    for (i, (kind, _)) in spec.series.iter().enumerate() {
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let c = colour(*kind);
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{ly:.2}" r="3" fill="{c}"/>"#,
            lx + 12.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            escape(kind.label())
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg_figure(spec: &FigureSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(spec))?;
    Ok(())
}

/// Writes `power_<alternative>.svg` for every alternative in the result and
/// returns the paths written.
pub fn emit_all_figures(
    result: &StudyResult,
    dir: impl AsRef<Path>,
) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for alt in &result.provenance.normalization {
        let spec = FigureSpec::from_result(result, &alt.name)?;
        let path = dir.as_ref().join(spec.file_name());
        emit_svg_figure(&spec, &path)?;
        written.push(path);
    }
    Ok(written)
}
