//! Sweep output as CSV, JSON, or an SVG plot of success rate against the
//! grid value.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::sweep::SweepRow;

pub const CSV_HEADER: [&str; 11] = [
    "mode",
    "r",
    "n",
    "gamma",
    "C",
    "p",
    "trials",
    "successes",
    "success_rate",
    "seed",
    "wall_ms",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// `# config=<json>` followed by the fixed header and one line per row. A
/// row with solver budget overruns reports `skipped` as its success rate.
pub fn sweep_csv(cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let mut out = format!(
        "# config={}\n",
        serde_json::to_string(cfg).expect("config serializes")
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        let rate = if row.is_skipped() {
            "skipped".to_string()
        } else {
            row.success_rate.to_string()
        };
        w.write_record([
            row.mode.name().to_string(),
            row.r.to_string(),
            row.n.to_string(),
            row.gamma.to_string(),
            row.c.map(|c| c.to_string()).unwrap_or_default(),
            row.p.to_string(),
            row.trials.to_string(),
            row.successes.to_string(),
            rate,
            row.seed.to_string(),
            row.wall_ms.to_string(),
        ])
        .expect("in-memory write");
    }
    out.push_str(
        &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output"),
    );
    out
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    config: &'a ExperimentConfig,
    rows: &'a [SweepRow],
}

pub fn sweep_json(cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let mut out =
        serde_json::to_string_pretty(&SweepDocument { config: cfg, rows }).expect("rows serialize");
    out.push('\n');
    out
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Success rate against `C` (log scale) or `p` (linear), one polyline per
/// `n`, with the config embedded as a comment.
pub fn sweep_svg(cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    let (w, h, left, bottom, pad) = (640.0, 400.0, 60.0, 50.0, 20.0);
    let by_c = !cfg.c_grid.is_empty();
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| {
            if by_c {
                r.c.unwrap_or(1.0).max(1e-12).log10()
            } else {
                r.p
            }
        })
        .collect();
    let (mut lo, mut hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !(hi > lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |x: f64| left + (x - lo) / (hi - lo) * (w - left - pad);
    let py = |y: f64| pad + (1.0 - y) * (h - bottom - pad);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    let config = serde_json::to_string(cfg)
        .expect("config serializes")
        .replace("--", "- -");
    writeln!(s, "<!-- config={config} -->").unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{left} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - bottom,
        w - pad
    )
    .unwrap();
    for tick in [0.0, 0.5, 1.0] {
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{tick}</text>"#,
            left - 6.0,
            py(tick) + 4.0
        )
        .unwrap();
    }
    let label = if by_c { "log10 C" } else { "p" };
    writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{label}</text>"#,
        (left + w - pad) / 2.0,
        h - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{}" font-size="13" transform="rotate(-90 14 {})" text-anchor="middle">success rate</text>"#,
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for (k, &n) in cfg.n.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = rows
            .iter()
            .zip(&xs)
            .filter(|(r, _)| r.n == n)
            .map(|(r, &x)| format!("{:.2},{:.2}", px(x), py(r.success_rate)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        )
        .unwrap();
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted pair");
            writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#).unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">n = {n}</text>"#,
            w - pad - 70.0,
            pad + 16.0 * (k as f64 + 1.0)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

pub fn render(format: Format, cfg: &ExperimentConfig, rows: &[SweepRow]) -> String {
    match format {
        Format::Csv => sweep_csv(cfg, rows),
        Format::Json => sweep_json(cfg, rows),
        Format::Svg => sweep_svg(cfg, rows),
    }
}
