//! Radar, ranked-bar and top-3 charts as standalone SVG, plus score tables.

use std::f64::consts::PI;
use std::fmt::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{MAX_SCORE, MIN_SCORE, NUM_SCORES};
use crate::referee::{LeaderboardEntry, ScoreCard, Stat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Radar,
    RankedBar,
    Top3,
    Table,
}

impl ChartKind {
    pub const ALL: [ChartKind; 4] = [ChartKind::Radar, ChartKind::RankedBar, ChartKind::Top3, ChartKind::Table];
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChartKind::Radar => "radar",
            ChartKind::RankedBar => "ranked-bar",
            ChartKind::Top3 => "top3",
            ChartKind::Table => "table",
        })
    }
}

impl FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "radar" | "radar12" => Ok(ChartKind::Radar),
            "ranked-bar" | "bar" => Ok(ChartKind::RankedBar),
            "top3" | "top3-per-metric" => Ok(ChartKind::Top3),
            "table" | "score-table" => Ok(ChartKind::Table),
            _ => Err(Error::InvalidParameter(format!(
                "unknown report kind {s:?}; expected radar, ranked-bar, top3 or table"
            ))),
        }
    }
}

/// Aggregate scores of one method, as plotted.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub name: String,
    pub composite: Stat,
    pub scores: Vec<Stat>,
}

impl MethodScores {
    pub fn from_card(card: &ScoreCard) -> Self {
        Self {
            name: card.method_name.clone(),
            composite: card.aggregate.composite,
            scores: card.aggregate.scores.to_vec(),
        }
    }

    pub fn from_entry(entry: &LeaderboardEntry) -> Self {
        Self {
            name: entry.method_name.clone(),
            composite: entry.composite,
            scores: entry.scores.to_vec(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.scores.len() != NUM_SCORES {
            return Err(Error::Chart(format!(
                "{} has {} score axes, expected {NUM_SCORES}",
                self.name,
                self.scores.len()
            )));
        }
        Ok(())
    }
}

/// Sorts by composite mean descending, ties by name.
pub fn rank_order(methods: &mut [MethodScores]) {
    methods.sort_by(|a, b| {
        b.composite
            .mean
            .total_cmp(&a.composite.mean)
            .then_with(|| a.name.cmp(&b.name))
    });
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Maps a score in `[-100, 100]` to `[0, 1]`.
pub fn unit(score: f64) -> f64 {
    ((score.clamp(MIN_SCORE, MAX_SCORE) - MIN_SCORE) / (MAX_SCORE - MIN_SCORE)).clamp(0.0, 1.0)
}

/// Formats coordinates with a fixed precision and no negative zero.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn two(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const BASELINE_COLOR: &str = "#7f7f7f";

fn open_svg(out: &mut String, width: u32, height: u32, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
}

pub const RADAR_CENTER: f64 = 300.0;
pub const RADAR_RADIUS: f64 = 220.0;

/// Angle of axis `i` (E1 at the top, clockwise).
pub fn radar_angle(i: usize) -> f64 {
    -PI / 2.0 + 2.0 * PI * i as f64 / NUM_SCORES as f64
}

fn radar_point(i: usize, score: f64) -> (f64, f64) {
    let r = unit(score) * RADAR_RADIUS;
    let a = radar_angle(i);
    (RADAR_CENTER + r * a.cos(), RADAR_CENTER + r * a.sin())
}

fn radar_polygon(out: &mut String, m: &MethodScores, class: &str, color: &str) {
    let points: Vec<String> = m
        .scores
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (x, y) = radar_point(i, s.mean);
            format!("{},{}", num(x), num(y))
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polygon class="{class}" data-method="{}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
        escape(&m.name),
        points.join(" ")
    );
}

/// Twelve-axis radar chart. The baseline, when given, is drawn first as a
/// dashed reference layer.
pub fn render_radar(dataset_id: &str, methods: &[MethodScores], baseline: Option<&MethodScores>) -> Result<String> {
    for m in methods.iter().chain(baseline) {
        m.check()?;
    }
    let title = match methods {
        [one] => format!("{dataset_id}: {}", one.name),
        _ => dataset_id.to_string(),
    };
    let mut out = String::new();
    open_svg(&mut out, 600, 640, &title);
    let _ = writeln!(out, r#"<text x="300" y="24" text-anchor="middle" font-size="16">{}</text>"#, escape(&title));
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            out,
            r##"<circle class="grid" cx="{c}" cy="{c}" r="{}" fill="none" stroke="#dddddd"/>"##,
            num(ring * RADAR_RADIUS),
            c = num(RADAR_CENTER)
        );
    }
    for i in 0..NUM_SCORES {
        let (x, y) = radar_point(i, MAX_SCORE);
        let a = radar_angle(i);
        let (lx, ly) = (RADAR_CENTER + (RADAR_RADIUS + 24.0) * a.cos(), RADAR_CENTER + (RADAR_RADIUS + 24.0) * a.sin());
        let _ = writeln!(
            out,
            r##"<line class="axis" x1="{c}" y1="{c}" x2="{}" y2="{}" stroke="#bbbbbb"/>"##,
            num(x),
            num(y),
            c = num(RADAR_CENTER)
        );
        let _ = writeln!(
            out,
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="13">E{}</text>"#,
            num(lx),
            num(ly),
            i + 1
        );
    }
    if let Some(b) = baseline {
        let mut poly = String::new();
        radar_polygon(&mut poly, b, "baseline", BASELINE_COLOR);
        out.push_str(&poly.replace("stroke-width=\"2\"", "stroke-width=\"2\" stroke-dasharray=\"6 4\""));
    }
    for (k, m) in methods.iter().enumerate() {
        radar_polygon(&mut out, m, "method", PALETTE[k % PALETTE.len()]);
    }
    let mut y = 560.0;
    let legend = baseline
        .into_iter()
        .map(|b| (BASELINE_COLOR, b))
        .chain(methods.iter().enumerate().map(|(k, m)| (PALETTE[k % PALETTE.len()], m)));
    for (color, m) in legend {
        let _ = writeln!(
            out,
            r#"<rect x="20" y="{}" width="12" height="12" fill="{color}"/><text x="38" y="{}" font-size="12">{} ({})</text>"#,
            num(y),
            num(y + 10.0),
            escape(&m.name),
            two(m.composite.mean)
        );
        y += 18.0;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub const BAR_TOP: f64 = 40.0;
pub const BAR_HEIGHT: f64 = 300.0;

/// Height in pixels of a bar for `score`: proportional to `score + 100`.
pub fn bar_height(score: f64) -> f64 {
    unit(score) * BAR_HEIGHT
}

/// One bar per method in rank order, labelled with the composite mean.
pub fn render_ranked_bar(dataset_id: &str, methods: &[MethodScores]) -> Result<String> {
    if methods.is_empty() {
        return Err(Error::Chart("ranked bar chart needs at least one method".into()));
    }
    let mut sorted = methods.to_vec();
    rank_order(&mut sorted);
    let slot = 70.0;
    let width = 80.0 + slot * sorted.len() as f64;
    let base = BAR_TOP + BAR_HEIGHT;
    let mut out = String::new();
    open_svg(&mut out, width.ceil() as u32, 460, &format!("{dataset_id}: ranked composite scores"));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        num(width / 2.0),
        escape(&format!("{dataset_id}: ranked composite scores"))
    );
    for tick in [-100.0, -50.0, 0.0, 50.0, 100.0] {
        let y = base - bar_height(tick);
        let _ = writeln!(
            out,
            r##"<line class="tick" x1="50" y1="{y}" x2="{}" y2="{y}" stroke="#eeeeee"/><text x="45" y="{}" text-anchor="end" font-size="10">{}</text>"##,
            num(width - 10.0),
            num(y + 3.0),
            tick,
            y = num(y)
        );
    }
    for (k, m) in sorted.iter().enumerate() {
        let h = bar_height(m.composite.mean);
        let x = 60.0 + slot * k as f64;
        let _ = writeln!(
            out,
            r#"<rect class="bar" data-method="{}" data-rank="{}" x="{}" y="{}" width="50" height="{}" fill="{}"/>"#,
            escape(&m.name),
            k + 1,
            num(x),
            num(base - h),
            num(h),
            PALETTE[k % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text class="value" x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            num(x + 25.0),
            num(base - h - 4.0),
            two(m.composite.mean)
        );
        let _ = writeln!(
            out,
            r#"<text class="name" x="{}" y="{}" text-anchor="end" font-size="11" transform="rotate(-45 {} {})">{}</text>"#,
            num(x + 25.0),
            num(base + 14.0),
            num(x + 25.0),
            num(base + 14.0),
            escape(&m.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Indices of the (up to) three best methods on score `i`, best first.
pub fn top3(methods: &[MethodScores], i: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..methods.len()).collect();
    idx.sort_by(|&a, &b| {
        methods[b].scores[i]
            .mean
            .total_cmp(&methods[a].scores[i].mean)
            .then_with(|| methods[a].name.cmp(&methods[b].name))
    });
    idx.truncate(3);
    idx
}

/// For each score, the three best methods as bars and the baseline as a
/// horizontal line. The baseline itself is not a candidate.
pub fn render_top3(dataset_id: &str, methods: &[MethodScores], baseline: Option<&MethodScores>) -> Result<String> {
    for m in methods.iter().chain(baseline) {
        m.check()?;
    }
    let candidates: Vec<MethodScores> = methods
        .iter()
        .filter(|m| baseline.is_none_or(|b| b.name != m.name))
        .cloned()
        .collect();
    let mut names: Vec<&str> = candidates.iter().map(|m| m.name.as_str()).collect();
    names.sort_unstable();
    let color = |name: &str| PALETTE[names.binary_search(&name).unwrap_or(0) % PALETTE.len()];

    let group = 84.0;
    let width = 60.0 + group * NUM_SCORES as f64;
    let base = BAR_TOP + BAR_HEIGHT;
    let title = format!("{dataset_id}: top three per metric");
    let mut out = String::new();
    open_svg(&mut out, width.ceil() as u32, 420 + 18 * names.len() as u32, &title);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        num(width / 2.0),
        escape(&title)
    );
    for i in 0..NUM_SCORES {
        let x0 = 50.0 + group * i as f64;
        let _ = writeln!(out, r#"<g class="metric" data-score="E{}">"#, i + 1);
        for (slot, &k) in top3(&candidates, i).iter().enumerate() {
            let m = &candidates[k];
            let h = bar_height(m.scores[i].mean);
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-method="{}" data-place="{}" x="{}" y="{}" width="22" height="{}" fill="{}"/>"#,
                escape(&m.name),
                slot + 1,
                num(x0 + 4.0 + 24.0 * slot as f64),
                num(base - h),
                num(h),
                color(&m.name)
            );
        }
        if let Some(b) = baseline {
            let y = base - bar_height(b.scores[i].mean);
            let _ = writeln!(
                out,
                r#"<line class="baseline" data-method="{}" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{BASELINE_COLOR}" stroke-width="2" stroke-dasharray="4 3"/>"#,
                escape(&b.name),
                num(x0),
                num(x0 + 80.0),
                y = num(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle" font-size="12">E{}</text>"#,
            num(x0 + 40.0),
            num(base + 18.0),
            i + 1
        );
        out.push_str("</g>\n");
    }
    let mut y = base + 40.0;
    for name in &names {
        let _ = writeln!(
            out,
            r#"<rect x="50" y="{}" width="12" height="12" fill="{}"/><text x="68" y="{}" font-size="12">{}</text>"#,
            num(y),
            color(name),
            num(y + 10.0),
            escape(name)
        );
        y += 18.0;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// `"64.54 (± 0.00)"`.
pub fn format_stat(s: &Stat) -> String {
    format!("{} (± {})", two(s.mean), two(s.std))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn table_rows(methods: &[MethodScores]) -> Result<Vec<Vec<String>>> {
    for m in methods {
        m.check()?;
    }
    let mut sorted = methods.to_vec();
    rank_order(&mut sorted);
    Ok(sorted
        .iter()
        .map(|m| {
            let mut row = vec![m.name.clone(), format_stat(&m.composite)];
            row.extend(m.scores.iter().map(format_stat));
            row
        })
        .collect())
}

fn header() -> Vec<String> {
    let mut h = vec!["model".to_string(), "avg".to_string()];
    h.extend((1..=NUM_SCORES).map(|i| format!("E{i}")));
    h
}

/// CSV table sorted by average score.
pub fn export_table(methods: &[MethodScores]) -> Result<String> {
    let mut out = String::new();
    for row in std::iter::once(header()).chain(table_rows(methods)?) {
        let line: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// The same table as Markdown.
pub fn export_markdown(methods: &[MethodScores]) -> Result<String> {
    let cell = |s: &str| s.replace('|', "\\|");
    let h = header();
    let mut out = format!("| {} |\n|{}\n", h.join(" | "), "---|".repeat(h.len()));
    for row in table_rows(methods)? {
        let cells: Vec<String> = row.iter().map(|c| cell(c)).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    Ok(out)
}
