//! Line charts with a shaded ±1 standard deviation band, as standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::MetricsRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    SuccessRate,
    CumMinLen,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandPoint {
    pub series: String,
    pub metric: Metric,
    pub x: f64,
    pub mean: f64,
    /// Population standard deviation over seeds or folds.
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
}

fn series_name(r: &MetricsRow, multi_size: bool) -> String {
    if multi_size {
        format!("{} {}x{}", r.algo, r.size, r.size)
    } else {
        r.algo.clone()
    }
}

/// Mean and spread per (series, metric, x) over rows whose bucket is numeric.
pub fn band_stats(rows: &[MetricsRow]) -> Vec<BandPoint> {
    let multi_size = rows.iter().any(|r| r.size != rows[0].size);
    let mut groups: BTreeMap<(String, Metric, i64), (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let Ok(x) = r.bucket.parse::<f64>() else { continue };
        let key_x = (x * 1000.0).round() as i64;
        let s = series_name(r, multi_size);
        groups.entry((s.clone(), Metric::SuccessRate, key_x)).or_insert((x, vec![])).1.push(r.success_rate);
        if let Some(c) = r.cum_min_len {
            groups.entry((s, Metric::CumMinLen, key_x)).or_insert((x, vec![])).1.push(c);
        }
    }
    groups
        .into_iter()
        .map(|((series, metric, _), (x, vals))| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            BandPoint { series, metric, x, mean, std, lower: mean - std, upper: mean + std }
        })
        .collect()
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 320.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 150.0;
const PAD_T: f64 = 30.0;
const PAD_B: f64 = 44.0;

struct Panel<'a> {
    title: &'a str,
    y_label: &'a str,
    log_y: bool,
    points: Vec<&'a BandPoint>,
}

fn render_panel(out: &mut String, panel: &Panel, top: f64, series: &[String]) {
    let xs: Vec<f64> = panel.points.iter().map(|p| p.x).collect();
    let (x0, x1) = match (xs.iter().copied().reduce(f64::min), xs.iter().copied().reduce(f64::max)) {
        (Some(a), Some(b)) if b > a => (a, b),
        (Some(a), Some(_)) => (a - 1.0, a + 1.0),
        _ => (0.0, 1.0),
    };
    let ty = |v: f64| if panel.log_y { v.max(1.0).log10() } else { v };
    let (y0, y1) = if panel.log_y {
        let hi = panel.points.iter().map(|p| ty(p.upper)).fold(1.0_f64, f64::max).ceil();
        (0.0, hi.max(1.0))
    } else {
        (0.0, 1.0)
    };
    let pw = W - PAD_L - PAD_R;
    let ph = H - PAD_T - PAD_B;
    let sx = |x: f64| PAD_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + PAD_T + ph - (ty(y) - y0) / (y1 - y0) * ph;

    let _ = writeln!(out, r#"<g class="panel"><text x="{}" y="{}" font-size="14">{}</text>"#, PAD_L, top + 18.0, panel.title);
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line class="axis" x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = PAD_L,
        r = PAD_L + pw,
        t = top + PAD_T,
        b = top + PAD_T + ph
    );
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            sx(x),
            top + PAD_T + ph + 14.0,
            trim(x)
        );
    }
    let ticks: Vec<f64> = if panel.log_y {
        (0..=(y1 as i32)).map(|e| 10f64.powi(e)).collect()
    } else {
        (0..=4).map(|k| k as f64 / 4.0).collect()
    };
    for v in ticks {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            PAD_L - 6.0,
            sy(v) + 3.0,
            trim(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        14.0,
        top + PAD_T + ph / 2.0,
        top + PAD_T + ph / 2.0,
        panel.y_label
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts: Vec<&&BandPoint> = panel.points.iter().filter(|p| &p.series == s).collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        let upper: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.upper))).collect();
        let lower: Vec<String> = pts.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.lower))).collect();
        let _ = writeln!(
            out,
            r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.mean))).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="mean" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");
}

fn trim(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Success-rate panel, plus a log-scale cumulative-length panel when the rows carry lengths.
pub fn render_svg(rows: &[MetricsRow]) -> String {
    let bands = band_stats(rows);
    let mut series: Vec<String> = bands.iter().map(|b| b.series.clone()).collect();
    series.sort();
    series.dedup();
    let mut panels = vec![Panel {
        title: "Success rate",
        y_label: "success rate",
        log_y: false,
        points: bands.iter().filter(|b| b.metric == Metric::SuccessRate).collect(),
    }];
    if bands.iter().any(|b| b.metric == Metric::CumMinLen) {
        panels.push(Panel {
            title: "Cumulative minimum plan length",
            y_label: "length (log)",
            log_y: true,
            points: bands.iter().filter(|b| b.metric == Metric::CumMinLen).collect(),
        });
    }
    let total_h = H * panels.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{total_h}" viewBox="0 0 {W} {total_h}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, H * k as f64, &series);
    }
    for (i, s) in series.iter().enumerate() {
        let y = PAD_T + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<g class="legend"><rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text></g>"#,
            W - PAD_R + 12.0,
            y - 10.0,
            COLORS[i % COLORS.len()],
            W - PAD_R + 30.0,
            y,
            s
        );
    }
    out.push_str("</svg>\n");
    out
}
