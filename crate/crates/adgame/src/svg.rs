//! Self-contained SVG line charts drawn from a sweep table. Output depends
//! only on the table contents, so identical tables give identical bytes.

use std::fmt::Write;

use adgame_core::equilibrium::EquilibriumKind;

use crate::table::{CandidateTable, Entry, SweepTable};

const W: f64 = 640.0;
const H: f64 = 400.0;
const ML: f64 = 64.0;
const MR: f64 = 170.0;
const MT: f64 = 36.0;
const MB: f64 = 48.0;

fn color(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Discriminatory => "#1f77b4",
        EquilibriumKind::UniformA => "#2ca02c",
        EquilibriumKind::UniformB => "#d62728",
    }
}

fn short(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Discriminatory => "disc",
        EquilibriumKind::UniformA => "unif A",
        EquilibriumKind::UniformB => "unif B",
    }
}

struct Series {
    label: String,
    color: &'static str,
    dash: Option<&'static str>,
    segments: Vec<Vec<(f64, f64)>>,
}

struct Chart<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    series: Vec<Series>,
    hlines: Vec<(f64, String)>,
}

/// Tick positions at a 1-2-5 spacing covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    // round away the representation error of i·step so labels stay clean
    (first..=last).map(|i| (i as f64 * step * 1e9).round() / 1e9).collect()
}

fn y_range(chart: &Chart) -> (f64, f64) {
    let ys = chart
        .series
        .iter()
        .flat_map(|s| s.segments.iter().flatten().map(|p| p.1))
        .chain(chart.hlines.iter().map(|h| h.0));
    let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw(out: &mut String, chart: &Chart, x0: f64, y0: f64) {
    let (ylo, yhi) = y_range(chart);
    let (xlo, xhi) = (0.5, 1.0);
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |x: f64| x0 + ML + (x - xlo) / (xhi - xlo) * pw;
    let sy = |y: f64| y0 + MT + (1.0 - (y - ylo) / (yhi - ylo)) * ph;

    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="15">{}</text>"#, x0 + ML + pw / 2.0, y0 + 22.0, escape(chart.title));
    let _ = writeln!(out, r##"<rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##, sx(xlo), sy(yhi));
    for t in ticks(xlo, xhi) {
        let _ = writeln!(out, r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#ddd"/>"##, sx(t), sy(ylo), sy(yhi));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#, sx(t), sy(ylo) + 16.0, trim(t));
    }
    for t in ticks(ylo, yhi) {
        let _ = writeln!(out, r##"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}" stroke="#ddd"/>"##, sy(t), sx(xlo), sx(xhi));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#, sx(xlo) - 6.0, sy(t) + 4.0, trim(t));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#, x0 + ML + pw / 2.0, y0 + H - 10.0, escape(chart.x_label));
    let _ = writeln!(
        out,
        r#"<text x="{0:.2}" y="{1:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {0:.2} {1:.2})">{2}</text>"#,
        x0 + 16.0,
        y0 + MT + ph / 2.0,
        escape(chart.y_label)
    );

    for (y, label) in &chart.hlines {
        let _ = writeln!(out, r##"<line x1="{1:.2}" y1="{0:.2}" x2="{2:.2}" y2="{0:.2}" stroke="#888" stroke-dasharray="2 3"/>"##, sy(*y), sx(xlo), sx(xhi));
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#666">{}</text>"##, sx(xhi) + 4.0, sy(*y) + 4.0, escape(label));
    }
    for s in &chart.series {
        let dash = s.dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        for seg in &s.segments {
            if seg.len() == 1 {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, sx(seg[0].0), sy(seg[0].1), s.color);
                continue;
            }
            let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.8"{dash} points="{}"/>"#, s.color, pts.join(" "));
        }
    }
    for (i, s) in chart.series.iter().enumerate() {
        let ly = y0 + MT + 12.0 + 18.0 * i as f64;
        let lx = x0 + W - MR + 12.0;
        let dash = s.dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(out, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="1.8"{dash}/>"#, lx + 24.0, s.color);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
    }
}

fn trim(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn render(chart: &Chart) -> String {
    let mut body = String::new();
    draw(&mut body, chart, 0.0, 0.0);
    document(W, H, &body)
}

/// Splits a kind's values into runs of consecutive table q values.
fn segments(table: &SweepTable, kind: EquilibriumKind, value: impl Fn(&Entry) -> f64) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for q in table.qs() {
        let hit = table.rows.iter().find(|r| r.q == q && r.entry.is_some_and(|e| e.kind == kind));
        match hit {
            Some(r) => cur.push((q, value(r.entry.as_ref().unwrap()))),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn per_kind(table: &SweepTable, name: &str, dash: Option<&'static str>, value: impl Fn(&Entry) -> f64 + Copy) -> Vec<Series> {
    EquilibriumKind::ALL
        .into_iter()
        .filter_map(|k| {
            let segments = segments(table, k, value);
            (!segments.is_empty()).then(|| Series {
                label: format!("{name} ({})", short(k)),
                color: color(k),
                dash,
                segments,
            })
        })
        .collect()
}

fn chart_for<'a>(title: &'a str, y_label: &'a str, series: Vec<Series>, hlines: Vec<(f64, String)>) -> Chart<'a> {
    Chart {
        title,
        x_label: "q (channel fidelity)",
        y_label,
        series,
        hlines,
    }
}

fn regions_panel(table: &SweepTable, candidates: &CandidateTable, eta: f64) -> String {
    let mut body = String::new();
    // existence strip: one band per kind
    let pw = W - ML - MR;
    let sx = |x: f64| ML + (x - 0.5) / 0.5 * pw;
    let _ = writeln!(body, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">Equilibrium regions</text>"#, ML + pw / 2.0);
    for (i, kind) in EquilibriumKind::ALL.into_iter().enumerate() {
        let y = MT + 10.0 + 30.0 * i as f64;
        let _ = writeln!(body, r##"<rect x="{:.2}" y="{y:.2}" width="{pw:.2}" height="20" fill="#f4f4f4"/>"##, sx(0.5));
        let _ = writeln!(body, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, W - MR + 12.0, y + 14.0, short(kind));
        for seg in segments(table, kind, |_| 0.0) {
            let (a, b) = (seg[0].0, seg[seg.len() - 1].0);
            let _ = writeln!(body, r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="20" fill="{}"/>"#, sx(a), (sx(b) - sx(a)).max(1.5), color(kind));
        }
    }
    let none_y = MT + 100.0;
    let _ = writeln!(body, r#"<text x="{:.2}" y="{:.2}" font-size="11">none</text>"#, W - MR + 12.0, none_y + 10.0);
    for r in table.rows.iter().filter(|r| r.entry.is_none()) {
        let _ = writeln!(body, r##"<line x1="{0:.2}" y1="{none_y:.2}" x2="{0:.2}" y2="{1:.2}" stroke="#999"/>"##, sx(r.q), none_y + 14.0);
    }

    // candidate posteriors, drawn whether or not each kind holds
    let mut series = Vec::new();
    for (kind, dash) in [(EquilibriumKind::Discriminatory, None), (EquilibriumKind::UniformA, Some("6 3"))] {
        let pts = |r1: bool| -> Vec<(f64, f64)> {
            candidates
                .rows
                .iter()
                .filter(|c| c.point.kind == kind)
                .map(|c| (c.point.q, if r1 { c.point.posteriors.r1 } else { c.point.posteriors.r0 }))
                .collect()
        };
        let who = if kind == EquilibriumKind::Discriminatory { "v*" } else { "p_M" };
        series.push(Series {
            label: format!("r1 at {who}"),
            color: "#1f77b4",
            dash,
            segments: vec![pts(true)],
        });
        series.push(Series {
            label: format!("r0 at {who}"),
            color: "#ff7f0e",
            dash,
            segments: vec![pts(false)],
        });
    }
    let chart = chart_for("Candidate posteriors", "posterior Pr(t1)", series, vec![(eta, "η".into())]);
    draw(&mut body, &chart, 0.0, 130.0);
    document(W, H + 130.0, &body)
}

/// All figures as `(file name, svg text)` pairs.
pub fn figures(table: &SweepTable, candidates: &CandidateTable, eta: f64) -> Vec<(String, String)> {
    let mut prices = per_kind(table, "price", None, |e| e.price);
    prices.extend(per_kind(table, "cutoff", Some("6 3"), |e| e.cutoff));
    let mut posts = per_kind(table, "r1", None, |e| e.r1);
    posts.extend(per_kind(table, "r0", Some("6 3"), |e| e.r0));
    let mut welfare = per_kind(table, "CS", None, |e| e.cs);
    welfare.extend(per_kind(table, "CS ad part", Some("2 2"), |e| e.cs_ad));
    welfare.extend(per_kind(table, "profit", Some("6 3"), |e| e.profit));

    let charts = [
        ("fig1_prices.svg", chart_for("Prices and cutoffs", "value", prices, vec![])),
        ("fig2_posteriors.svg", chart_for("Posteriors", "posterior Pr(t1)", posts, vec![(eta, "η".into())])),
        ("fig3_mutual_information.svg", chart_for("Mutual information", "bits", per_kind(table, "MI", None, |e| e.mi_bits), vec![])),
        ("fig4_advertiser_utility.svg", chart_for("Advertiser utility", "utility", per_kind(table, "utility", None, |e| e.adv_utility), vec![])),
        ("fig5_welfare.svg", chart_for("Consumer surplus and profit", "utility", welfare, vec![])),
    ];
    let mut out: Vec<(String, String)> = charts.iter().map(|(n, c)| (n.to_string(), render(c))).collect();
    out.push(("fig6_regions.svg".into(), regions_panel(table, candidates, eta)));
    out
}
