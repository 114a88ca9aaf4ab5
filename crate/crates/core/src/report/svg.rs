//! Static SVG charts written by hand.

use std::fmt::Write as _;

use super::pipeline::{DisclosureReport, SweepReport, SWEEP_MEASURES};

const ORIG_COLOUR: &str = "#4c72b0";
const SYN_COLOUR: &str = "#dd8452";
const LINE_COLOURS: [&str; 7] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d",
];

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

fn header(out: &mut String, width: u32, height: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
}

/// Horizontal paired bars (Dorig, DiSCO) per target, in summary order.
pub fn bar_chart(r: &DisclosureReport) -> String {
    let label_w = 180.0;
    let plot_w = 420.0;
    let row_h = 34.0;
    let top = 50.0;
    let n = r.summary.len() as f64;
    let width = (label_w + plot_w + 40.0) as u32;
    let height = (top + row_h * n + 60.0) as u32;
    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">Attribute disclosure from keys: {}</text>"#,
        width / 2,
        escape(&r.keys.join(" "))
    );
    for tick in (0..=100).step_by(25) {
        let x = label_w + plot_w * tick as f64 / 100.0;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{top:.1}" x2="{x:.1}" y2="{:.1}" stroke="#dddddd"/>"##,
            top + row_h * n
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{tick}</text>"#,
            top + row_h * n + 16.0
        );
    }
    for (i, s) in r.summary.iter().enumerate() {
        let y = top + row_h * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            label_w - 8.0,
            y + row_h / 2.0 + 4.0,
            escape(&s.label)
        );
        for (j, (value, colour)) in [(s.attrib_orig, ORIG_COLOUR), (s.attrib_syn, SYN_COLOUR)]
            .into_iter()
            .enumerate()
        {
            let bar_y = y + 4.0 + 13.0 * j as f64;
            let w = plot_w * value.clamp(0.0, 100.0) / 100.0;
            let _ = writeln!(
                out,
                r#"<rect x="{label_w:.1}" y="{bar_y:.1}" width="{w:.2}" height="12" fill="{colour}"><title>{:.2}</title></rect>"#,
                value
            );
        }
    }
    let ly = top + row_h * n + 36.0;
    for (j, (name, colour)) in [("Dorig (original)", ORIG_COLOUR), ("DiSCO (synthetic)", SYN_COLOUR)]
        .into_iter()
        .enumerate()
    {
        let x = label_w + 160.0 * j as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{colour}"/>"#,
            ly - 10.0
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{name}</text>"#, x + 16.0);
    }
    out.push_str("</svg>\n");
    out
}

/// One panel per target, one line per measure against synthetic size.
pub fn sweep_chart(s: &SweepReport) -> String {
    let left = 60.0;
    let plot_w = 440.0;
    let plot_h = 220.0;
    let panel_h = plot_h + 70.0;
    let legend_w = 120.0;
    let width = (left + plot_w + legend_w + 20.0) as u32;
    let height = (panel_h * s.targets.len().max(1) as f64 + 20.0) as u32;
    let mut out = String::new();
    header(&mut out, width, height);

    let max_n = s.points.iter().map(|p| p.n_syn).fold(1.0_f64, f64::max);
    for (ti, target) in s.targets.iter().enumerate() {
        let series = s.series(target);
        let top = 40.0 + panel_h * ti as f64;
        let ymax = series
            .iter()
            .flat_map(|p| SWEEP_MEASURES.iter().map(|m| p.get(m)))
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let ymax = (ymax / 10.0).ceil() * 10.0;
        let xy = |n: f64, v: f64| (left + plot_w * n / max_n, top + plot_h * (1.0 - v / ymax));

        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            left + plot_w / 2.0,
            top - 14.0,
            escape(target)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{left:.1}" y="{top:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#999999"/>"##
        );
        for k in 0..=4 {
            let v = ymax * k as f64 / 4.0;
            let (_, y) = xy(0.0, v);
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v}</text>"#,
                left - 6.0,
                y + 4.0
            );
        }
        for p in &series {
            let (x, _) = xy(p.n_syn, 0.0);
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                top + plot_h + 16.0,
                p.n_syn.round()
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">synthetic records</text>"#,
            left + plot_w / 2.0,
            top + plot_h + 34.0
        );
        for (mi, (measure, colour)) in SWEEP_MEASURES.iter().zip(LINE_COLOURS).enumerate() {
            let points: Vec<String> = series
                .iter()
                .map(|p| {
                    let (x, y) = xy(p.n_syn, p.get(measure));
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            // dashed lines for the expected-proportion numerator
            let dash = if measure.starts_with("DCAP") {
                r#" stroke-dasharray="6,3""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"{dash}/>"#,
                points.join(" ")
            );
            let ly = top + 14.0 + 18.0 * mi as f64;
            let lx = left + plot_w + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="2"{dash}/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(out, r#"<text x="{:.1}" y="{ly:.1}">{measure}</text>"#, lx + 26.0);
        }
    }
    out.push_str("</svg>\n");
    out
}
