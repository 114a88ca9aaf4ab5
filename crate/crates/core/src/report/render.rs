//! Text, JSON and CSV rendering. Text rounds to two decimals; JSON and CSV
//! carry full precision.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::config::{OutputFormat, Section};
use super::pipeline::{DisclosureReport, ReportKind, SweepReport, TargetReport, SWEEP_MEASURES};
use super::svg;

fn f2(v: f64) -> String {
    format!("{v:.2}")
}

/// Right-aligned table with a left-aligned row label column.
fn table(out: &mut String, header: &[&str], rows: &[(String, Vec<String>)]) {
    let label_w = rows.iter().map(|(l, _)| l.chars().count()).max().unwrap_or(0);
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for (_, cells) in rows {
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.chars().count());
        }
    }
    let _ = write!(out, "{:label_w$}", "");
    for (h, w) in header.iter().zip(&widths) {
        let _ = write!(out, " {h:>w$}");
    }
    out.push('\n');
    for (label, cells) in rows {
        let _ = write!(out, "{label:<label_w$}");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(out, " {c:>w$}");
        }
        out.push('\n');
    }
}

fn ident_block(out: &mut String, r: &DisclosureReport) {
    match r.kind {
        ReportKind::Multi => {
            let (uio, rep_u) = mean_ident(r);
            out.push_str("Identity disclosure measures\n");
            let _ = writeln!(out, "from keys: {} ", r.keys.join(" "));
            let _ = writeln!(out, "For original  ( UiO )  {} %", f2(uio));
            let _ = writeln!(out, "For synthetic ( repU ) {} %", f2(rep_u));
            out.push('\n');
        }
        ReportKind::Disclosure => {
            let _ = writeln!(
                out,
                "Identity disclosure measures for {} synthetic data set(s) from keys:",
                r.m()
            );
            let _ = writeln!(out, " {} ", r.keys.join(" "));
            out.push('\n');
            let rows: Vec<_> = r
                .ident
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    (
                        (i + 1).to_string(),
                        vec![f2(m.uio), f2(m.uis), f2(m.uiois), f2(m.rep_u)],
                    )
                })
                .collect();
            table(out, &["UiO", "UiS", "UiOiS", "repU"], &rows);
            out.push('\n');
        }
    }
}

fn mean_ident(r: &DisclosureReport) -> (f64, f64) {
    let n = r.ident.len().max(1) as f64;
    (
        r.ident.iter().map(|m| m.uio).sum::<f64>() / n,
        r.ident.iter().map(|m| m.rep_u).sum::<f64>() / n,
    )
}

fn attrib_block(out: &mut String, t: &TargetReport, m: usize) {
    let _ = writeln!(
        out,
        "Table of attribute disclosure measures for {} from {} synthetic data set(s)",
        t.target, m
    );
    out.push('\n');
    let rows: Vec<_> = t
        .replicates
        .iter()
        .map(|r| {
            let a = &r.attrib;
            (
                r.replicate.to_string(),
                vec![
                    f2(a.dorig),
                    f2(a.dsyn),
                    f2(a.is),
                    f2(a.dis),
                    f2(a.disco),
                    f2(a.disdio),
                    f2(a.dcap_d),
                    a.max_denom.to_string(),
                    f2(a.mean_denom),
                ],
            )
        })
        .collect();
    table(
        out,
        &[
            "Dorig",
            "Dsyn",
            "iS",
            "DiS",
            "DiSCO",
            "DiSDiO",
            "DCAPorig",
            "max_denom",
            "mean_denom",
        ],
        &rows,
    );
    if let Some(first) = t.replicates.first() {
        if !first.generalized.is_empty() {
            out.push('\n');
            let header: Vec<String> = first.generalized.iter().map(|g| format!("tau={}", g.tau)).collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<_> = t
                .replicates
                .iter()
                .map(|r| {
                    (
                        r.replicate.to_string(),
                        r.generalized.iter().map(|g| f2(g.value)).collect(),
                    )
                })
                .collect();
            table(out, &header, &rows);
        }
    }
    out.push('\n');
}

fn caps_block(out: &mut String, t: &TargetReport) {
    let _ = writeln!(out, "All CAP measures for {}", t.target);
    out.push('\n');
    let header: Vec<&str> = t
        .replicates
        .first()
        .map(|r| r.all_caps.named().iter().map(|(n, _)| *n).collect())
        .unwrap_or_default();
    let mut rows: Vec<_> = t
        .replicates
        .iter()
        .map(|r| {
            (
                r.replicate.to_string(),
                r.all_caps.named().iter().map(|(_, v)| f2(*v)).collect(),
            )
        })
        .collect();
    if t.replicates.len() > 1 {
        rows.push(("mean".to_string(), t.mean_caps().iter().map(|(_, v)| f2(*v)).collect()));
    }
    table(out, &header, &rows);
    for r in &t.replicates {
        if !r.all_caps.undefined.is_empty() {
            let _ = writeln!(
                out,
                "replicate {}: zero denominator for {}",
                r.replicate,
                r.all_caps.undefined.join(" ")
            );
        }
    }
    out.push('\n');
}

fn check_1way_block(out: &mut String, t: &TargetReport) {
    let flagged: Vec<_> = t.replicates.iter().filter(|r| !r.check_1way.is_empty()).collect();
    if flagged.is_empty() {
        let _ = writeln!(
            out,
            "No target level of {} contributes disproportionately to disclosure\n",
            t.target
        );
        return;
    }
    out.push_str("Details of target level contributing disproportionately to disclosure\n");
    for r in flagged {
        if t.replicates.len() > 1 {
            let _ = writeln!(out, "Synthetic data set {}", r.replicate);
        }
        let rows: Vec<_> = r
            .check_1way
            .iter()
            .map(|c| {
                (
                    c.level.clone(),
                    vec![
                        c.level.clone(),
                        c.all.to_string(),
                        f2(c.pct_level_all),
                        c.total_disclosive.to_string(),
                        c.n_level_dis.to_string(),
                        f2(c.pct_level_dis),
                    ],
                )
            })
            .collect();
        table(
            out,
            &[
                "Level",
                "All",
                "PctLevelAll",
                "totalDisclosive",
                "nLevelDis",
                "PctLevelDis",
            ],
            &rows,
        );
    }
    out.push('\n');
}

fn check_2way_block(out: &mut String, t: &TargetReport) {
    let flagged: Vec<_> = t.replicates.iter().filter(|r| !r.check_2way.is_empty()).collect();
    if flagged.is_empty() {
        let _ = writeln!(
            out,
            "No target-key pairs of {} contribute disproportionately to disclosure\n",
            t.target
        );
        return;
    }
    let _ = writeln!(
        out,
        "Details of target-key pairs contributing disproportionately to disclosure of {}",
        t.target
    );
    for r in flagged {
        if t.replicates.len() > 1 {
            let _ = writeln!(out, "Synthetic data set {}", r.replicate);
        }
        let rows: Vec<_> = r
            .check_2way
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    (i + 1).to_string(),
                    vec![
                        c.target_key_levs.clone(),
                        c.npairs.to_string(),
                        c.key.clone(),
                        c.key_target_total.to_string(),
                        c.key_total.to_string(),
                        f2(c.pct_target_key_level),
                    ],
                )
            })
            .collect();
        table(
            out,
            &[
                "target_key_levs",
                "npairs",
                "key",
                "key_target_total",
                "key_total",
                "PctTargetKeyLevel",
            ],
            &rows,
        );
    }
    out.push('\n');
}

fn summary_block(out: &mut String, r: &DisclosureReport) {
    let _ = writeln!(out, "Table of attribute disclosure measures for {} ", r.keys.join(" "));
    out.push_str("Original measure is  Dorig and synthetic measure is DiSCO \n");
    out.push_str("Variables Ordered by synthetic disclosure measure\n\n");
    let rows: Vec<_> = r
        .summary
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (
                format!("{} {}", i + 1, s.label),
                vec![
                    f2(s.attrib_orig),
                    f2(s.attrib_syn),
                    s.check1.clone(),
                    s.npairs.to_string(),
                    s.check2.clone(),
                ],
            )
        })
        .collect();
    table(out, &["attrib.orig", "attrib.syn", "check1", "Npairs", "check2"], &rows);
    out.push('\n');
}

pub fn render_text(r: &DisclosureReport, sections: &[Section]) -> String {
    let mut out = String::new();
    match r.kind {
        ReportKind::Multi => {
            let _ = writeln!(out, "Disclosure risk for {} records in the original data\n", r.n_orig);
        }
        ReportKind::Disclosure => {
            let _ = writeln!(
                out,
                "Disclosure measures from synthesis for {} records in original data.\n",
                r.n_orig
            );
        }
    }
    let wants = |s: Section| sections.contains(&s);
    if wants(Section::Ident) {
        ident_block(&mut out, r);
    }
    if r.targets.is_empty() {
        return out;
    }
    if wants(Section::Attrib) {
        match r.kind {
            ReportKind::Multi => summary_block(&mut out, r),
            ReportKind::Disclosure => {
                for t in &r.targets {
                    attrib_block(&mut out, t, r.m());
                }
            }
        }
    }
    for t in &r.targets {
        if wants(Section::AllCaps) {
            caps_block(&mut out, t);
        }
        if wants(Section::Check1Way) {
            check_1way_block(&mut out, t);
        }
        if wants(Section::Check2Way) {
            check_2way_block(&mut out, t);
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn render_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("json: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per (target, replicate, measure); identity rows have an empty target.
pub fn render_csv(r: &DisclosureReport) -> String {
    let mut out = String::from("target,replicate,measure,value\n");
    let mut row = |target: &str, rep: usize, measure: &str, value: String| {
        let _ = writeln!(out, "{},{rep},{measure},{value}", csv_field(target));
    };
    for (i, m) in r.ident.iter().enumerate() {
        for (name, v) in [("UiO", m.uio), ("UiS", m.uis), ("UiOiS", m.uiois), ("repU", m.rep_u)] {
            row("", i + 1, name, v.to_string());
        }
    }
    for t in &r.targets {
        for rep in &t.replicates {
            let a = &rep.attrib;
            for (name, v) in [
                ("Dorig", a.dorig),
                ("Dsyn", a.dsyn),
                ("iS", a.is),
                ("DiS", a.dis),
                ("DiSCO", a.disco),
                ("DiSDiO", a.disdio),
            ] {
                row(&t.target, rep.replicate, name, v.to_string());
            }
            row(&t.target, rep.replicate, "max_denom", a.max_denom.to_string());
            row(&t.target, rep.replicate, "mean_denom", a.mean_denom.to_string());
            for (name, v) in rep.all_caps.named() {
                row(&t.target, rep.replicate, name, v.to_string());
            }
            row(&t.target, rep.replicate, "N_b", rep.all_caps.n_b.to_string());
            row(&t.target, rep.replicate, "N_bp", rep.all_caps.n_bp.to_string());
            for g in &rep.generalized {
                row(&t.target, rep.replicate, &format!("tau_{}", g.tau), g.value.to_string());
            }
        }
    }
    out
}

pub fn render_report(r: &DisclosureReport, format: OutputFormat, sections: &[Section]) -> Result<String> {
    match format {
        OutputFormat::Text => Ok(render_text(r, sections)),
        OutputFormat::Json => render_json(r),
        OutputFormat::Csv => Ok(render_csv(r)),
        OutputFormat::Svg => Ok(svg::bar_chart(r)),
    }
}

pub fn render_sweep_text(s: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Disclosure measures by synthetic size for {} records in the original data, {} synthetic data set(s)\n",
        s.n_orig, s.m
    );
    for target in &s.targets {
        let _ = writeln!(out, "Target {target}");
        let mut header = vec!["fraction", "n_syn"];
        header.extend(SWEEP_MEASURES);
        let rows: Vec<_> = s
            .series(target)
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut cells = vec![p.fraction.to_string(), format!("{:.1}", p.n_syn)];
                cells.extend(SWEEP_MEASURES.iter().map(|m| f2(p.get(m))));
                ((i + 1).to_string(), cells)
            })
            .collect();
        table(&mut out, &header, &rows);
        out.push('\n');
    }
    out
}

pub fn render_sweep_csv(s: &SweepReport) -> String {
    let mut out = String::from("target,fraction,n_syn,measure,value\n");
    for p in &s.points {
        for m in SWEEP_MEASURES {
            let _ = writeln!(
                out,
                "{},{},{},{m},{}",
                csv_field(&p.target),
                p.fraction,
                p.n_syn,
                p.get(m)
            );
        }
    }
    out
}

pub fn render_sweep(s: &SweepReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Text => Ok(render_sweep_text(s)),
        OutputFormat::Json => render_json(s),
        OutputFormat::Csv => Ok(render_sweep_csv(s)),
        OutputFormat::Svg => Ok(svg::sweep_chart(s)),
    }
}
